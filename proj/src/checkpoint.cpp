#include "cib/checkpoint.hpp"

#include "cib/config.hpp"
#include "cib/error.hpp"

#include <fstream>
#include <set>

namespace cib {
namespace {

constexpr std::pair<ParamGroup, const char*> kGroups[] = {{ParamGroup::encoder, "encoder"},
                                                         {ParamGroup::heads, "heads"},
                                                         {ParamGroup::prior, "prior"},
                                                         {ParamGroup::critic, "critic"},
                                                         {ParamGroup::propensity, "propensity"}};

}  // namespace

nlohmann::ordered_json model_to_json(const CibModel& model) {
  nlohmann::ordered_json j;
  j["spec"] = nlohmann::json(model.config);
  auto& networks = j["networks"] = nlohmann::ordered_json::object();
  for (const auto& [group, key] : kGroups) {
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    model.for_each_parameter(group, CibModel::ConstVisitor([&params](const std::string& name, const Tensor& t) {
                               params[name] = {{"shape", {t.rows(), t.cols()}},
                                               {"values", std::vector<double>(t.data(), t.data() + t.size())}};
                             }));
    if (!params.empty()) networks[key] = std::move(params);
  }
  return j;
}

CibModel model_from_json(const nlohmann::json& j) {
  try {
    ModelConfig config;
    from_json(j.at("spec"), config);
    Rng unused(0);
    CibModel model = CibModel::create(config, unused);
    const auto& networks = j.at("networks");
    std::set<std::string> seen;
    for (const auto& [group, key] : kGroups) {
      model.for_each_parameter(group, CibModel::Visitor([&](const std::string& name, Tensor& t) {
                                 const auto& entry = networks.at(key).at(name);
                                 const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
                                 const auto values = entry.at("values").get<std::vector<double>>();
                                 if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols() ||
                                     static_cast<Eigen::Index>(values.size()) != t.size())
                                   throw DataError("checkpoint parameter '" + name + "' has the wrong shape");
                                 std::copy(values.begin(), values.end(), t.data());
                                 seen.insert(name);
                               }));
    }
    for (const auto& [key, params] : networks.items())
      for (const auto& [name, _] : params.items())
        if (!seen.contains(name)) throw DataError("checkpoint has unknown parameter '" + name + "'");
    return model;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed model checkpoint: ") + ex.what());
  }
}

nlohmann::ordered_json to_json(const Checkpoint& c) {
  nlohmann::ordered_json j = model_to_json(c.model);
  const nlohmann::json train = c.train;
  j["configHash"] = config_hash(nlohmann::json{{"model", c.model.config}, {"train", train}});
  j["seed"] = c.seed;
  j["train"] = train;
  j["split"] = nlohmann::json(c.split);
  j["standardizer"] = nlohmann::json(c.standardizer);
  j["bestIteration"] = c.best_iteration;
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint c;
  c.model = model_from_json(j);
  try {
    from_json(j.at("train"), c.train);
    from_json(j.at("split"), c.split);
    from_json(j.at("standardizer"), c.standardizer);
    c.seed = j.at("seed").get<std::uint64_t>();
    c.best_iteration = j.value("bestIteration", -1);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed checkpoint: ") + ex.what());
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << to_json(c).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("checkpoint '" + path.string() + "': " + ex.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace cib
