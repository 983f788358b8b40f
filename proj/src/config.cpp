#include "cib/config.hpp"

#include "cib/error.hpp"

#include <cstdio>

namespace cib {
namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json& j, const Hyper& h) {
  j = {{"beta", h.beta}, {"lambdaM", h.lambda_m}, {"lambdaV", h.lambda_v}};
}

void from_json(const nlohmann::json& j, Hyper& h) {
  read(j, "beta", h.beta);
  read(j, "lambdaM", h.lambda_m);
  read(j, "lambdaV", h.lambda_v);
}

void to_json(nlohmann::json& j, const ObjectiveOptions& o) {
  j = {{"gradientPenalty", o.gradient_penalty}, {"cpvrSamples", o.cpvr_samples}};
}

void from_json(const nlohmann::json& j, ObjectiveOptions& o) {
  read(j, "gradientPenalty", o.gradient_penalty);
  read(j, "cpvrSamples", o.cpvr_samples);
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"inputDim", c.input_dim},
       {"representationDim", c.representation_dim},
       {"hiddenDims", c.hidden_dims},
       {"activation", std::string(to_string(c.activation))},
       {"outcomeKind", std::string(to_string(c.outcome))},
       {"sigmaFloor", c.sigma_floor},
       {"usePropensity", c.use_propensity},
       {"propensityClip", c.propensity_clip},
       {"deterministicEncoder", c.deterministic_encoder}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  read(j, "inputDim", c.input_dim);
  read(j, "representationDim", c.representation_dim);
  read(j, "hiddenDims", c.hidden_dims);
  if (j.contains("activation")) c.activation = parse_activation(j.at("activation").get<std::string>());
  if (j.contains("outcomeKind")) c.outcome = parse_outcome_kind(j.at("outcomeKind").get<std::string>());
  read(j, "sigmaFloor", c.sigma_floor);
  read(j, "usePropensity", c.use_propensity);
  read(j, "propensityClip", c.propensity_clip);
  read(j, "deterministicEncoder", c.deterministic_encoder);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"learningRate", c.learning_rate},
       {"adamBeta1", c.adam_beta1},
       {"adamBeta2", c.adam_beta2},
       {"adamEps", c.adam_eps},
       {"maxIterations", c.max_iterations},
       {"iterationUnit", c.unit == IterationUnit::step ? "step" : "epoch"},
       {"earlyStopPatience", c.early_stop_patience},
       {"validationInterval", c.validation_interval},
       {"batchSize", c.batch_size},
       {"criticStepsPerMainStep", c.critic_steps},
       {"criticWarmup", c.critic_warmup},
       {"hyper", c.hyper},
       {"objective", c.objective},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  read(j, "learningRate", c.learning_rate);
  read(j, "adamBeta1", c.adam_beta1);
  read(j, "adamBeta2", c.adam_beta2);
  read(j, "adamEps", c.adam_eps);
  read(j, "maxIterations", c.max_iterations);
  if (j.contains("iterationUnit")) {
    const auto u = j.at("iterationUnit").get<std::string>();
    if (u == "step") {
      c.unit = IterationUnit::step;
    } else if (u == "epoch") {
      c.unit = IterationUnit::epoch;
    } else {
      throw ConfigError("iterationUnit must be 'step' or 'epoch'");
    }
  }
  read(j, "earlyStopPatience", c.early_stop_patience);
  read(j, "validationInterval", c.validation_interval);
  read(j, "batchSize", c.batch_size);
  read(j, "criticStepsPerMainStep", c.critic_steps);
  read(j, "criticWarmup", c.critic_warmup);
  if (j.contains("hyper")) from_json(j.at("hyper"), c.hyper);
  if (j.contains("objective")) from_json(j.at("objective"), c.objective);
  read(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = {{"train", s.train}, {"valid", s.valid}, {"test", s.test}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SplitSpec& s) {
  read(j, "train", s.train);
  read(j, "valid", s.valid);
  read(j, "test", s.test);
  read(j, "seed", s.seed);
}

void to_json(nlohmann::json& j, const BenchmarkSpec& s) {
  j = {{"n", s.n}, {"dx", s.d_x}, {"bias", s.bias}, {"noiseSd", s.noise_sd}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, BenchmarkSpec& s) {
  read(j, "n", s.n);
  read(j, "dx", s.d_x);
  read(j, "bias", s.bias);
  read(j, "noiseSd", s.noise_sd);
  read(j, "seed", s.seed);
}

void to_json(nlohmann::json& j, const Standardizer& s) {
  j = {{"mean", s.mean}, {"scale", s.scale}, {"binary", s.binary}, {"warnings", s.warnings}};
}

void from_json(const nlohmann::json& j, Standardizer& s) {
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  s.binary = j.at("binary").get<std::vector<bool>>();
  s.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const GridSpec& g) {
  j = {{"beta", g.beta}, {"lambdaM", g.lambda_m}, {"lambdaV", g.lambda_v}, {"hiddenLayers", g.hidden_layers}};
}

void from_json(const nlohmann::json& j, GridSpec& g) {
  read(j, "beta", g.beta);
  read(j, "lambdaM", g.lambda_m);
  read(j, "lambdaV", g.lambda_v);
  read(j, "hiddenLayers", g.hidden_layers);
}

std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cib
