// cib: generate data, train, evaluate and run ablations from the command line.

#include "cib/checkpoint.hpp"
#include "cib/config.hpp"
#include "cib/dataset.hpp"
#include "cib/error.hpp"
#include "cib/evaluate.hpp"
#include "cib/rng.hpp"
#include "cib/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Flags shared by all subcommands. Unset optionals fall back to the config
// file, then to the built-in defaults.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int jobs = 1;
};

struct BenchmarkFlags {
  std::optional<long> n;
  std::optional<int> dx;
  std::optional<double> bias;
  std::optional<double> noise_sd;
};

struct TrainFlags {
  std::optional<std::string> data;
  std::optional<double> beta;
  std::optional<double> lambda_m;
  std::optional<double> lambda_v;
  bool deterministic_encoder = false;
  bool use_propensity = false;
  std::optional<double> lr;
  std::optional<int> max_iterations;
  std::optional<int> batch_size;
  std::optional<int> representation_dim;
  std::optional<std::string> hidden_dims;
  std::optional<std::string> activation;
};

struct EvalFlags {
  std::optional<std::string> model;
  std::optional<std::string> splits;
  std::optional<std::string> reject_ks;
  std::optional<std::string> metrics;
  std::optional<int> samples;
  bool deterministic = false;
  std::optional<int> repeats;
};

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw cib::ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw cib::ConfigError("config '" + path + "': " + ex.what());
  }
  if (!j.is_object()) throw cib::ConfigError("config '" + path + "' must hold a JSON object");
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw cib::DataError("cannot write '" + path.string() + "'");
}

fs::path output_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw cib::DataError("cannot create output directory '" + out + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* flag) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw cib::ConfigError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s, const char* flag) {
  std::vector<int> out;
  for (double v : parse_doubles(s, flag)) {
    if (v != static_cast<int>(v)) throw cib::ConfigError(std::string(flag) + " expects integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::uint64_t resolve_seed(const Common& common, const json& config) {
  if (common.seed) return *common.seed;
  return config.value("seed", std::uint64_t{0});
}

cib::BenchmarkSpec resolve_benchmark(const BenchmarkFlags& flags, const json& config, std::uint64_t seed) {
  cib::BenchmarkSpec spec;
  if (config.contains("benchmark")) from_json(config.at("benchmark"), spec);
  if (flags.n) spec.n = *flags.n;
  if (flags.dx) spec.d_x = *flags.dx;
  if (flags.bias) spec.bias = *flags.bias;
  if (flags.noise_sd) spec.noise_sd = *flags.noise_sd;
  spec.seed = seed;
  spec.validate();
  return spec;
}

struct TrainSetup {
  std::string data;
  cib::ModelConfig model;
  cib::TrainConfig train;
  cib::SplitSpec split;
  cib::GridSpec grid;
};

TrainSetup resolve_train(const TrainFlags& flags, const json& config, std::uint64_t seed, bool need_data) {
  TrainSetup s;
  if (config.contains("model")) from_json(config.at("model"), s.model);
  if (config.contains("train")) from_json(config.at("train"), s.train);
  if (config.contains("split")) from_json(config.at("split"), s.split);
  if (config.contains("grid")) from_json(config.at("grid"), s.grid);
  s.data = flags.data.value_or(config.value("data", std::string{}));
  if (need_data && s.data.empty()) throw cib::ConfigError("no dataset given (use --data or \"data\" in the config)");

  if (flags.beta) s.train.hyper.beta = *flags.beta;
  if (flags.lambda_m) s.train.hyper.lambda_m = *flags.lambda_m;
  if (flags.lambda_v) s.train.hyper.lambda_v = *flags.lambda_v;
  if (flags.lr) s.train.learning_rate = *flags.lr;
  if (flags.max_iterations) s.train.max_iterations = *flags.max_iterations;
  if (flags.batch_size) s.train.batch_size = *flags.batch_size;
  if (flags.deterministic_encoder) s.model.deterministic_encoder = true;
  if (flags.use_propensity) s.model.use_propensity = true;
  if (flags.representation_dim) s.model.representation_dim = *flags.representation_dim;
  if (flags.hidden_dims) s.model.hidden_dims = parse_ints(*flags.hidden_dims, "--hidden-dims");
  if (flags.activation) s.model.activation = cib::parse_activation(*flags.activation);
  s.train.seed = seed;
  s.split.seed = seed;
  s.train.validate();
  s.split.validate();
  s.grid.validate();
  return s;
}

void adapt_to_data(cib::ModelConfig& model, const cib::ObservationalDataset& ds) {
  model.input_dim = ds.dim();
  model.outcome = ds.outcome;
  model.validate();
}

ordered_json snapshot(const char* command, std::uint64_t seed) {
  ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  return j;
}

int cmd_gen(const Common& common, const BenchmarkFlags& flags) {
  const json config = read_config(common.config_path);
  const std::uint64_t seed = resolve_seed(common, config);
  const cib::BenchmarkSpec spec = resolve_benchmark(flags, config, seed);
  const fs::path dir = output_dir(common.out);
  const cib::Benchmark b = cib::synthesize_benchmark(spec);
  cib::write_csv(dir / "data.csv", b.data);
  cib::write_schema(dir / "schema.json", cib::DatasetSchema::describe(b.data));
  ordered_json snap = snapshot("gen", seed);
  snap["benchmark"] = json(spec);
  write_text(dir / "config.json", snap.dump(2) + "\n");
  std::cout << "wrote " << b.data.size() << " rows to " << (dir / "data.csv").string() << "\n";
  return 0;
}

int cmd_train(const Common& common, const TrainFlags& flags) {
  const json config = read_config(common.config_path);
  const std::uint64_t seed = resolve_seed(common, config);
  TrainSetup setup = resolve_train(flags, config, seed, true);
  const cib::ObservationalDataset data = cib::load_dataset(setup.data);
  adapt_to_data(setup.model, data);
  const fs::path dir = output_dir(common.out);

  const cib::PreparedSplits prepared = cib::prepare_splits(data, setup.split);
  for (const auto& w : prepared.standardizer.warnings) std::cerr << "warning: " << w << "\n";

  cib::FitResult fitted;
  cib::ModelConfig chosen_model = setup.model;
  cib::TrainConfig chosen_train = setup.train;
  ordered_json grid_report;
  if (setup.grid.empty()) {
    fitted = cib::fit(cib::initial_model(setup.model, seed), prepared.splits.train, prepared.splits.valid, setup.train);
  } else {
    const auto space = cib::expand_grid(setup.model, setup.train, setup.grid);
    cib::GridResult result = cib::grid_search(space, prepared.splits.train, prepared.splits.valid, common.jobs);
    for (std::size_t i = 0; i < space.size(); ++i)
      grid_report.push_back({{"model", json(space[i].model)},
                             {"hyper", json(space[i].train.hyper)},
                             {"validLoss", result.valid_losses[i]}});
    chosen_model = space[result.best].model;
    chosen_train = space[result.best].train;
    fitted = std::move(result.best_fit);
  }

  cib::Checkpoint ckpt{fitted.model, chosen_train, setup.split, prepared.standardizer, seed, fitted.best_iteration};
  cib::save_checkpoint(dir / "model.json", ckpt);

  std::string log;
  for (const auto& r : fitted.log) log += cib::to_json_line(r) + "\n";
  write_text(dir / "train.log.jsonl", log);

  ordered_json snap = snapshot("train", seed);
  snap["data"] = setup.data;
  snap["model"] = json(setup.model);
  snap["train"] = json(setup.train);
  snap["split"] = json(setup.split);
  if (!setup.grid.empty()) {
    snap["grid"] = json(setup.grid);
    snap["gridResults"] = grid_report;
  }
  write_text(dir / "config.json", snap.dump(2) + "\n");

  std::cout << "trained " << fitted.log.size() << " iterations; best validation loss " << fitted.best_valid_loss
            << " at iteration " << fitted.best_iteration << (fitted.stopped_early ? " (early stop)" : "") << "\n";
  return 0;
}

struct EvalSetup {
  std::vector<std::string> splits;
  std::vector<std::string> metrics;
  cib::EvalOptions options;
};

EvalSetup resolve_eval(const EvalFlags& flags, const json& config, std::uint64_t seed) {
  const json section = config.value("eval", json::object());
  EvalSetup s;
  s.splits = flags.splits ? split_list(*flags.splits)
                          : section.value("splits", std::vector<std::string>{"in", "out"});
  if (s.splits.empty()) throw cib::ConfigError("--split needs at least one split name");
  for (const auto& name : s.splits)
    if (name != "in" && name != "out" && name != "train" && name != "valid" && name != "test" && name != "all")
      throw cib::ConfigError("unknown split '" + name + "' (expected in, out, train, valid, test or all)");
  s.metrics = flags.metrics ? split_list(*flags.metrics) : section.value("metrics", std::vector<std::string>{});
  for (const auto& m : s.metrics)
    if (m != "sqrtPehe" && m != "ateError" && m != "policyRisk" && m != "auc")
      throw cib::ConfigError("unknown metric '" + m + "' (expected sqrtPehe, ateError, policyRisk or auc)");
  s.options.reject_ks = flags.reject_ks ? parse_doubles(*flags.reject_ks, "--reject-ks")
                                        : section.value("rejectKs", std::vector<double>{});
  s.options.predict.samples = flags.samples.value_or(section.value("samples", 100));
  s.options.predict.deterministic = flags.deterministic || section.value("deterministic", false);
  s.options.predict.seed = seed;
  s.options.control_seed = cib::make_stream(seed, "reject.control")();
  return s;
}

ordered_json eval_snapshot(const EvalSetup& s) {
  return {{"splits", s.splits},
          {"metrics", s.metrics},
          {"rejectKs", s.options.reject_ks},
          {"samples", s.options.predict.samples},
          {"deterministic", s.options.predict.deterministic}};
}

void require_metrics(const cib::ObservationalDataset& ds, const std::vector<std::string>& metrics,
                     const std::string& where) {
  const bool has_tau = ds.ycf || (ds.mu0 && ds.mu1);
  for (const auto& m : metrics) {
    std::string missing;
    if ((m == "sqrtPehe" || m == "ateError") && !has_tau) missing = "ycf (or mu0 and mu1)";
    if (m == "policyRisk" && !ds.e) missing = "e";
    if (m == "auc" && !ds.ycf) missing = "ycf";
    if (m == "auc" && ds.outcome != cib::OutcomeKind::binary)
      throw cib::DataError("metric auc needs a binary outcome (" + where + ")");
    if (!missing.empty())
      throw cib::DataError("metric " + m + " needs column " + missing + ", which " + where + " lacks");
  }
}

int cmd_eval(const Common& common, const TrainFlags& train_flags, const EvalFlags& flags) {
  const json config = read_config(common.config_path);
  const std::string model_path = flags.model.value_or(config.value("modelPath", std::string{}));
  if (model_path.empty()) throw cib::ConfigError("no checkpoint given (use --model)");
  const std::string data_path = train_flags.data.value_or(config.value("data", std::string{}));
  if (data_path.empty()) throw cib::ConfigError("no dataset given (use --data or \"data\" in the config)");

  const cib::Checkpoint ckpt = cib::load_checkpoint(model_path);
  const std::uint64_t seed = common.seed ? *common.seed : config.value("seed", ckpt.seed);
  const EvalSetup setup = resolve_eval(flags, config, seed);
  const cib::ObservationalDataset data = cib::load_dataset(data_path);
  if (data.dim() != ckpt.model.config.input_dim)
    throw cib::DataError("dataset has " + std::to_string(data.dim()) + " covariates, model expects " +
                         std::to_string(ckpt.model.config.input_dim));
  require_metrics(data, setup.metrics, "'" + data_path + "'");
  const fs::path dir = output_dir(common.out);

  const bool needs_split = std::any_of(setup.splits.begin(), setup.splits.end(),
                                       [](const std::string& s) { return s != "all"; });
  std::optional<cib::Splits> splits;
  if (needs_split) {
    splits = cib::split(data, ckpt.split);
    splits->train = ckpt.standardizer.apply(splits->train);
    splits->valid = ckpt.standardizer.apply(splits->valid);
    splits->test = ckpt.standardizer.apply(splits->test);
  }
  auto rows_for = [&](const std::string& name) -> std::pair<cib::ObservationalDataset, bool> {
    if (name == "all") return {ckpt.standardizer.apply(data), false};
    if (name == "in") return {splits->train.concat(splits->valid), true};
    if (name == "train") return {splits->train, true};
    if (name == "valid") return {splits->valid, true};
    return {splits->test, false};
  };

  ordered_json report;
  report["configHash"] = cib::to_json(ckpt)["configHash"];
  report["seed"] = seed;
  auto& results = report["splits"] = ordered_json::object();
  bool first = true;
  for (const auto& name : setup.splits) {
    const auto [rows, in_sample] = rows_for(name);
    const cib::EvalReport r = cib::evaluate(ckpt.model, rows, setup.options, in_sample);
    results[name] = cib::to_json(r);
    if (!setup.options.reject_ks.empty()) {
      const std::string csv = cib::curve_csv(r);
      write_text(dir / ("curve." + name + ".csv"), csv);
      if (first) write_text(dir / "curve.csv", csv);
    }
    std::cout << name << ": rows " << r.rows;
    if (r.sqrt_pehe) std::cout << ", sqrtPehe " << *r.sqrt_pehe;
    if (r.ate_error) std::cout << ", ateError " << *r.ate_error;
    if (r.policy_risk) std::cout << ", policyRisk " << *r.policy_risk;
    if (r.auc) std::cout << ", auc " << *r.auc;
    std::cout << ", factualRmse " << r.factual_rmse << "\n";
    first = false;
  }
  write_text(dir / "eval.json", report.dump(2) + "\n");

  ordered_json snap = snapshot("eval", seed);
  snap["data"] = data_path;
  snap["modelPath"] = model_path;
  snap["eval"] = eval_snapshot(setup);
  write_text(dir / "config.json", snap.dump(2) + "\n");
  return 0;
}

// A directory whose subdirectories each hold a data.csv is a set of
// realizations, one per repeat, in name order.
std::vector<fs::path> realizations(const fs::path& path) {
  std::vector<fs::path> out;
  if (fs::is_directory(path) && !fs::exists(path / "data.csv"))
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_directory() && fs::exists(entry.path() / "data.csv")) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_ablate(const Common& common, const BenchmarkFlags& bench_flags, const TrainFlags& train_flags,
               const EvalFlags& flags) {
  const json config = read_config(common.config_path);
  const std::uint64_t seed = resolve_seed(common, config);
  TrainSetup setup = resolve_train(train_flags, config, seed, false);
  EvalSetup eval = resolve_eval(flags, config, seed);
  const json section = config.value("ablate", json::object());

  const auto realization_dirs = setup.data.empty() ? std::vector<fs::path>{} : realizations(setup.data);
  int repeats = flags.repeats.value_or(section.value(
      "repeats", realization_dirs.empty() ? 10 : static_cast<int>(realization_dirs.size())));
  if (repeats < 1) throw cib::ConfigError("--repeats must be >= 1");
  if (!realization_dirs.empty() && repeats > static_cast<int>(realization_dirs.size()))
    throw cib::ConfigError("--repeats " + std::to_string(repeats) + " exceeds the " +
                           std::to_string(realization_dirs.size()) + " realizations in '" + setup.data + "'");
  std::optional<cib::BenchmarkSpec> bench;
  if (setup.data.empty()) bench = resolve_benchmark(bench_flags, config, seed);
  std::optional<cib::ObservationalDataset> shared;
  if (!setup.data.empty() && realization_dirs.empty()) shared = cib::load_dataset(setup.data);
  const fs::path dir = output_dir(common.out);

  std::vector<std::vector<cib::AblationRun>> runs;
  ordered_json per_repeat = ordered_json::array();
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(r);
    cib::ObservationalDataset data;
    if (bench) {
      cib::BenchmarkSpec spec = *bench;
      spec.seed = run_seed;
      data = cib::synthesize_benchmark(spec).data;
    } else if (shared) {
      data = *shared;
    } else {
      data = cib::load_dataset(realization_dirs[static_cast<std::size_t>(r)]);
    }
    require_metrics(data, eval.metrics, "repeat " + std::to_string(r));
    cib::ModelConfig model = setup.model;
    adapt_to_data(model, data);
    cib::SplitSpec split = setup.split;
    split.seed = run_seed;
    cib::TrainConfig train = setup.train;
    train.seed = run_seed;
    cib::EvalOptions opts = eval.options;
    opts.predict.seed = run_seed;
    opts.control_seed = cib::make_stream(run_seed, "reject.control")();
    const cib::PreparedSplits prepared = cib::prepare_splits(data, split);
    runs.push_back(cib::ablation_run(prepared.splits, model, train, opts, common.jobs));

    ordered_json rep = {{"seed", run_seed}, {"arms", ordered_json::array()}};
    for (const auto& arm : runs.back()) {
      ordered_json in = cib::to_json(arm.in_sample);
      ordered_json out = cib::to_json(arm.out_sample);
      in.erase("perSampleKl");
      out.erase("perSampleKl");
      rep["arms"].push_back({{"name", arm.name}, {"inSample", in}, {"outSample", out}});
    }
    per_repeat.push_back(rep);
    std::cerr << "repeat " << r + 1 << "/" << repeats << " done\n";
  }

  ordered_json report = cib::ablation_table(runs);
  report["runs"] = per_repeat;
  write_text(dir / "ablation.json", report.dump(2) + "\n");

  for (const auto& row : report["rows"]) {
    std::cout << row["name"].get<std::string>();
    for (const char* side : {"inSample", "outSample"})
      if (row[side].contains("sqrtPehe"))
        std::cout << "  " << side << " sqrtPehe " << row[side]["sqrtPehe"]["mean"].get<double>() << " +- "
                  << row[side]["sqrtPehe"]["se"].get<double>();
    std::cout << "\n";
  }

  ordered_json snap = snapshot("ablate", seed);
  if (bench) snap["benchmark"] = json(*bench);
  if (!setup.data.empty()) snap["data"] = setup.data;
  snap["model"] = json(setup.model);
  snap["train"] = json(setup.train);
  snap["split"] = json(setup.split);
  snap["eval"] = eval_snapshot(eval);
  snap["ablate"] = {{"repeats", repeats}};
  write_text(dir / "config.json", snap.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file (flags override it)");
  cmd->add_option("--seed", c.seed, "Run seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--jobs", c.jobs, "Parallel fits")->check(CLI::PositiveNumber);
}

void add_benchmark(CLI::App* cmd, BenchmarkFlags& b) {
  cmd->add_option("--n", b.n, "Rows (>= 50)");
  cmd->add_option("--dx", b.dx, "Covariates (>= 2)");
  cmd->add_option("--bias", b.bias, "Selection strength");
  cmd->add_option("--noise-sd", b.noise_sd, "Outcome noise standard deviation");
}

void add_train(CLI::App* cmd, TrainFlags& t, bool data_flag) {
  if (data_flag) cmd->add_option("--data", t.data, "Dataset directory or CSV file");
  cmd->add_option("--beta", t.beta, "Compression weight");
  cmd->add_option("--lambda-m", t.lambda_m, "MIGDR weight");
  cmd->add_option("--lambda-v", t.lambda_v, "CPVR weight");
  cmd->add_flag("--deterministic-encoder", t.deterministic_encoder, "Use z = mu");
  cmd->add_flag("--use-propensity", t.use_propensity, "Inverse-propensity weighting");
  cmd->add_option("--lr", t.lr, "Adam learning rate");
  cmd->add_option("--max-iterations", t.max_iterations, "Iteration budget");
  cmd->add_option("--batch-size", t.batch_size, "Minibatch rows");
  cmd->add_option("--representation-dim", t.representation_dim, "Latent dimension");
  cmd->add_option("--hidden-dims", t.hidden_dims, "Comma-separated hidden widths");
  cmd->add_option("--activation", t.activation, "elu or relu");
}

void add_eval(CLI::App* cmd, EvalFlags& e) {
  cmd->add_option("--reject-ks", e.reject_ks, "Comma-separated rejection fractions");
  cmd->add_option("--metrics", e.metrics, "Required metrics: sqrtPehe,ateError,policyRisk,auc");
  cmd->add_option("--samples", e.samples, "Posterior samples per prediction");
  cmd->add_flag("--deterministic", e.deterministic, "Predict with z = mu");
}

void report_error(const std::string& command, const char* kind, const std::string& message) {
  std::cerr << ordered_json{{"error", kind}, {"command", command}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal information bottleneck estimator for individual treatment effects"};
  app.require_subcommand(1);
  Common common;
  BenchmarkFlags bench;
  TrainFlags train;
  EvalFlags eval;

  auto* gen = app.add_subcommand("gen", "Write a synthetic benchmark dataset");
  add_common(gen, common);
  add_benchmark(gen, bench);

  auto* tr = app.add_subcommand("train", "Fit a model and write a checkpoint");
  add_common(tr, common);
  add_train(tr, train, true);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  add_common(ev, common);
  ev->add_option("--data", train.data, "Dataset directory or CSV file");
  ev->add_option("--model", eval.model, "Checkpoint (model.json)");
  ev->add_option("--split", eval.splits, "Comma-separated: in,out,train,valid,test,all");
  add_eval(ev, eval);

  auto* ab = app.add_subcommand("ablate", "Compare CIB with its regularizers removed");
  add_common(ab, common);
  add_benchmark(ab, bench);
  add_train(ab, train, true);
  add_eval(ab, eval);
  ab->add_option("--repeats", eval.repeats, "Seeds (or realizations) to average over");

  CLI11_PARSE(app, argc, argv);

  std::string command = "cib";
  try {
    if (*gen) return command = "gen", cmd_gen(common, bench);
    if (*tr) return command = "train", cmd_train(common, train);
    if (*ev) return command = "eval", cmd_eval(common, train, eval);
    if (*ab) return command = "ablate", cmd_ablate(common, bench, train, eval);
  } catch (const cib::ConfigError& ex) {
    report_error(command, "config", ex.what());
  } catch (const cib::DataError& ex) {
    report_error(command, "data", ex.what());
  } catch (const cib::TrainingError& ex) {
    report_error(command, "training", ex.what());
  } catch (const cib::Error& ex) {
    report_error(command, "error", ex.what());
  } catch (const json::exception& ex) {
    report_error(command, "config", ex.what());
  } catch (const std::exception& ex) {
    report_error(command, "internal", ex.what());
  }
  return 1;
}
