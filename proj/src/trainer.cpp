#include "cib/trainer.hpp"

#include "cib/config.hpp"
#include "cib/error.hpp"
#include "cib/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

namespace cib {

using diff::Var;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learningRate must be positive");
  if (max_iterations < 1) throw ConfigError("maxIterations must be >= 1");
  if (batch_size < 2) throw ConfigError("batchSize must be >= 2");
  if (validation_interval < 1) throw ConfigError("validationInterval must be >= 1");
  if (early_stop_patience < 1) throw ConfigError("earlyStopPatience must be >= 1");
  if (critic_steps < 0 || critic_warmup < 0) throw ConfigError("critic step counts must be non-negative");
  if (objective.cpvr_samples < 2) throw ConfigError("cpvrSamples must be >= 2");
  if (objective.gradient_penalty < 0.0) throw ConfigError("gradientPenalty must be non-negative");
}

std::string to_json_line(const LogRecord& r) {
  nlohmann::ordered_json j;
  j["iter"] = r.iter;
  j["l0"] = r.loss.l0;
  j["l1"] = r.loss.l1;
  j["lC"] = r.loss.lC;
  j["lM"] = r.loss.lM;
  j["lV"] = r.loss.lV;
  j["total"] = r.loss.total;
  j["criticObj"] = r.loss.critic;
  if (r.valid_loss) j["validLoss"] = *r.valid_loss;
  return j.dump();
}

void GridSpec::validate() const {
  constexpr double allowed[] = {0.01, 0.1, 1.0, 10.0, 100.0};
  auto check = [&](const std::vector<double>& axis, const char* name) {
    for (double v : axis)
      if (std::find(std::begin(allowed), std::end(allowed), v) == std::end(allowed))
        throw ConfigError(std::string("grid value ") + nlohmann::json(v).dump() + " for " + name +
                          " is not one of 0.01, 0.1, 1, 10, 100");
  };
  check(beta, "beta");
  check(lambda_m, "lambdaM");
  check(lambda_v, "lambdaV");
  for (int layers : hidden_layers)
    if (layers < 1 || layers > 3) throw ConfigError("grid hiddenLayers must be 1, 2 or 3");
}

std::vector<GridCandidate> expand_grid(const ModelConfig& model, const TrainConfig& train, const GridSpec& grid) {
  grid.validate();
  auto axis = [](const std::vector<double>& values, double base) {
    return values.empty() ? std::vector<double>{base} : values;
  };
  const int width = model.hidden_dims.empty() ? 64 : model.hidden_dims.front();
  const std::vector<int> layers =
      grid.hidden_layers.empty() ? std::vector<int>{static_cast<int>(model.hidden_dims.size())} : grid.hidden_layers;
  std::vector<GridCandidate> out;
  for (int n_layers : layers)
    for (double b : axis(grid.beta, train.hyper.beta))
      for (double m : axis(grid.lambda_m, train.hyper.lambda_m))
        for (double v : axis(grid.lambda_v, train.hyper.lambda_v)) {
          GridCandidate c{model, train};
          if (!grid.hidden_layers.empty()) c.model.hidden_dims.assign(static_cast<std::size_t>(n_layers), width);
          c.train.hyper = {b, m, v};
          out.push_back(std::move(c));
        }
  return out;
}

CibModel initial_model(const ModelConfig& config, std::uint64_t seed) {
  Rng init = make_stream(seed, "init");
  return CibModel::create(config, init);
}

namespace {

/// Epoch-wise shuffled minibatches. A batch missing one treatment group gets
/// one random row of that group appended.
class MinibatchSampler {
 public:
  MinibatchSampler(const ObservationalDataset& data, int batch_size, Rng rng)
      : data_(data), batch_(std::min<Eigen::Index>(batch_size, data.size())), rng_(std::move(rng)) {
    order_.resize(static_cast<std::size_t>(data.size()));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < data.size(); ++i) (data.t(i) > 0.5 ? treated_ : control_).push_back(i);
    pos_ = order_.size();
  }

  std::vector<Eigen::Index> next() {
    if (pos_ + static_cast<std::size_t>(batch_) > order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      pos_ = 0;
    }
    std::vector<Eigen::Index> idx(order_.begin() + pos_, order_.begin() + pos_ + batch_);
    pos_ += batch_;
    bool has_treated = false;
    bool has_control = false;
    for (auto i : idx) (data_.t(i) > 0.5 ? has_treated : has_control) = true;
    if (!has_treated) idx.push_back(pick(treated_));
    if (!has_control) idx.push_back(pick(control_));
    return idx;
  }

  Eigen::Index steps_per_epoch() const { return (data_.size() + batch_ - 1) / batch_; }

 private:
  Eigen::Index pick(const std::vector<Eigen::Index>& pool) {
    std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
    return pool[d(rng_)];
  }

  const ObservationalDataset& data_;
  Eigen::Index batch_;
  Rng rng_;
  std::vector<Eigen::Index> order_;
  std::vector<Eigen::Index> treated_;
  std::vector<Eigen::Index> control_;
  std::size_t pos_ = 0;
};

Batch make_batch(const ObservationalDataset& d, const std::vector<Eigen::Index>& idx) {
  Batch b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  b.x.resize(n, d.x.cols());
  b.t.resize(n, 1);
  b.y.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.x.row(i) = d.x.row(idx[i]);
    b.t(i, 0) = d.t(idx[i]);
    b.y(i, 0) = d.yf(idx[i]);
  }
  return b;
}

ParamRefs refs(CibModel& model, std::initializer_list<ParamGroup> groups) {
  ParamRefs out;
  for (ParamGroup g : groups)
    model.for_each_parameter(g, CibModel::Visitor([&out](const std::string& name, Tensor& t) {
                               out.emplace_back(name, &t);
                             }));
  return out;
}

Tensor encoder_noise(const CibModel& model, Eigen::Index rows, Rng& rng) {
  const int dz = model.config.representation_dim;
  if (model.config.deterministic_encoder) return Tensor::Zero(rows, dz);
  return standard_normal(rows, dz, rng);
}

void check_finite(const LossReport& r, int iter) {
  const std::pair<const char*, double> terms[] = {{"l0", r.l0}, {"l1", r.l1}, {"lC", r.lC},
                                                  {"lM", r.lM}, {"lV", r.lV}, {"criticObj", r.critic}};
  for (const auto& [name, value] : terms)
    if (!std::isfinite(value))
      throw TrainingError("non-finite loss term '" + std::string(name) + "' at iteration " + std::to_string(iter));
}

double critic_step(CibModel& model, AdamState& state, const Batch& batch, Rng& noise, const TrainConfig& cfg) {
  diff::Graph g;
  const BoundModel bound = bind(g, model);
  Var x = g.constant(batch.x);
  const GaussianOutput enc = encode(bound.encoder, x);
  Var z = reparameterize(enc.mu, enc.sigma, g.constant(encoder_noise(model, batch.x.rows(), noise)));
  const Tensor t_marginal = permute_rows(batch.t, noise);
  const CriticObjective obj =
      dv_critic_objective(bound.critic, x, z, batch.t, t_marginal, cfg.objective.gradient_penalty);
  const auto grads = g.backward(obj.value, -1.0);
  adam_step(state, refs(model, {ParamGroup::critic}), grads, cfg.adam());
  return obj.value.item();
}

LossReport main_step(CibModel& model, AdamState& state, const Batch& batch, Rng& noise, Rng& cpvr_noise,
                     const TrainConfig& cfg, int iter, double critic_value) {
  diff::Graph g;
  const BoundModel bound = bind(g, model);
  ObjectiveNoise draws;
  draws.eps = encoder_noise(model, batch.x.rows(), noise);
  for (int k = 0; k < cfg.objective.cpvr_samples; ++k)
    draws.cpvr_eps.push_back(encoder_noise(model, batch.x.rows(), cpvr_noise));
  Objective obj = total_objective(bound, batch, cfg.hyper, draws);
  obj.report.critic = critic_value;
  check_finite(obj.report, iter);
  const auto grads = g.backward(obj.total, -1.0);
  adam_step(state, refs(model, {ParamGroup::encoder, ParamGroup::heads, ParamGroup::prior}), grads, cfg.adam());
  return obj.report;
}

void propensity_step(CibModel& model, AdamState& state, const Batch& batch, const TrainConfig& cfg) {
  diff::Graph g;
  const BoundModel bound = bind(g, model);
  Var logit = mlp_forward(bound.propensity->net, g.constant(batch.x));
  Var nll = diff::mean(diff::softplus(logit) - g.constant(batch.t) * logit);
  const auto grads = g.backward(nll);
  adam_step(state, refs(model, {ParamGroup::propensity}), grads, cfg.adam());
}

}  // namespace

double validation_loss(const CibModel& model, const ObservationalDataset& data) {
  diff::Graph g;
  const BoundModel bound = bind(g, model);
  Var x = g.constant(data.x);
  Var mu = encode(bound.encoder, x).mu;
  const Tensor y = column(data.yf);
  const Tensor t = column(data.t);
  Var ll = log_likelihood(bound.head1, mu, y) * g.constant(t) +
           log_likelihood(bound.head0, mu, y) * g.constant(Tensor((1.0 - t.array()).matrix()));
  return -diff::mean(ll).item();
}

FitResult fit(CibModel model, const ObservationalDataset& train, const ObservationalDataset& valid,
              const TrainConfig& cfg) {
  cfg.validate();
  train.validate();
  if (train.dim() != model.config.input_dim)
    throw DataError("training data has " + std::to_string(train.dim()) + " covariates, model expects " +
                    std::to_string(model.config.input_dim));

  MinibatchSampler batches(train, cfg.batch_size, make_stream(cfg.seed, "minibatch"));
  MinibatchSampler critic_batches(train, cfg.batch_size, make_stream(cfg.seed, "critic.minibatch"));
  Rng noise = make_stream(cfg.seed, "noise");
  Rng cpvr_noise = make_stream(cfg.seed, "noise.cpvr");
  Rng critic_noise = make_stream(cfg.seed, "critic.noise");

  AdamState main_state;
  AdamState critic_state;
  AdamState propensity_state;
  const bool critic_active = cfg.hyper.lambda_m != 0.0;
  const long total_steps = cfg.unit == IterationUnit::step
                               ? cfg.max_iterations
                               : static_cast<long>(cfg.max_iterations) * batches.steps_per_epoch();

  FitResult result;
  result.model = model;
  double best = std::numeric_limits<double>::infinity();
  int checks_since_best = 0;
  double critic_value = 0.0;

  for (long step = 0; step < total_steps; ++step) {
    const int iter = static_cast<int>(step);
    if (critic_active) {
      const int n_critic = cfg.critic_steps + (step == 0 ? cfg.critic_warmup : 0);
      for (int k = 0; k < n_critic; ++k)
        critic_value = critic_step(model, critic_state, make_batch(train, critic_batches.next()), critic_noise, cfg);
    }
    const Batch batch = make_batch(train, batches.next());
    if (model.propensity) propensity_step(model, propensity_state, batch, cfg);
    LogRecord record{iter, main_step(model, main_state, batch, noise, cpvr_noise, cfg, iter, critic_value), {}};

    const bool last = step + 1 == total_steps;
    if ((step + 1) % cfg.validation_interval == 0 || last) {
      const double vl = validation_loss(model, valid);
      if (!std::isfinite(vl)) throw TrainingError("non-finite validation loss at iteration " + std::to_string(iter));
      record.valid_loss = vl;
      if (vl < best) {
        best = vl;
        result.model = model;
        result.best_iteration = iter;
        checks_since_best = 0;
      } else if (++checks_since_best >= cfg.early_stop_patience) {
        result.stopped_early = true;
      }
    }
    result.log.push_back(record);
    if (result.stopped_early) break;
  }
  result.best_valid_loss = best;
  return result;
}

std::size_t select_best(std::span<const double> losses, std::span<const std::string> keys) {
  if (losses.empty() || losses.size() != keys.size()) throw ConfigError("select_best: bad candidate lists");
  std::size_t best = 0;
  for (std::size_t i = 1; i < losses.size(); ++i)
    if (losses[i] < losses[best] || (losses[i] == losses[best] && keys[i] < keys[best])) best = i;
  return best;
}

GridResult grid_search(std::span<const GridCandidate> space, const ObservationalDataset& train,
                       const ObservationalDataset& valid, int jobs) {
  if (space.empty()) throw ConfigError("grid_search needs at least one candidate");
  std::vector<std::optional<FitResult>> fits(space.size());
  std::vector<std::exception_ptr> errors(space.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < space.size(); i = next++) {
      try {
        const auto& c = space[i];
        fits[i] = fit(initial_model(c.model, c.train.seed), train, valid, c.train);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp<int>(jobs, 1, static_cast<int>(space.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::string> keys;
  for (const auto& c : space) keys.push_back(nlohmann::json{{"model", c.model}, {"train", c.train}}.dump());

  GridResult out;
  for (const auto& f : fits) out.valid_losses.push_back(f->best_valid_loss);
  out.best = select_best(out.valid_losses, keys);
  out.best_fit = std::move(*fits[out.best]);
  return out;
}

}  // namespace cib
