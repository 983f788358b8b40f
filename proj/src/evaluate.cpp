#include "cib/evaluate.hpp"

#include "cib/error.hpp"
#include "cib/objective.hpp"
#include "cib/rng.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace cib {

PotentialOutcomes predict_potential_outcomes(const CibModel& model, const Tensor& x, const PredictOptions& opts) {
  if (opts.samples < 1) throw ConfigError("prediction needs at least one posterior sample");
  diff::Graph g;
  const BoundModel bound = bind(g, model);
  const GaussianOutput enc = encode(bound.encoder, g.constant(x));
  const bool deterministic = opts.deterministic || model.config.deterministic_encoder;

  PotentialOutcomes out;
  if (deterministic) {
    out.y0 = predict_outcome(bound.head0, enc.mu).value().col(0);
    out.y1 = predict_outcome(bound.head1, enc.mu).value().col(0);
    return out;
  }
  const Tensor mu = enc.mu.value();
  const Tensor sigma = enc.sigma.value();
  auto head = [&](const OutcomeHead& h, const Tensor& z) -> Eigen::VectorXd {
    Eigen::VectorXd raw = ((z * h.layer.weight).col(0).array() + h.layer.bias(0, 0)).matrix();
    if (model.config.outcome == OutcomeKind::binary) raw = (1.0 / (1.0 + (-raw.array()).exp())).matrix();
    return raw;
  };
  Rng rng = make_stream(opts.seed, "predict");
  out.y0 = Eigen::VectorXd::Zero(x.rows());
  out.y1 = Eigen::VectorXd::Zero(x.rows());
  for (int k = 0; k < opts.samples; ++k) {
    const Tensor z = mu + sigma.cwiseProduct(standard_normal(x.rows(), mu.cols(), rng));
    out.y0 += head(model.head0, z);
    out.y1 += head(model.head1, z);
  }
  out.y0 /= opts.samples;
  out.y1 /= opts.samples;
  return out;
}

Eigen::VectorXd ite_prediction(const CibModel& model, const Tensor& x, const PredictOptions& opts) {
  return predict_potential_outcomes(model, x, opts).ite();
}

Eigen::VectorXd uncertainty_score(const CibModel& model, const Tensor& x) {
  diff::Graph g;
  const BoundModel bound = bind(g, model);
  const GaussianOutput enc = encode(bound.encoder, g.constant(x));
  return kl_to_prior(enc.mu, enc.sigma, bound.prior).value().col(0);
}

LinearFit least_squares(const Tensor& x, const Eigen::VectorXd& y, std::vector<std::string>& warnings) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = x;
  Eigen::MatrixXd normal = design.transpose() * design;
  const Eigen::VectorXd rhs = design.transpose() * y;

  LinearFit fit;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const bool singular = n <= d || ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12;
  if (singular) {
    warnings.push_back("singular normal equations (" + std::to_string(n) + " rows, " + std::to_string(d) +
                       " covariates); using ridge 1e-6");
    normal.diagonal().array() += 1e-6;
    ldlt.compute(normal);
    fit.ridge = true;
  }
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  fit.intercept = beta(0);
  fit.coef = beta.tail(d);
  return fit;
}

PotentialOutcomes Ols2::predict(const Tensor& x) const {
  PotentialOutcomes out;
  out.y0 = (x * control.coef).array() + control.intercept;
  out.y1 = (x * treated.coef).array() + treated.intercept;
  return out;
}

Ols2 ols2_baseline(const ObservationalDataset& train) {
  std::vector<Eigen::Index> rows[2];
  for (Eigen::Index i = 0; i < train.size(); ++i) rows[train.t(i) > 0.5 ? 1 : 0].push_back(i);
  if (rows[0].empty() || rows[1].empty()) throw DataError("OLS-2 needs both treatment groups");
  Ols2 out;
  const auto control = train.subset(rows[0]);
  const auto treated = train.subset(rows[1]);
  out.control = least_squares(control.x, control.yf, out.warnings);
  out.treated = least_squares(treated.x, treated.yf, out.warnings);
  return out;
}

EvalReport evaluate_predictions(const ObservationalDataset& data, const PotentialOutcomes& predicted,
                                const Eigen::VectorXd& uncertainty, const EvalOptions& opts, bool in_sample) {
  const Eigen::Index n = data.size();
  if (predicted.y0.size() != n || predicted.y1.size() != n) throw DataError("prediction length mismatch");
  EvalReport r;
  r.rows = n;
  r.in_sample = in_sample;
  r.per_sample_kl = uncertainty;

  const Eigen::VectorXd tau_hat = predicted.ite();
  const auto tau = data.true_ite();
  if (tau) {
    r.sqrt_pehe = sqrt_pehe(*tau, tau_hat);
    r.ate_error = ate_error(*tau, tau_hat);
  }
  if (data.e) {
    const PolicyRisk pr = policy_risk(data.yf, data.t, *data.e, tau_hat);
    r.policy_risk = pr.value;
    r.policy_risk_fallback = pr.fallback_treated || pr.fallback_control;
  }
  Eigen::VectorXd factual(n);
  Eigen::VectorXd counterfactual(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool treated = data.t(i) > 0.5;
    factual(i) = treated ? predicted.y1(i) : predicted.y0(i);
    counterfactual(i) = treated ? predicted.y0(i) : predicted.y1(i);
  }
  if (data.outcome == OutcomeKind::binary && data.ycf) r.auc = auc(*data.ycf, counterfactual);
  r.factual_rmse = sqrt_pehe(data.yf, factual);

  if (!opts.reject_ks.empty()) {
    if (uncertainty.size() != n) throw DataError("rejection curve needs one uncertainty score per row");
    SubsetMetric metric;
    if (tau) {
      r.curve_metric = "sqrtPehe";
      metric = [&](std::span<const Eigen::Index> rows) {
        Eigen::VectorXd a(static_cast<Eigen::Index>(rows.size()));
        Eigen::VectorXd b(a.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          a(static_cast<Eigen::Index>(i)) = (*tau)(rows[i]);
          b(static_cast<Eigen::Index>(i)) = tau_hat(rows[i]);
        }
        return sqrt_pehe(a, b);
      };
    } else {
      r.curve_metric = "factualRmse";
      metric = [&](std::span<const Eigen::Index> rows) {
        Eigen::VectorXd a(static_cast<Eigen::Index>(rows.size()));
        Eigen::VectorXd b(a.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          a(static_cast<Eigen::Index>(i)) = data.yf(rows[i]);
          b(static_cast<Eigen::Index>(i)) = factual(rows[i]);
        }
        return sqrt_pehe(a, b);
      };
    }
    r.rejection_curve = rejection_curve(metric, uncertainty, opts.reject_ks, opts.control_seed);
  }
  return r;
}

EvalReport evaluate(const CibModel& model, const ObservationalDataset& data, const EvalOptions& opts,
                    bool in_sample) {
  const auto predicted = predict_potential_outcomes(model, data.x, opts.predict);
  return evaluate_predictions(data, predicted, uncertainty_score(model, data.x), opts, in_sample);
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["inSample"] = r.in_sample;
  j["rows"] = r.rows;
  if (r.sqrt_pehe) j["sqrtPehe"] = *r.sqrt_pehe;
  if (r.ate_error) j["ateError"] = *r.ate_error;
  if (r.policy_risk) {
    j["policyRisk"] = *r.policy_risk;
    j["policyRiskFallback"] = r.policy_risk_fallback;
  }
  if (r.auc) j["auc"] = *r.auc;
  j["factualRmse"] = r.factual_rmse;
  j["perSampleKl"] = std::vector<double>(r.per_sample_kl.data(), r.per_sample_kl.data() + r.per_sample_kl.size());
  if (!r.rejection_curve.empty()) {
    j["curveMetric"] = r.curve_metric;
    auto& curve = j["rejectionCurve"] = nlohmann::ordered_json::array();
    for (const auto& p : r.rejection_curve) curve.push_back({{"k", p.k}, {"metric", p.metric}, {"control", p.control}});
  }
  return j;
}

std::string curve_csv(const EvalReport& r) {
  std::string out = "k,metric,controlMetric\n";
  for (const auto& p : r.rejection_curve)
    out += format_double(p.k) + ',' + format_double(p.metric) + ',' + format_double(p.control) + '\n';
  return out;
}

std::vector<AblationArm> ablation_arms(const Hyper& base) {
  Hyper no_migdr = base;
  no_migdr.lambda_m = 0.0;
  Hyper no_cpvr = base;
  no_cpvr.lambda_v = 0.0;
  Hyper none = base;
  none.lambda_m = 0.0;
  none.lambda_v = 0.0;
  return {{"CIB", base}, {"w/o MIGDR", no_migdr}, {"w/o CPVR", no_cpvr}, {"No regularizer", none}};
}

std::vector<AblationRun> ablation_run(const Splits& splits, const ModelConfig& model, const TrainConfig& base,
                                      const EvalOptions& opts, int jobs) {
  const auto arms = ablation_arms(base.hyper);
  const ObservationalDataset in_sample = splits.train.concat(splits.valid);
  std::vector<AblationRun> runs(arms.size());
  std::vector<std::exception_ptr> errors(arms.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < arms.size(); i = next++) {
      try {
        TrainConfig cfg = base;
        cfg.hyper = arms[i].hyper;
        const FitResult fitted = fit(initial_model(model, cfg.seed), splits.train, splits.valid, cfg);
        runs[i] = {arms[i].name, evaluate(fitted.model, in_sample, opts, true),
                   evaluate(fitted.model, splits.test, opts, false)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp<int>(jobs, 1, static_cast<int>(arms.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return runs;
}

namespace {

nlohmann::ordered_json cell(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  return {{"mean", mean}, {"se", se}, {"n", values.size()}};
}

nlohmann::ordered_json metric_cells(const std::vector<const EvalReport*>& reports) {
  using Getter = std::optional<double> (*)(const EvalReport&);
  const std::pair<const char*, Getter> metrics[] = {
      {"sqrtPehe", [](const EvalReport& r) { return r.sqrt_pehe; }},
      {"ateError", [](const EvalReport& r) { return r.ate_error; }},
      {"policyRisk", [](const EvalReport& r) { return r.policy_risk; }},
      {"auc", [](const EvalReport& r) { return r.auc; }},
  };
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [name, get] : metrics) {
    std::vector<double> values;
    for (const EvalReport* r : reports)
      if (auto v = get(*r)) values.push_back(*v);
    if (!values.empty()) out[name] = cell(values);
  }
  return out;
}

}  // namespace

nlohmann::ordered_json ablation_table(const std::vector<std::vector<AblationRun>>& repeats) {
  if (repeats.empty()) throw ConfigError("ablation table needs at least one repeat");
  nlohmann::ordered_json table;
  table["repeats"] = repeats.size();
  auto& rows = table["rows"] = nlohmann::ordered_json::array();
  for (std::size_t arm = 0; arm < repeats.front().size(); ++arm) {
    std::vector<const EvalReport*> in;
    std::vector<const EvalReport*> out;
    for (const auto& rep : repeats) {
      in.push_back(&rep.at(arm).in_sample);
      out.push_back(&rep.at(arm).out_sample);
    }
    rows.push_back({{"name", repeats.front()[arm].name}, {"inSample", metric_cells(in)}, {"outSample", metric_cells(out)}});
  }
  return table;
}

}  // namespace cib
