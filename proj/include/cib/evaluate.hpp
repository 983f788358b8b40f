#pragma once

#include "cib/dataset.hpp"
#include "cib/metrics.hpp"
#include "cib/nets.hpp"
#include "cib/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cib {

struct PredictOptions {
  /// Posterior samples averaged per row.
  int samples = 100;
  /// Use z = mu and a single pass.
  bool deterministic = false;
  std::uint64_t seed = 0;
};

/// Predicted outcome under each treatment (means or probabilities).
struct PotentialOutcomes {
  Eigen::VectorXd y0;
  Eigen::VectorXd y1;

  Eigen::VectorXd ite() const { return y1 - y0; }
};

PotentialOutcomes predict_potential_outcomes(const CibModel& model, const Tensor& x, const PredictOptions& opts);

/// Mean over posterior samples of head1(z) - head0(z).
Eigen::VectorXd ite_prediction(const CibModel& model, const Tensor& x, const PredictOptions& opts);

/// KL(p(z|x) || r(z)) per row; large values flag inputs unlike the
/// training population.
Eigen::VectorXd uncertainty_score(const CibModel& model, const Tensor& x);

struct LinearFit {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  bool ridge = false;
};

/// Least squares with intercept; falls back to ridge (1e-6) when the normal
/// equations are singular or there are no more rows than covariates.
LinearFit least_squares(const Tensor& x, const Eigen::VectorXd& y, std::vector<std::string>& warnings);

/// One linear regression per treatment arm.
struct Ols2 {
  LinearFit control;
  LinearFit treated;
  std::vector<std::string> warnings;

  PotentialOutcomes predict(const Tensor& x) const;
  Eigen::VectorXd predict_ite(const Tensor& x) const { return predict(x).ite(); }
};

Ols2 ols2_baseline(const ObservationalDataset& train);

struct EvalReport {
  Eigen::Index rows = 0;
  bool in_sample = false;
  std::optional<double> sqrt_pehe;
  std::optional<double> ate_error;
  std::optional<double> policy_risk;
  bool policy_risk_fallback = false;
  std::optional<double> auc;
  double factual_rmse = 0.0;
  Eigen::VectorXd per_sample_kl;
  /// sqrt_pehe when ground truth exists, factual_rmse otherwise.
  std::string curve_metric;
  std::vector<RejectionPoint> rejection_curve;
};

struct EvalOptions {
  PredictOptions predict;
  std::vector<double> reject_ks;
  std::uint64_t control_seed = 0;
};

/// Metrics from precomputed predictions. `uncertainty` may be empty (no
/// rejection curve then).
EvalReport evaluate_predictions(const ObservationalDataset& data, const PotentialOutcomes& predicted,
                                const Eigen::VectorXd& uncertainty, const EvalOptions& opts, bool in_sample);

EvalReport evaluate(const CibModel& model, const ObservationalDataset& data, const EvalOptions& opts,
                    bool in_sample);

nlohmann::ordered_json to_json(const EvalReport& r);
/// "k,metric,controlMetric" rows.
std::string curve_csv(const EvalReport& r);

struct AblationArm {
  std::string name;
  Hyper hyper;
};

/// CIB, w/o MIGDR, w/o CPVR, No regularizer; beta is kept in all four.
std::vector<AblationArm> ablation_arms(const Hyper& base);

struct AblationRun {
  std::string name;
  EvalReport in_sample;
  EvalReport out_sample;
};

/// Four fits on identical splits and seeds, differing only in lambda_m and
/// lambda_v. In-sample rows are train + valid, out-sample rows are test.
std::vector<AblationRun> ablation_run(const Splits& splits, const ModelConfig& model, const TrainConfig& base,
                                      const EvalOptions& opts, int jobs = 1);

/// Mean and standard error of every metric cell over repeats, laid out as
/// one row per arm.
nlohmann::ordered_json ablation_table(const std::vector<std::vector<AblationRun>>& repeats);

}  // namespace cib
