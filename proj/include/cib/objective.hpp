#pragma once

#include "cib/graph.hpp"
#include "cib/nets.hpp"
#include "cib/rng.hpp"

#include <span>
#include <vector>

namespace cib {

/// Weights of the regularizers in the maximized objective.
struct Hyper {
  double beta = 0.01;
  double lambda_m = 0.1;
  double lambda_v = 1.0;
};

struct ObjectiveOptions {
  /// Coefficient of the zero-centered gradient penalty on the critic.
  double gradient_penalty = 1.0;
  /// Encoder samples per row for the counterfactual variance term.
  int cpvr_samples = 10;
};

/// Values of every term. The entropy constants H(y0), H(y1) are not part of
/// l0/l1: they do not depend on any parameter.
struct LossReport {
  double l0 = 0.0;
  double l1 = 0.0;
  double lC = 0.0;
  double lM = 0.0;
  double lV = 0.0;
  double total = 0.0;
  double critic = 0.0;

  /// l0 + l1 - beta*lC + lambda_m*lM + lambda_v*lV
  static double combine(double l0, double l1, double lC, double lM, double lV, const Hyper& h);
};

/// Minibatch: x [n, d_x], t and y as [n, 1] columns.
struct Batch {
  Tensor x;
  Tensor t;
  Tensor y;
};

/// Standard-normal draws consumed by one evaluation of the objective.
struct ObjectiveNoise {
  Tensor eps;                     // [n, d_z], one z sample per row
  std::vector<Tensor> cpvr_eps;   // K tensors [n, d_z]
};

/// log q(y|z) per row: unit-variance Gaussian or Bernoulli-with-logit.
diff::Var log_likelihood(const BoundHead& head, diff::Var z, const Tensor& y);

/// sum_i w_i log q(y_i|z_i) / sum_i w_i. Rows of the other treatment group
/// carry weight zero.
diff::Var expressiveness_loss(const BoundHead& head, diff::Var z, const Tensor& y, const Tensor& weights);

/// Closed-form KL(N(mu, sigma^2) || r) per row, [n, 1].
diff::Var kl_to_prior(diff::Var mu, diff::Var sigma, const BoundPrior& prior);

/// Batch mean of kl_to_prior.
diff::Var compression_loss(diff::Var mu, diff::Var sigma, const BoundPrior& prior);

struct CriticObjective {
  diff::Var value;    // dv - gamma * penalty
  diff::Var dv;       // E_joint[f] - log E_marginal[e^f]
  diff::Var penalty;  // mean squared norm of grad_(z,t) f at joint samples
};

/// Donsker-Varadhan lower bound on I(Z;T|X) with the critic's gradient
/// penalty. `z_joint` is cut from the encoder; `t_marginal` is a within-batch
/// permutation of `t_joint`.
CriticObjective dv_critic_objective(const BoundCritic& critic, diff::Var x, diff::Var z_joint, const Tensor& t_joint,
                                    const Tensor& t_marginal, double gamma);

/// -mean f(x, z, t) with the critic held fixed; gradients reach z only.
diff::Var migdr_encoder_loss(const BoundCritic& critic, diff::Var x, diff::Var z, const Tensor& t);

/// Negative batch mean of the unbiased variance of K counterfactual
/// predictions per row. Heads are held fixed; only the encoder outputs
/// receive gradients.
diff::Var cpvr_loss(const GaussianOutput& encoded, const BoundHead& head0, const BoundHead& head1, const Tensor& t,
                    std::span<const Tensor> eps);

/// Rows of `t` in a uniformly random order.
Tensor permute_rows(const Tensor& t, Rng& rng);

/// p_hat(t=g) / s(t=g|x) per row, using the batch treatment rate.
Tensor propensity_weights(const Tensor& propensity, const Tensor& t);

struct Objective {
  diff::Var total;  // the maximized objective; minimize its negation
  diff::Var l0, l1, lC, lM, lV;
  LossReport report;
};

/// All five terms on one batch. Terms whose coefficient is zero are still
/// evaluated for the report but do not enter `total`.
Objective total_objective(const BoundModel& model, const Batch& batch, const Hyper& hyper,
                          const ObjectiveNoise& noise);

}  // namespace cib
