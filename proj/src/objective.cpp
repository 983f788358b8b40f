#include "cib/objective.hpp"

#include "cib/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace cib {

using diff::Var;

double LossReport::combine(double l0, double l1, double lC, double lM, double lV, const Hyper& h) {
  return l0 + l1 - h.beta * lC + h.lambda_m * lM + h.lambda_v * lV;
}

Var log_likelihood(const BoundHead& head, Var z, const Tensor& y) {
  diff::Graph& g = z.graph();
  Var target = g.constant(y);
  Var raw = head_output(head, z);
  if (head.kind == OutcomeKind::continuous) {
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return diff::square(target - raw) * -0.5 - half_log_2pi;
  }
  // y*logit - log(1 + e^logit)
  return target * raw - diff::softplus(raw);
}

Var expressiveness_loss(const BoundHead& head, Var z, const Tensor& y, const Tensor& weights) {
  if (weights.rows() != y.rows() || weights.cols() != 1)
    throw ShapeError("expressiveness_loss: weights " + shape_string(shape_of(weights)) + " for " +
                     std::to_string(y.rows()) + " rows");
  const double total = weights.sum();
  if (!(total > 0.0)) throw DataError("expressiveness_loss: treatment group is empty in this batch");
  diff::Graph& g = z.graph();
  return diff::sum(log_likelihood(head, z, y) * g.constant(weights)) * (1.0 / total);
}

Var kl_to_prior(Var mu, Var sigma, const BoundPrior& prior) {
  // log(s_r / s) + (s^2 + (mu - m_r)^2) / (2 s_r^2) - 1/2, summed over dims
  Var prior_var = diff::exp(prior.log_scale * 2.0);
  Var per_dim = prior.log_scale - diff::log(sigma) +
                (diff::square(sigma) + diff::square(mu - prior.mean)) / (prior_var * 2.0) - 0.5;
  return diff::sum_cols(per_dim);
}

Var compression_loss(Var mu, Var sigma, const BoundPrior& prior) { return diff::mean(kl_to_prior(mu, sigma, prior)); }

CriticObjective dv_critic_objective(const BoundCritic& critic, Var x, Var z_joint, const Tensor& t_joint,
                                    const Tensor& t_marginal, double gamma) {
  if (t_joint.rows() < 2) throw DataError("dv_critic_objective needs at least 2 rows to permute");
  diff::Graph& g = x.graph();
  // Fresh leaves: no path back to the encoder, but differentiable inputs for
  // the penalty.
  Var z = g.variable(z_joint.value());
  Var t = g.variable(t_joint);
  Var f_joint = critic_value(critic, x, z, t);
  Var f_marginal = critic_value(critic, x, z, g.constant(t_marginal));
  Var dv = diff::mean(f_joint) - diff::log_mean_exp(f_marginal);

  const Var wrt[] = {z, t};
  auto input_grads = g.grad(diff::sum(f_joint), wrt);
  const double n = static_cast<double>(t_joint.rows());
  Var penalty = (diff::sum(diff::square(input_grads[0])) + diff::sum(diff::square(input_grads[1]))) * (1.0 / n);
  return {dv - penalty * gamma, dv, penalty};
}

Var migdr_encoder_loss(const BoundCritic& critic, Var x, Var z, const Tensor& t) {
  return -diff::mean(critic_value(frozen(critic), x, z, z.graph().constant(t)));
}

Var cpvr_loss(const GaussianOutput& encoded, const BoundHead& head0, const BoundHead& head1, const Tensor& t,
              std::span<const Tensor> eps) {
  const auto k = static_cast<int>(eps.size());
  if (k < 2) throw ConfigError("cpvr_loss needs at least 2 samples per row");
  diff::Graph& g = encoded.mu.graph();
  const BoundHead fixed0 = frozen(head0);
  const BoundHead fixed1 = frozen(head1);
  // Counterfactual head is head_{1-t}.
  Var use_head1 = g.constant(Tensor((1.0 - t.array()).matrix()));
  Var use_head0 = g.constant(t);

  std::vector<Var> predictions;
  predictions.reserve(k);
  for (const Tensor& e : eps) {
    Var z = reparameterize(encoded.mu, encoded.sigma, g.constant(e));
    predictions.push_back(predict_outcome(fixed1, z) * use_head1 + predict_outcome(fixed0, z) * use_head0);
  }
  Var total = predictions[0];
  for (int i = 1; i < k; ++i) total = total + predictions[i];
  Var avg = total * (1.0 / k);
  Var sq = diff::square(predictions[0] - avg);
  for (int i = 1; i < k; ++i) sq = sq + diff::square(predictions[i] - avg);
  Var variance = sq * (1.0 / (k - 1));
  return -diff::mean(variance);
}

Tensor permute_rows(const Tensor& t, Rng& rng) {
  std::vector<Eigen::Index> order(t.rows());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Tensor out(t.rows(), t.cols());
  for (Eigen::Index i = 0; i < t.rows(); ++i) out.row(i) = t.row(order[i]);
  return out;
}

Tensor propensity_weights(const Tensor& propensity, const Tensor& t) {
  const double treated_rate = t.mean();
  Tensor w(t.rows(), 1);
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    const double s = propensity(i, 0);
    w(i, 0) = t(i, 0) > 0.5 ? treated_rate / s : (1.0 - treated_rate) / (1.0 - s);
  }
  return w;
}

Objective total_objective(const BoundModel& model, const Batch& batch, const Hyper& hyper,
                          const ObjectiveNoise& noise) {
  diff::Graph& g = model.prior.mean.graph();
  Var x = g.constant(batch.x, "x");
  const GaussianOutput enc = encode(model.encoder, x);
  Var z = reparameterize(enc.mu, enc.sigma, g.constant(noise.eps));

  const Tensor control = (1.0 - batch.t.array()).matrix();
  Tensor w0 = control;
  Tensor w1 = batch.t;
  if (model.propensity) {
    const Tensor w = propensity_weights(propensity(model, x).value(), batch.t);
    w0 = w0.cwiseProduct(w);
    w1 = w1.cwiseProduct(w);
  }

  Objective obj;
  obj.l0 = expressiveness_loss(model.head0, z, batch.y, w0);
  obj.l1 = expressiveness_loss(model.head1, z, batch.y, w1);
  obj.lC = compression_loss(enc.mu, enc.sigma, model.prior);
  obj.lM = migdr_encoder_loss(model.critic, x, z, batch.t);
  obj.lV = cpvr_loss(enc, model.head0, model.head1, batch.t, noise.cpvr_eps);

  Var total = obj.l0 + obj.l1;
  if (hyper.beta != 0.0) total = total - obj.lC * hyper.beta;
  if (hyper.lambda_m != 0.0) total = total + obj.lM * hyper.lambda_m;
  if (hyper.lambda_v != 0.0) total = total + obj.lV * hyper.lambda_v;
  obj.total = total;

  LossReport& r = obj.report;
  r.l0 = obj.l0.item();
  r.l1 = obj.l1.item();
  r.lC = obj.lC.item();
  r.lM = obj.lM.item();
  r.lV = obj.lV.item();
  r.total = LossReport::combine(r.l0, r.l1, r.lC, r.lM, r.lV, hyper);
  return obj;
}

}  // namespace cib
