#pragma once

#include "cib/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace cib {

/// sqrt(mean((tau - tau_hat)^2)), accumulated in row order.
template <typename A, typename B>
double sqrt_pehe(const Eigen::MatrixBase<A>& tau, const Eigen::MatrixBase<B>& tau_hat) {
  if (tau.size() != tau_hat.size()) throw DataError("sqrt_pehe: length mismatch");
  if (tau.size() == 0) throw DataError("sqrt_pehe: empty input");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    const double d = tau(i) - tau_hat(i);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(tau.size()));
}

/// |mean(tau) - mean(tau_hat)|
template <typename A, typename B>
double ate_error(const Eigen::MatrixBase<A>& tau, const Eigen::MatrixBase<B>& tau_hat) {
  if (tau.size() != tau_hat.size() || tau.size() == 0) throw DataError("ate_error: bad lengths");
  return std::abs(tau.mean() - tau_hat.mean());
}

struct PolicyRisk {
  double value = 0.0;
  /// A policy group had no randomized row with matching treatment; its
  /// outcome mean fell back to all randomized rows of that treatment.
  bool fallback_treated = false;
  bool fallback_control = false;
};

/// Policy risk on the randomized subset. The policy treats iff
/// tau_hat >= 0 (f(x,0) <= f(x,1)); each policy group contributes the mean
/// factual outcome of its rows whose received treatment agrees with the
/// policy, weighted by the group's share of the randomized subset.
template <typename Y, typename T, typename E, typename H>
PolicyRisk policy_risk(const Eigen::MatrixBase<Y>& yf, const Eigen::MatrixBase<T>& t, const Eigen::MatrixBase<E>& e,
                       const Eigen::MatrixBase<H>& tau_hat) {
  const Eigen::Index n = yf.size();
  if (t.size() != n || e.size() != n || tau_hat.size() != n) throw DataError("policy_risk: length mismatch");
  // [policy][treatment] sums and counts over the randomized rows
  double sum[2][2] = {{0, 0}, {0, 0}};
  double count[2][2] = {{0, 0}, {0, 0}};
  double randomized = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (e(i) <= 0.5) continue;
    randomized += 1.0;
    const int policy = tau_hat(i) >= 0.0 ? 1 : 0;
    const int treatment = t(i) > 0.5 ? 1 : 0;
    sum[policy][treatment] += yf(i);
    count[policy][treatment] += 1.0;
  }
  if (randomized == 0.0) throw DataError("policy_risk: randomized subset is empty");

  PolicyRisk out;
  double value = 0.0;
  for (int g = 1; g >= 0; --g) {
    const double group = count[g][0] + count[g][1];
    if (group == 0.0) continue;
    double mean_outcome = 0.0;
    if (count[g][g] > 0.0) {
      mean_outcome = sum[g][g] / count[g][g];
    } else {
      const double all = count[0][g] + count[1][g];
      if (all == 0.0) throw DataError("policy_risk: no randomized rows with t = " + std::to_string(g));
      mean_outcome = (sum[0][g] + sum[1][g]) / all;
      (g == 1 ? out.fallback_treated : out.fallback_control) = true;
    }
    value += mean_outcome * (group / randomized);
  }
  out.value = 1.0 - value;
  return out;
}

/// Area under the ROC curve as the Mann-Whitney statistic; tied scores
/// count one half.
template <typename L, typename S>
double auc(const Eigen::MatrixBase<L>& labels, const Eigen::MatrixBase<S>& scores) {
  const Eigen::Index n = labels.size();
  if (scores.size() != n) throw DataError("auc: length mismatch");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) < scores(b); });
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores(order[j]) == scores(order[i])) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels(order[k]) > 0.5) {
        positive_rank_sum += avg_rank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) throw DataError("auc: both classes must be present");
  const double u = positive_rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

struct RejectionPoint {
  double k = 0.0;
  double metric = 0.0;   // after dropping the most uncertain rows
  double control = 0.0;  // after dropping the same number of random rows
};

/// Metric of a row subset (indices into the evaluated set).
using SubsetMetric = std::function<double(std::span<const Eigen::Index>)>;

/// For each fraction k, drops the ceil(k n) rows with the highest
/// uncertainty (ties: lower index dropped first) and re-evaluates. The control drops
/// the first ceil(k n) rows of one random permutation drawn from
/// `control_seed`, so control subsets are nested across k.
template <typename U>
std::vector<RejectionPoint> rejection_curve(const SubsetMetric& metric, const Eigen::MatrixBase<U>& uncertainty,
                                            std::span<const double> ks, std::uint64_t control_seed) {
  const Eigen::Index n = uncertainty.size();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] >= 0.0 && ks[i] < 1.0)) throw ConfigError("rejection fractions must lie in [0, 1)");
    if (i > 0 && !(ks[i] > ks[i - 1])) throw ConfigError("rejection fractions must be strictly increasing");
  }
  std::vector<Eigen::Index> by_uncertainty(static_cast<std::size_t>(n));
  std::iota(by_uncertainty.begin(), by_uncertainty.end(), Eigen::Index{0});
  std::stable_sort(by_uncertainty.begin(), by_uncertainty.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return uncertainty(a) > uncertainty(b); });
  std::vector<Eigen::Index> random_order(by_uncertainty.size());
  std::iota(random_order.begin(), random_order.end(), Eigen::Index{0});
  std::mt19937_64 rng(control_seed);
  std::shuffle(random_order.begin(), random_order.end(), rng);

  auto kept = [](const std::vector<Eigen::Index>& order, std::size_t drop) {
    std::vector<Eigen::Index> rest(order.begin() + static_cast<std::ptrdiff_t>(drop), order.end());
    std::sort(rest.begin(), rest.end());
    return rest;
  };

  std::vector<RejectionPoint> curve;
  for (double k : ks) {
    const auto drop = static_cast<std::size_t>(std::ceil(k * static_cast<double>(n) - 1e-9));
    if (drop >= static_cast<std::size_t>(n)) throw DataError("rejection fraction leaves no rows");
    curve.push_back({k, metric(kept(by_uncertainty, drop)), metric(kept(random_order, drop))});
  }
  return curve;
}

}  // namespace cib
