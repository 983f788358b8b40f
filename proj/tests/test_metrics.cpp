#include "cib/metrics.hpp"
#include "cib/rng.hpp"

#include <gtest/gtest.h>

#include <numeric>

namespace {

using namespace cib;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

VectorXd normal_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

// Pairwise definition: fraction of (positive, negative) pairs ranked right.
double auc_pairs(const VectorXd& labels, const VectorXd& scores) {
  double good = 0.0, pairs = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) < 0.5) continue;
    for (Eigen::Index j = 0; j < labels.size(); ++j) {
      if (labels(j) > 0.5) continue;
      pairs += 1.0;
      if (scores(i) > scores(j)) good += 1.0;
      if (scores(i) == scores(j)) good += 0.5;
    }
  }
  return good / pairs;
}

// Policy value written row by row: each randomized row whose treatment agrees
// with the policy votes for its group mean.
double policy_risk_direct(const VectorXd& yf, const VectorXd& t, const VectorXd& e, const VectorXd& tau_hat) {
  double n_rand = 0.0, n_treat_policy = 0.0;
  double y_agree1 = 0.0, n_agree1 = 0.0, y_agree0 = 0.0, n_agree0 = 0.0;
  for (Eigen::Index i = 0; i < yf.size(); ++i) {
    if (e(i) != 1.0) continue;
    n_rand += 1.0;
    const bool treat = tau_hat(i) >= 0.0;
    if (treat) n_treat_policy += 1.0;
    if (treat && t(i) == 1.0) {
      y_agree1 += yf(i);
      n_agree1 += 1.0;
    }
    if (!treat && t(i) == 0.0) {
      y_agree0 += yf(i);
      n_agree0 += 1.0;
    }
  }
  const double p = n_treat_policy / n_rand;
  return 1.0 - (y_agree1 / n_agree1 * p + y_agree0 / n_agree0 * (1.0 - p));
}

TEST(SqrtPehe, Examples) {
  EXPECT_EQ(sqrt_pehe(vec({1, 2, 3}), vec({1, 2, 3})), 0.0);
  EXPECT_DOUBLE_EQ(sqrt_pehe(vec({0, 0}), vec({1, -1})), 1.0);
  EXPECT_DOUBLE_EQ(sqrt_pehe(vec({0}), vec({std::sqrt(5.0)})), std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(sqrt_pehe(vec({1, 2}), vec({0, 5})), std::sqrt(5.0));
}

TEST(SqrtPehe, MatchesNormFormula) {
  Rng rng = make_stream(1, "test.metrics");
  const VectorXd a = normal_vector(1000, rng), b = normal_vector(1000, rng);
  EXPECT_NEAR(sqrt_pehe(a, b), (a - b).norm() / std::sqrt(1000.0), 1e-12);
}

TEST(SqrtPehe, BadInputs) {
  EXPECT_THROW(sqrt_pehe(vec({1, 2}), vec({1})), DataError);
  EXPECT_THROW(sqrt_pehe(VectorXd(), VectorXd()), DataError);
}

TEST(AteError, Examples) {
  EXPECT_DOUBLE_EQ(ate_error(vec({1, 3}), vec({2, 2})), 0.0);
  EXPECT_DOUBLE_EQ(ate_error(vec({1, 3}), vec({0, 1})), 1.5);
  EXPECT_THROW(ate_error(vec({1}), vec({1, 2})), DataError);
}

TEST(PolicyRisk, PerfectPolicyOnConstantOutcomes) {
  // everyone treated gets 1, nobody untreated, policy agrees everywhere
  const auto r = policy_risk(vec({1, 1, 0, 0}), vec({1, 1, 0, 0}), vec({1, 1, 1, 1}), vec({1, 1, -1, -1}));
  EXPECT_DOUBLE_EQ(r.value, 1.0 - (1.0 * 0.5 + 0.0 * 0.5));
  EXPECT_FALSE(r.fallback_treated);
  EXPECT_FALSE(r.fallback_control);
}

TEST(PolicyRisk, ZeroRiskWhenAgreeingRowsScoreOne) {
  const auto r = policy_risk(vec({1, 1, 1, 1}), vec({1, 0, 1, 0}), vec({1, 1, 1, 1}), vec({1, -1, 1, -1}));
  EXPECT_DOUBLE_EQ(r.value, 0.0);
}

TEST(PolicyRisk, TieTreats) {
  // tau_hat = 0 selects treatment; only the treated row agrees
  const auto r = policy_risk(vec({0.25, 0.9}), vec({1, 0}), vec({1, 1}), vec({0, 0}));
  EXPECT_DOUBLE_EQ(r.value, 0.75);
  EXPECT_FALSE(r.fallback_treated);
}

TEST(PolicyRisk, FourRowExample) {
  // policy treats rows 0 and 1, but only row 0 was treated (y = 1); the
  // control group agrees on row 3 (y = 0)
  const auto r = policy_risk(vec({1, 0.3, 0.7, 0}), vec({1, 0, 1, 0}), vec({1, 1, 1, 1}), vec({2, 1, -1, -1}));
  EXPECT_DOUBLE_EQ(r.value, 0.5);
}

TEST(PolicyRisk, NonRandomizedRowsIgnored) {
  const VectorXd yf = vec({1, 0, 5, -5});
  const VectorXd t = vec({1, 0, 1, 0});
  const VectorXd tau = vec({1, -1, -1, 1});
  const auto a = policy_risk(yf, t, vec({1, 1, 0, 0}), tau);
  const auto b = policy_risk(vec({1, 0}), vec({1, 0}), vec({1, 1}), vec({1, -1}));
  EXPECT_DOUBLE_EQ(a.value, b.value);
}

TEST(PolicyRisk, FallbackWhenNoAgreeingRow) {
  // neither policy group contains a row whose treatment agrees with it
  const auto r = policy_risk(vec({0.2, 0.4, 0.6}), vec({0, 0, 1}), vec({1, 1, 1}), vec({1, 1, -1}));
  EXPECT_TRUE(r.fallback_treated);
  EXPECT_TRUE(r.fallback_control);
  // treated group falls back to all randomized treated rows (0.6), control to all controls (0.3)
  EXPECT_NEAR(r.value, 1.0 - (0.6 * 2.0 / 3.0 + 0.3 / 3.0), 1e-15);
}

TEST(PolicyRisk, EmptyRandomizedSubsetThrows) {
  EXPECT_THROW(policy_risk(vec({1, 0}), vec({1, 0}), vec({0, 0}), vec({1, -1})), DataError);
  EXPECT_THROW(policy_risk(vec({1, 0}), vec({1}), vec({1, 1}), vec({1, -1})), DataError);
}

TEST(PolicyRisk, MatchesDirectDefinition) {
  Rng rng = make_stream(2, "test.metrics");
  std::bernoulli_distribution coin(0.5), randomized(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 300;
    VectorXd yf(n), t(n), e(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      yf(i) = coin(rng) ? 1.0 : 0.0;
      t(i) = coin(rng) ? 1.0 : 0.0;
      e(i) = randomized(rng) ? 1.0 : 0.0;
    }
    const VectorXd tau = normal_vector(n, rng);
    const double direct = policy_risk_direct(yf, t, e, tau);
    if (!std::isfinite(direct)) continue;  // an empty agreeing group; covered by the fallback test
    const auto r = policy_risk(yf, t, e, tau);
    EXPECT_NEAR(r.value, direct, 1e-12);
  }
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(vec({0, 0, 1, 1}), vec({0.1, 0.2, 0.8, 0.9})), 1.0);
  EXPECT_DOUBLE_EQ(auc(vec({0, 1, 0, 1}), vec({0.5, 0.5, 0.5, 0.5})), 0.5);
  EXPECT_DOUBLE_EQ(auc(vec({0, 1, 1, 0}), vec({0.1, 0.2, 0.3, 0.4})), 0.5);
  EXPECT_DOUBLE_EQ(auc(vec({1, 1, 0, 0}), vec({0.1, 0.2, 0.8, 0.9})), 0.0);
}

TEST(Auc, OneClassThrows) {
  EXPECT_THROW(auc(vec({1, 1, 1}), vec({0.1, 0.2, 0.3})), DataError);
  EXPECT_THROW(auc(vec({0, 0}), vec({0.1, 0.2})), DataError);
  EXPECT_THROW(auc(vec({0, 1}), vec({0.1})), DataError);
}

TEST(Auc, MatchesPairCount) {
  Rng rng = make_stream(3, "test.metrics");
  std::bernoulli_distribution coin(0.4);
  std::uniform_int_distribution<int> level(0, 9);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 120;
    VectorXd labels(n), scores(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      labels(i) = coin(rng) ? 1.0 : 0.0;
      scores(i) = level(rng) / 10.0;  // coarse levels force ties
    }
    labels(0) = 1.0;
    labels(1) = 0.0;
    EXPECT_NEAR(auc(labels, scores), auc_pairs(labels, scores), 1e-12);
  }
}

TEST(Auc, FlippingScoresMirrors) {
  Rng rng = make_stream(4, "test.metrics");
  std::bernoulli_distribution coin(0.5);
  VectorXd labels(200);
  for (Eigen::Index i = 0; i < 200; ++i) labels(i) = coin(rng) ? 1.0 : 0.0;
  const VectorXd scores = normal_vector(200, rng);
  EXPECT_NEAR(auc(labels, scores) + auc(labels, VectorXd(-scores)), 1.0, 1e-12);
}

TEST(Auc, PermutationInvariant) {
  Rng rng = make_stream(5, "test.metrics");
  std::bernoulli_distribution coin(0.5);
  VectorXd labels(200);
  for (Eigen::Index i = 0; i < 200; ++i) labels(i) = coin(rng) ? 1.0 : 0.0;
  const VectorXd scores = normal_vector(200, rng);
  std::vector<Eigen::Index> perm(200);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  VectorXd pl(200), ps(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    pl(i) = labels(perm[i]);
    ps(i) = scores(perm[i]);
  }
  EXPECT_DOUBLE_EQ(auc(labels, scores), auc(pl, ps));
}

TEST(RejectionCurve, ZeroFractionIsFullMetric) {
  const VectorXd err = vec({1, 2, 3, 4});
  const VectorXd unc = vec({4, 3, 2, 1});
  const SubsetMetric mean_err = [&](std::span<const Eigen::Index> rows) {
    double s = 0.0;
    for (auto r : rows) s += err(r);
    return s / static_cast<double>(rows.size());
  };
  const std::vector<double> ks = {0.0, 0.5};
  const auto curve = rejection_curve(mean_err, unc, ks, 7);
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_DOUBLE_EQ(curve[0].metric, 2.5);
  EXPECT_DOUBLE_EQ(curve[0].control, 2.5);
  // drops rows 0 and 1, the most uncertain
  EXPECT_DOUBLE_EQ(curve[1].metric, 3.5);
}

TEST(RejectionCurve, UncertaintyTrackingErrorGivesMonotoneCurve) {
  Rng rng = make_stream(6, "test.metrics");
  const VectorXd err = normal_vector(500, rng).cwiseAbs();
  const SubsetMetric rms = [&](std::span<const Eigen::Index> rows) {
    double s = 0.0;
    for (auto r : rows) s += err(r) * err(r);
    return std::sqrt(s / static_cast<double>(rows.size()));
  };
  const std::vector<double> ks = {0.0, 0.1, 0.2, 0.3, 0.5, 0.8};
  const auto curve = rejection_curve(rms, err, ks, 1);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LT(curve[i].metric, curve[i - 1].metric);
    EXPECT_LT(curve[i].metric, curve[i].control);
  }
}

TEST(RejectionCurve, ConstantUncertaintyKeepsLastRows) {
  // equal scores: lower indices are dropped first, the stable order
  const SubsetMetric first_kept = [](std::span<const Eigen::Index> rows) { return static_cast<double>(rows[0]); };
  const std::vector<double> ks = {0.25, 0.5};
  const auto curve = rejection_curve(first_kept, VectorXd::Ones(8), ks, 2);
  EXPECT_EQ(curve[0].metric, 2.0);
  EXPECT_EQ(curve[1].metric, 4.0);
}

TEST(RejectionCurve, ControlDeterministicInSeed) {
  Rng rng = make_stream(7, "test.metrics");
  const VectorXd err = normal_vector(100, rng);
  const SubsetMetric sum = [&](std::span<const Eigen::Index> rows) {
    double s = 0.0;
    for (auto r : rows) s += err(r);
    return s;
  };
  const std::vector<double> ks = {0.1, 0.4};
  const auto a = rejection_curve(sum, err, ks, 11);
  const auto b = rejection_curve(sum, err, ks, 11);
  EXPECT_EQ(a[1].control, b[1].control);
}

TEST(RejectionCurve, BadFractions) {
  const SubsetMetric m = [](std::span<const Eigen::Index>) { return 0.0; };
  const VectorXd u = VectorXd::Ones(4);
  const std::vector<double> neg = {-0.1}, one = {1.0}, desc = {0.5, 0.2}, dup = {0.2, 0.2};
  EXPECT_THROW(rejection_curve(m, u, neg, 0), ConfigError);
  EXPECT_THROW(rejection_curve(m, u, one, 0), ConfigError);
  EXPECT_THROW(rejection_curve(m, u, desc, 0), ConfigError);
  EXPECT_THROW(rejection_curve(m, u, dup, 0), ConfigError);
}

}  // namespace
