#include "oracles.hpp"
#include "rotosense/estimation.hpp"
#include "rotosense/states.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace rotosense;

namespace {

OutcomeDistribution dist(std::array<double, 5> p) {
  OutcomeDistribution d;
  d.p = p;
  return d;
}

OutcomeCounts counts(std::vector<std::uint64_t> c) {
  const std::uint64_t n = std::accumulate(c.begin(), c.end(), std::uint64_t{0});
  return {std::move(c), n, 0};
}

}  // namespace

TEST(SampleOutcomes, Degenerate) {
  const OutcomeCounts c = sample_outcomes(dist({1, 0, 0, 0, 0}), 12345, 7);
  EXPECT_EQ(c.counts, (std::vector<std::uint64_t>{12345, 0, 0, 0, 0}));
  EXPECT_EQ(c.n, 12345u);
  const OutcomeCounts d = sample_outcomes(dist({0, 0, 0, 0, 1}), 10, 7);
  EXPECT_EQ(d.counts, (std::vector<std::uint64_t>{0, 0, 0, 0, 10}));
}

TEST(SampleOutcomes, BinomialConcentration) {
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const OutcomeCounts c = sample_outcomes(dist({0.5, 0.5, 0, 0, 0}), 1000000, seed);
    const double f = static_cast<double>(c.counts[0]) / 1e6;
    if (f >= 0.498 && f <= 0.502) ++inside;
    EXPECT_EQ(c.counts[0] + c.counts[1], 1000000u);
  }
  EXPECT_GE(inside, 99);
}

TEST(SampleOutcomes, DeterministicGivenSeed) {
  const OutcomeDistribution d = dist({0.9, 0.04, 0.03, 0.02, 0.01});
  EXPECT_EQ(sample_outcomes(d, 100000, 99).counts, sample_outcomes(d, 100000, 99).counts);
  EXPECT_NE(sample_outcomes(d, 100000, 99).counts, sample_outcomes(d, 100000, 100).counts);
}

TEST(SampleOutcomes, RejectsInvalidInput) {
  EXPECT_THROW(sample_outcomes(dist({0.5, 0.4, 0, 0, 0}), 10, 1), std::invalid_argument);
  EXPECT_THROW(sample_outcomes(dist({1.2, -0.2, 0, 0, 0}), 10, 1), std::invalid_argument);
  EXPECT_THROW(sample_outcomes(dist({1, 0, 0, 0, 0}), 0, 1), std::invalid_argument);
}

TEST(SampleOutcomes, FrequenciesConverge) {
  const SpinState s = states::tetra2();
  const OutcomeDistribution d = exact_probabilities(s, optimal_basis(s), {0.05, 1.0, 0.5});
  const double n = 1e6;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const OutcomeCounts c = sample_outcomes(d, 1000000, seed);
    for (int i = 0; i < 5; ++i) {
      const double p = d.p[i];
      EXPECT_LE(std::abs(static_cast<double>(c.counts[i]) / n - p), 5.0 * std::sqrt(p * (1 - p) / n) + 1e-15)
          << "seed " << seed << " category " << i;
    }
  }
}

TEST(EstimateParams, Examples) {
  const EstimateReport a = estimate_params(counts({9800, 200, 0, 0, 0}), Spin::from_value(2.0));
  EXPECT_NEAR(a.theta1_hat, 0.1, 1e-12);
  ASSERT_TRUE(a.u_hat_abs.has_value());
  EXPECT_LE((*a.u_hat_abs - Vec3(1, 0, 0)).norm(), 1e-12);

  const EstimateReport b = estimate_params(counts({1000, 0, 0, 0, 0}), Spin::from_value(2.0));
  EXPECT_EQ(b.theta1_hat, 0.0);
  EXPECT_TRUE(b.degenerate());

  const EstimateReport c = estimate_params(counts({9600, 0, 400, 0, 0}), Spin::from_value(3.0));
  EXPECT_NEAR(c.theta1_hat, 0.1, 1e-12);
  EXPECT_NEAR((*c.u_hat_abs)(1), 1.0, 1e-12);
}

TEST(EstimateParams, RestIsFoldedIntoP0) {
  const EstimateReport r = estimate_params(counts({9700, 100, 100, 50, 50}), Spin::from_value(2.0));
  EXPECT_EQ(r.rest_folded, 50u);
  EXPECT_NEAR(r.theta1_hat, std::sqrt(0.025 * 3.0 / 6.0), 1e-12);
  EXPECT_NEAR(r.u_hat_abs->squaredNorm(), 1.0, 1e-12);
  // Everything in P_rest still counts as "no rotation detected".
  EXPECT_TRUE(estimate_params(counts({10, 0, 0, 0, 5}), Spin::from_value(2.0)).degenerate());
}

TEST(EstimateParams, RejectsInconsistentCounts) {
  OutcomeCounts bad{{5, 5, 0, 0, 0}, 11, 0};
  EXPECT_THROW(estimate_params(bad, Spin::from_value(2.0)), std::invalid_argument);
  EXPECT_THROW(estimate_params(counts({5, 5, 0, 0}), Spin::from_value(2.0)), std::invalid_argument);
  EXPECT_THROW(estimate_params(counts({5, 5, 0, 0, 0}), Spin::from_value(0.0)), std::invalid_argument);
}

TEST(MultinomialStats, Formulas) {
  const MultinomialStats s = multinomial_stats(dist({0.98, 0.01, 0.005, 0.004, 0.001}), 1000);
  EXPECT_NEAR(s.var[0], 19.6, 1e-10);
  EXPECT_NEAR(s.cov(0, 1), -1000 * 0.98 * 0.01, 1e-10);
  const std::array<std::size_t, 4> others = {1, 2, 3, 4};
  EXPECT_NEAR(s.var_sum(others), s.var[0], 1e-10);
  const std::array<double, 5> ones_but_first = {0, 1, 1, 1, 1};
  EXPECT_NEAR(s.var_linear(ones_but_first), s.var[0], 1e-10);
  const std::array<double, 5> all = {1, 1, 1, 1, 1};
  EXPECT_NEAR(s.var_linear(all), 0.0, 1e-10);
  const std::array<std::size_t, 2> pair = {0, 4};
  const std::array<double, 5> pair_coef = {1, 0, 0, 0, 1};
  EXPECT_NEAR(s.var_sum(pair), s.var_linear(pair_coef), 1e-10);
}

TEST(MultinomialStats, EmpiricalMoments) {
  const OutcomeDistribution d = dist({0.9, 0.05, 0.03, 0.015, 0.005});
  const std::uint64_t n = 10000;
  const MultinomialStats s = multinomial_stats(d, n);
  const int reps = 1000;
  Eigen::MatrixXd x(reps, 5);
  for (int r = 0; r < reps; ++r) {
    const OutcomeCounts c = sample_outcomes(d, n, derive_seed(2024, static_cast<std::uint64_t>(r)));
    for (int i = 0; i < 5; ++i) x(r, i) = static_cast<double>(c.counts[i]);
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / (reps - 1);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(cov(i, i), s.var[i], 0.15 * s.var[i]) << i;
    EXPECT_NEAR(mean(i), n * d.p[i], 5 * std::sqrt(s.var[i] / reps));
  }
  EXPECT_NEAR(cov(0, 1), s.cov(0, 1), 0.15 * std::abs(s.cov(0, 1)));
}

TEST(BellSampling, TupleCountsRefineGroupCounts) {
  const BellOutcomeModel m = bell_outcome_model(states::balance(), {0.05, 1.0, 0.5});
  double total = 0.0;
  for (double p : m.group_probs) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
  const BellCounts c = sample_bell_outcomes(m, 100000, 5);
  for (std::size_t g = 0; g < 5; ++g) {
    std::uint64_t sum = 0;
    for (std::size_t code : m.members[g]) sum += c.tuple_counts[code];
    EXPECT_EQ(sum, c.aggregated.counts[g]);
  }
}

TEST(BellSampling, GroupProbabilitiesMatchAggregation) {
  const RotationParams p{0.04, 0.6, -1.2};
  for (const SpinState& s : {states::tetra2(), states::balance()}) {
    const BellOutcomeModel m = bell_outcome_model(s, p);
    const OutcomeDistribution d = bell_pipeline_probabilities(s, p);
    for (int mu = 0; mu < 5; ++mu) EXPECT_NEAR(m.group_probs[mu], d.p[mu], 1e-12);
  }
}

TEST(Qcrb, RejectsTooFewTrials) {
  EXPECT_THROW(qcrb_experiment(states::tetra2(), {0.05, 1, 0.5}, 1000, 99, 1, Pipeline::Optimal),
               std::invalid_argument);
}

TEST(Qcrb, DeterministicAcrossThreadCounts) {
  const RotationParams p{0.05, 1.0, 0.5};
  const QcrbReport a = qcrb_experiment(states::tetra2(), p, 20000, 150, 77, Pipeline::Bell, 1);
  const QcrbReport b = qcrb_experiment(states::tetra2(), p, 20000, 150, 77, Pipeline::Bell, 4);
  ASSERT_EQ(a.estimates.size(), b.estimates.size());
  for (std::size_t i = 0; i < a.estimates.size(); ++i) {
    EXPECT_EQ(a.estimates[i].theta1_hat, b.estimates[i].theta1_hat);
    EXPECT_EQ(a.estimates[i].u_hat_abs, b.estimates[i].u_hat_abs);
  }
  EXPECT_EQ(a.theta1_sigma, b.theta1_sigma);
  EXPECT_EQ(a.theta1_mean, b.theta1_mean);
}

TEST(Qcrb, ReportFields) {
  const QcrbReport r = qcrb_experiment(states::balance(), {0.05, 1.0, 0.5}, 100000, 200, 3, Pipeline::Optimal);
  EXPECT_NEAR(r.fisher, 16.0, 1e-12);
  EXPECT_NEAR(r.theta1_sigma_pred, 1.0 / std::sqrt(16.0 * 1e5), 1e-15);
  EXPECT_GT(r.sigma_ratio, 0.8);
  EXPECT_LT(r.sigma_ratio, 1.2);
  EXPECT_NEAR(r.theta1_mean, 0.05, 0.002);
  EXPECT_LE((r.u_mean - r.u_abs_true).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LT(r.max_probability_gap, 1e-4);
  EXPECT_EQ(r.estimates.size(), 200u);
}

TEST(Qcrb, PairwiseSumIsOrderStable) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  const double s = detail::pairwise_sum(v);
  double naive = 0.0;
  for (double x : v) naive += x;
  EXPECT_NEAR(s, naive, 1e-12);
}

TEST(Rng, DerivedSeedsAreDistinct) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t t = 0; t < 1000; ++t) seeds.push_back(derive_seed(1, t));
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::unique(seeds.begin(), seeds.end()), seeds.end());
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
}
