#include "oracles.hpp"
#include "rotosense/measurement.hpp"
#include "rotosense/states.hpp"

#include <gtest/gtest.h>

using namespace rotosense;

namespace {

/// |<a|b>| for unit vectors, i.e. equality up to a global phase.
double phase_free_overlap(const CVector& a, const CVector& b) { return std::abs(a.dot(b)); }

}  // namespace

TEST(OptimalBasis, Orthonormal) {
  for (const SpinState& s : {states::tetra1(), states::tetra2(), states::balance()}) {
    const ProjectorBasis b = optimal_basis(s);
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n)
        EXPECT_NEAR(std::abs(b.states[m].amps().dot(b.states[n].amps()) - (m == n ? 1.0 : 0.0)), 0.0, 1e-10);
  }
}

TEST(OptimalBasis, PublishedStates) {
  const double r = 1.0 / std::sqrt(2.0);
  {
    const ProjectorBasis b = optimal_basis(states::tetra2());
    CVector psi3 = CVector::Zero(5), psi1 = CVector::Zero(5);
    psi3(0) = r;
    psi3(4) = -r;
    psi1(1) = r;
    psi1(3) = r;
    EXPECT_NEAR(phase_free_overlap(b.states[3].amps(), psi3), 1.0, 1e-12);
    EXPECT_NEAR(phase_free_overlap(b.states[1].amps(), psi1), 1.0, 1e-12);
  }
  {
    const ProjectorBasis b = optimal_basis(states::balance());
    CVector psi3 = CVector::Zero(7);
    psi3(1) = r;
    psi3(5) = -r;
    EXPECT_NEAR(phase_free_overlap(b.states[3].amps(), psi3), 1.0, 1e-12);
  }
}

TEST(OptimalBasis, RejectsNonAntiCoherent) {
  EXPECT_THROW(optimal_basis(states::coherent_top(Spin::from_value(2.0))), std::invalid_argument);
}

TEST(ExactProbabilities, Examples) {
  const SpinState t = states::tetra2();
  const ProjectorBasis bt = optimal_basis(t);
  const OutcomeDistribution d0 = exact_probabilities(t, bt, {0.0, 0.3, 0.2});
  EXPECT_NEAR(d0.p[0], 1.0, 1e-12);
  for (int i = 1; i < 5; ++i) EXPECT_NEAR(d0.p[i], 0.0, 1e-12);

  const OutcomeDistribution dz = exact_probabilities(t, bt, {0.01, 0.0, 0.0});
  EXPECT_NEAR(dz.p[0], 1.0 - 2e-4, 1e-6);
  EXPECT_NEAR(dz.p[3], 2e-4, 1e-6);

  const SpinState b = states::balance();
  const OutcomeDistribution dx = exact_probabilities(b, optimal_basis(b), {0.01, kPi / 2, 0.0});
  EXPECT_NEAR(dx.p[1], 4e-4, 1e-6);
}

TEST(ExactProbabilities, ValidDistribution) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (const SpinState& s : {states::tetra2(), states::balance()}) {
    const ProjectorBasis b = optimal_basis(s);
    for (int t = 0; t < 50; ++t) {
      const OutcomeDistribution d = exact_probabilities(s, b, {ang(rng), ang(rng), ang(rng)});
      for (double p : d.p) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0 + 1e-12);
      }
      EXPECT_NEAR(d.sum(), 1.0, 1e-12);
    }
  }
}

TEST(ExactProbabilities, MatchesOracleRotation) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  const SpinState s = states::balance();
  const ProjectorBasis b = optimal_basis(s);
  for (int t = 0; t < 10; ++t) {
    const RotationParams p{ang(rng), ang(rng), ang(rng)};
    const CVector rotated = oracle::rotation(6, p.theta1, p.theta2, p.theta3) * s.amps();
    const OutcomeDistribution d = exact_probabilities(s, b, p);
    for (int mu = 0; mu < 4; ++mu) EXPECT_NEAR(d.p[mu], std::norm(b.states[mu].amps().dot(rotated)), 1e-12);
  }
}

TEST(SmallAngle, Examples) {
  const OutcomeDistribution a = small_angle_probabilities(Spin::from_value(2.0), 0.1, Vec3::UnitZ());
  EXPECT_NEAR(a.p[0], 0.98, 1e-15);
  EXPECT_NEAR(a.p[3], 0.02, 1e-15);
  const OutcomeDistribution b = small_angle_probabilities(Spin::from_value(3.0), 0.1, Vec3::UnitX());
  EXPECT_NEAR(b.p[0], 0.96, 1e-15);
  EXPECT_NEAR(b.p[1], 0.04, 1e-15);
  const OutcomeDistribution c = small_angle_probabilities(Spin::from_value(1.5), 0.0, Vec3::UnitY());
  EXPECT_EQ(c.p[0], 1.0);
  for (int i = 1; i < 5; ++i) EXPECT_EQ(c.p[i], 0.0);
  EXPECT_THROW(small_angle_probabilities(Spin::from_value(2.0), 1.5, Vec3::UnitZ()), std::domain_error);
  EXPECT_THROW(small_angle_probabilities(Spin::from_value(2.0), 0.1, Vec3(1, 1, 1)), std::invalid_argument);
}

TEST(SmallAngle, CubicRemainder) {
  std::mt19937_64 rng(33);
  for (const SpinState& s : {states::tetra2(), states::balance()}) {
    const ProjectorBasis b = optimal_basis(s);
    std::vector<double> th, gap, rest;
    double c = 0.0, c_rest = 0.0;
    std::vector<Vec3> axes;
    for (int a = 0; a < 20; ++a) axes.push_back(oracle::random_axis(rng));
    for (int k = 1; k <= 50; ++k) {
      const double t = 0.001 * k;
      double g = 0.0, r = 0.0;
      for (const Vec3& u : axes) {
        const OutcomeDistribution e = exact_probabilities(s, b, params_from_axis(t, u));
        const OutcomeDistribution sa = small_angle_probabilities(s.spin(), t, u);
        for (int mu = 0; mu < 4; ++mu) g = std::max(g, std::abs(e.p[mu] - sa.p[mu]));
        r = std::max(r, e.p[4]);
      }
      th.push_back(t);
      gap.push_back(g);
      rest.push_back(r);
      c = std::max(c, g / (t * t * t));
      c_rest = std::max(c_rest, r / (t * t * t));
    }
    EXPECT_GE(oracle::loglog_slope(th, gap), 2.8);
    for (std::size_t i = 0; i < th.size(); ++i) {
      EXPECT_LE(gap[i], c * th[i] * th[i] * th[i] * (1 + 1e-12));
      EXPECT_LE(rest[i], c_rest * th[i] * th[i] * th[i] * (1 + 1e-12));
    }
    // The fitted constants stay O(1).
    EXPECT_LT(c, 10.0);
    EXPECT_LT(c_rest, 10.0);
  }
}

TEST(ClassicalFisher, Examples) {
  const SpinState t = states::tetra2();
  const ProjectorBasis bt = optimal_basis(t);
  EXPECT_NEAR(classical_fisher(t, bt, {1e-3, 0.0, 0.0}, 1), 8.0, 0.08);
  const SpinState b = states::balance();
  EXPECT_NEAR(classical_fisher(b, optimal_basis(b), {1e-3, 0.0, 0.0}, 1), 16.0, 0.16);
  std::mt19937_64 rng(34);
  const double ref = classical_fisher(t, bt, params_from_axis(1e-3, oracle::random_axis(rng)), 1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(classical_fisher(t, bt, params_from_axis(1e-3, oracle::random_axis(rng)), 1), ref, 0.01 * ref);
  }
  EXPECT_THROW(classical_fisher(t, bt, {1e-3, 0.0, 0.0}, 0), std::out_of_range);
}

TEST(ClassicalFisher, ZeroAngleIsFinite) {
  const SpinState t = states::tetra2();
  const double f = classical_fisher(t, optimal_basis(t), {0.0, 0.5, 0.5}, 1);
  EXPECT_TRUE(std::isfinite(f));
}

TEST(ClassicalFisher, ConvergesAsThetaShrinks) {
  const SpinState t = states::tetra2();
  const ProjectorBasis b = optimal_basis(t);
  double prev_err = 1e9;
  for (double th : {0.05, 0.02, 0.01, 0.005, 0.002}) {
    const double err = std::abs(classical_fisher(t, b, {th, 1.0, 0.5}, 1) - 8.0);
    EXPECT_LE(err, prev_err + 1e-3);
    prev_err = err;
  }
}

TEST(Saturation, Examples) {
  const SaturationReport r = multiparam_saturation_check(states::tetra2(), {0.02, 1.0, 0.5});
  EXPECT_NEAR(r.ratio[0], 1.0, 0.02);
  EXPECT_NEAR(r.ratio[1], 1.0, 0.05);
  EXPECT_NEAR(r.ratio[2], 1.0, 0.05);
  const SaturationReport z = multiparam_saturation_check(states::balance(), {1e-6, 1.0, 0.5});
  EXPECT_LE(z.quantum[1], 1e-9);
  EXPECT_LE(z.quantum[2], 1e-9);
}
