#include "oracles.hpp"
#include "rotosense/metrology.hpp"
#include "rotosense/states.hpp"

#include <gtest/gtest.h>

using namespace rotosense;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

std::array<double, 3> arr(const RotationParams& p) { return {p.theta1, p.theta2, p.theta3}; }

RotationParams random_params(std::mt19937_64& rng, double t1_lo = -2.5, double t1_hi = 2.5) {
  std::uniform_real_distribution<double> t1(t1_lo, t1_hi), t2(0.2, 2.9), t3(-3.0, 3.0);
  return {t1(rng), t2(rng), t3(rng)};
}

}  // namespace

TEST(JExpectations, CoherentTop) {
  const JExpectations e = j_expectations(states::coherent_top(Spin::from_value(2.0)));
  EXPECT_LE((e.mean - Vec3(0, 0, 2)).norm(), 1e-12);
  EXPECT_LE((e.cov - Vec3(1, 1, 0).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(JExpectations, AntiCoherentStates) {
  const JExpectations t = j_expectations(states::tetra2());
  EXPECT_LE(t.mean.norm(), 1e-12);
  EXPECT_LE((t.cov - 2.0 * Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  const JExpectations b = j_expectations(states::balance());
  EXPECT_LE(b.mean.norm(), 1e-12);
  EXPECT_LE((b.cov - 4.0 * Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(JExpectations, CovarianceInvariants) {
  std::mt19937_64 rng(21);
  for (int n = 1; n <= 6; ++n) {
    const Spin j = Spin::from_photons(n);
    for (int t = 0; t < 10; ++t) {
      const SpinState s(j, oracle::random_state(rng, j.dim()));
      const JExpectations e = j_expectations(s);
      EXPECT_LE((e.cov - e.cov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat3>(e.cov).eigenvalues().minCoeff(), -1e-10);
      EXPECT_NEAR(e.cov.trace(), j.casimir() - e.mean.squaredNorm(), 1e-10);
    }
  }
}

TEST(FisherSingle, Examples) {
  EXPECT_NEAR(fisher_single(states::tetra2(), Vec3::UnitZ()), 8.0, 1e-9);
  std::mt19937_64 rng(22);
  EXPECT_NEAR(fisher_single(states::balance(), oracle::random_axis(rng)), 16.0, 1e-9);
  EXPECT_NEAR(fisher_single(states::coherent_top(Spin::from_value(2.0)), Vec3::UnitZ()), 0.0, 1e-12);
  EXPECT_THROW(fisher_single(states::tetra2(), Vec3(1, 1, 0)), std::invalid_argument);
}

TEST(FisherSingle, EqualsFourTimesVariance) {
  std::mt19937_64 rng(23);
  for (int n = 1; n <= 6; ++n) {
    const Spin j = Spin::from_photons(n);
    const CMatrix jx = oracle::projected_j(0, n), jy = oracle::projected_j(1, n), jz = oracle::projected_j(2, n);
    for (int t = 0; t < 10; ++t) {
      const SpinState s(j, oracle::random_state(rng, j.dim()));
      const Vec3 u = oracle::random_axis(rng);
      const CMatrix g = u(0) * jx + u(1) * jy + u(2) * jz;
      const CVector psi = s.amps();
      const double mean = psi.dot(g * psi).real();
      const double var = psi.dot(g * g * psi).real() - mean * mean;
      EXPECT_NEAR(fisher_single(s, u), 4.0 * var, 1e-10);
    }
  }
}

TEST(AntiCoherence, Examples) {
  EXPECT_TRUE(anticoherence_report(states::tetra1(), 1e-12).pass);
  EXPECT_TRUE(anticoherence_report(states::tetra2(), 1e-12).pass);
  EXPECT_TRUE(anticoherence_report(states::balance(), 1e-12).pass);
  const AnticoherenceReport r = anticoherence_report(states::coherent_top(Spin::from_value(3.0)), 1e-12);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_mean, 3.0, 1e-12);
}

TEST(AntiCoherence, RotationInvariant) {
  std::mt19937_64 rng(24);
  for (const SpinState& s : {states::tetra1(), states::tetra2(), states::balance()}) {
    ASSERT_TRUE(anticoherence_report(s, 1e-10).pass);
    for (int t = 0; t < 100; ++t) {
      EXPECT_TRUE(anticoherence_report(rotate(s, random_params(rng)), 1e-9).pass);
    }
  }
}

TEST(Generators, Examples) {
  std::mt19937_64 rng(25);
  const RotationParams p = random_params(rng);
  const GeneratorCoeffs g = generator_coeffs(p);
  EXPECT_LE((g.g1 - axis_from_angles(p.theta2, p.theta3)).norm(), 1e-15);
  EXPECT_NEAR(g.g2.dot(g.g1), 0.0, 1e-12);
  EXPECT_NEAR(g.g3.dot(g.g1), 0.0, 1e-12);

  const GeneratorCoeffs g0 = generator_coeffs({0.0, 0.7, 0.3});
  EXPECT_LE(g0.g2.norm(), 1e-15);
  EXPECT_LE(g0.g3.norm(), 1e-15);

  const Spin two = Spin::from_value(2.0);
  EXPECT_LE(max_abs(generator_matrix(two, {0.4, 0.0, 0.0}, 1) - spin_operators(two).z), 1e-15);
  EXPECT_LE(max_abs(generator_matrix(two, {0.0, 0.7, 0.3}, 2)), 1e-15);
  EXPECT_THROW(generator_matrix(two, p, 4), std::out_of_range);
}

TEST(Generators, FiniteDifferenceOracle) {
  std::mt19937_64 rng(26);
  for (int n : {1, 4, 6}) {
    const Spin j = Spin::from_photons(n);
    for (int t = 0; t < 20; ++t) {
      const RotationParams p = random_params(rng);
      for (int k = 1; k <= 3; ++k) {
        const CMatrix analytic = generator_matrix(j, p, k);
        EXPECT_LE(max_abs(analytic - analytic.adjoint()), 1e-10);
        EXPECT_LE(max_abs(analytic - oracle::fd_generator(n, arr(p), k)), 1e-5)
            << "n=" << n << " k=" << k << " theta=(" << p.theta1 << "," << p.theta2 << "," << p.theta3 << ")";
      }
    }
  }
}

TEST(RotationMatrixR, Properties) {
  EXPECT_LE((rotation_matrix_R({0.0, 0.3, 0.2}) - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);

  std::mt19937_64 rng(27);
  for (int n : {1, 2, 4, 6}) {
    const Spin j = Spin::from_photons(n);
    const SpinOperators ops = spin_operators(j);
    for (int t = 0; t < 10; ++t) {
      const RotationParams p = random_params(rng);
      const Mat3 r = rotation_matrix_R(p);
      EXPECT_LE((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_NEAR(r.determinant(), 1.0, 1e-10);
      const CMatrix u = rotation_unitary(j, p);
      for (int a = 0; a < 3; ++a) {
        CMatrix rhs = CMatrix::Zero(j.dim(), j.dim());
        for (int b = 0; b < 3; ++b) rhs += r(a, b) * ops[b];
        EXPECT_LE(max_abs(u.adjoint() * ops[a] * u - rhs), 1e-10);
      }
    }
  }

  // A quarter turn about z: U^dagger Jx U = cos Jx - sin Jy for U = exp(-i pi/2 Jz)
  const Mat3 rz = rotation_matrix_R({kPi / 2, 0.0, 0.0});
  Mat3 expect;
  expect << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LE((rz - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(QfiMatrix, Examples) {
  std::mt19937_64 rng(28);
  for (int t = 0; t < 5; ++t) {
    RotationParams p = random_params(rng);
    p.theta1 = 0.2;
    EXPECT_NEAR(qfi_matrix(states::tetra2(), p)(0, 0), 8.0, 1e-9);
  }
  for (const SpinState& s : {states::tetra1(), states::tetra2(), states::balance()}) {
    const Mat3 q = qfi_matrix(s, {0.0, 0.9, 0.4});
    Mat3 expect = Mat3::Zero();
    expect(0, 0) = anticoherent_fisher(s.spin());
    EXPECT_LE((q - expect).cwiseAbs().maxCoeff(), 1e-10);
  }
  for (int t = 0; t < 20; ++t) {
    const RotationParams p = random_params(rng);
    const Mat3 full = qfi_matrix(states::balance(), p);
    EXPECT_LE((full - qfi_matrix_anticoherent(Spin::from_value(3.0), p)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(QfiMatrix, FiniteDifferenceOracleOnGeneralStates) {
  std::mt19937_64 rng(29);
  for (int n : {1, 3, 4, 6}) {
    const Spin j = Spin::from_photons(n);
    for (int t = 0; t < 5; ++t) {
      const SpinState s(j, oracle::random_state(rng, j.dim()));
      const RotationParams p = random_params(rng);
      const Mat3 q = qfi_matrix(s, p);
      const Mat3 ref = oracle::fd_qfi(n, s.amps(), arr(p));
      EXPECT_LE((q - ref).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, ref.cwiseAbs().maxCoeff())) << "n=" << n;
      EXPECT_LE((q - q.transpose()).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat3>(q).eigenvalues().minCoeff(), -1e-10);
      EXPECT_NEAR(q(0, 0), fisher_single(s, axis(p)), 1e-10);
    }
  }
}

TEST(QfiMatrix, DegenerateAxisIsRankDeficient) {
  const Mat3 q = qfi_matrix(states::tetra2(), {0.3, 0.0, 1.0});
  EXPECT_NEAR(q(2, 2), 0.0, 1e-12);
}
