#pragma once

// Fisher information for SU(2) rotations of pure spin states.

#include "rotosense/spin_core.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace rotosense {

/// First and second moments of the spin operators.
struct JExpectations {
  Vec3 mean = Vec3::Zero();
  /// cov(i,j) = <J_i J_j + J_j J_i>/2 - <J_i><J_j>
  Mat3 cov = Mat3::Zero();
};

inline JExpectations j_expectations(const SpinState& s) {
  const SpinOperators ops = spin_operators(s.spin());
  const CVector& psi = s.amps();
  std::array<CVector, 3> applied = {ops.x * psi, ops.y * psi, ops.z * psi};
  JExpectations out;
  for (int i = 0; i < 3; ++i) {
    out.mean(i) = psi.dot(applied[i]).real();
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = i; k < 3; ++k) {
      // <J_i J_k> = <J_i psi | J_k psi>; the symmetrized part is its real part.
      const double sym = applied[i].dot(applied[k]).real();
      out.cov(i, k) = sym - out.mean(i) * out.mean(k);
      out.cov(k, i) = out.cov(i, k);
    }
  }
  return out;
}

/// F = 4 u^T cov u for rotations about the fixed unit axis u.
inline double fisher_single(const SpinState& s, const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("fisher_single: axis must be a unit vector");
  }
  const JExpectations e = j_expectations(s);
  return std::max(0.0, 4.0 * u.dot(e.cov * u));
}

/// Optimal single-axis value 4 J(J+1) / 3 reached by second-order anti-coherent states.
inline double anticoherent_fisher(Spin j) { return 4.0 * j.casimir() / 3.0; }

struct AnticoherenceReport {
  bool pass = false;
  double tol = 0.0;
  double max_mean = 0.0;        ///< max_i |<J_i>|
  double max_diag_dev = 0.0;    ///< max_i |cov_ii - J(J+1)/3|
  double max_offdiag = 0.0;     ///< max_{i!=j} |cov_ij|
  JExpectations moments;
};

/// Checks <J_i> = 0 and <J_i J_j> = delta_ij J(J+1)/3.
inline AnticoherenceReport anticoherence_report(const SpinState& s, double tol) {
  AnticoherenceReport r;
  r.tol = tol;
  r.moments = j_expectations(s);
  const double target = s.spin().casimir() / 3.0;
  for (int i = 0; i < 3; ++i) {
    r.max_mean = std::max(r.max_mean, std::abs(r.moments.mean(i)));
    r.max_diag_dev = std::max(r.max_diag_dev, std::abs(r.moments.cov(i, i) - target));
    for (int k = 0; k < 3; ++k) {
      if (k != i) r.max_offdiag = std::max(r.max_offdiag, std::abs(r.moments.cov(i, k)));
    }
  }
  r.pass = r.max_mean <= tol && r.max_diag_dev <= tol && r.max_offdiag <= tol;
  return r;
}

/// Derivatives of the rotation axis with respect to theta2 and theta3.
inline Vec3 axis_derivative(const RotationParams& p, int k) {
  const double s2 = std::sin(p.theta2), c2 = std::cos(p.theta2);
  const double s3 = std::sin(p.theta3), c3 = std::cos(p.theta3);
  switch (k) {
    case 2: return {c2 * c3, c2 * s3, -s2};
    case 3: return {-s2 * s3, s2 * c3, 0.0};
    default: throw std::out_of_range("axis_derivative: k must be 2 or 3");
  }
}

/// Coefficient vectors g_k with G_k = i (d U / d theta_k) U^dagger = g_k . J.
struct GeneratorCoeffs {
  Vec3 g1 = Vec3::Zero();
  Vec3 g2 = Vec3::Zero();
  Vec3 g3 = Vec3::Zero();

  const Vec3& operator[](int k) const {
    switch (k) {
      case 1: return g1;
      case 2: return g2;
      case 3: return g3;
      default: throw std::out_of_range("GeneratorCoeffs: k must be 1, 2 or 3");
    }
  }

  /// Row k-1 holds g_k.
  Mat3 matrix() const {
    Mat3 m;
    m.row(0) = g1.transpose();
    m.row(1) = g2.transpose();
    m.row(2) = g3.transpose();
    return m;
  }
};

/// g_1 = u and, for k = 2,3,
///   g_k = 2 sin(t/2) [cos(t/2) du_k - sin(t/2) (du_k x u)]
///       = sin(t) du_k - (1 - cos(t)) (du_k x u),
/// with t = theta1. The half angles come from each photon rotating by
/// exp(-i (theta1/2) u.sigma).
inline GeneratorCoeffs generator_coeffs(const RotationParams& p) {
  GeneratorCoeffs g;
  const Vec3 u = axis(p);
  g.g1 = u;
  const double s = std::sin(p.theta1);
  const double one_minus_c = 2.0 * std::sin(0.5 * p.theta1) * std::sin(0.5 * p.theta1);
  for (int k = 2; k <= 3; ++k) {
    const Vec3 du = axis_derivative(p, k);
    const Vec3 gk = s * du - one_minus_c * du.cross(u);
    (k == 2 ? g.g2 : g.g3) = gk;
  }
  return g;
}

/// G_k = g_k . J.
inline CMatrix generator_matrix(Spin j, const RotationParams& p, int k) {
  if (k < 1 || k > 3) {
    throw std::out_of_range("generator_matrix: k must be 1, 2 or 3");
  }
  return spin_operators(j).dot(generator_coeffs(p)[k]);
}

/// R with U^dagger J_a U = sum_b R_ab J_b.
///
/// Extracted from the spin-1/2 representation: with Tr(s_a s_b) = delta_ab / 2,
/// R_ab = 2 Re Tr(U^dagger s_a U s_b).
inline Mat3 rotation_matrix_R(const RotationParams& p) {
  const Spin half = Spin::from_twice(1);
  const SpinOperators s = spin_operators(half);
  const CMatrix u = rotation_unitary(half, p);
  Mat3 r;
  for (int a = 0; a < 3; ++a) {
    const CMatrix conj = u.adjoint() * s[a] * u;
    for (int b = 0; b < 3; ++b) {
      r(a, b) = 2.0 * (conj * s[b]).trace().real();
    }
  }
  return r;
}

/// Quantum Fisher information matrix of U(theta)|psi> for the three rotation parameters.
///
/// Q_kl = 4 Cov(G_k, G_l) in the rotated state. Pulling the generators back
/// through U gives U^dagger (g.J) U = (R^T g).J, hence Q = 4 G R C R^T G^T with
/// G the matrix whose rows are g_k and C the initial-state covariance.
inline Mat3 qfi_matrix(const SpinState& s, const RotationParams& p) {
  const Mat3 g = generator_coeffs(p).matrix();
  const Mat3 r = rotation_matrix_R(p);
  const Mat3 c = j_expectations(s).cov;
  Mat3 q = 4.0 * g * r * c * r.transpose() * g.transpose();
  return 0.5 * (q + q.transpose());
}

/// 4 J(J+1)/3 G G^T, valid only for second-order anti-coherent states.
inline Mat3 qfi_matrix_anticoherent(Spin j, const RotationParams& p) {
  const Mat3 g = generator_coeffs(p).matrix();
  return anticoherent_fisher(j) * g * g.transpose();
}

}  // namespace rotosense
