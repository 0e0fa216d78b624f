#pragma once

// Projective readout in the optimal basis {phi0, J_x phi0, J_y phi0, J_z phi0}.

#include "rotosense/metrology.hpp"
#include "rotosense/spin_core.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rotosense {

/// Orthonormal [psi_0, psi_1, psi_2, psi_3] with psi_i = J_i psi_0 / sqrt(J(J+1)/3).
struct ProjectorBasis {
  Spin j;
  std::array<SpinState, 4> states;
};

/// Outcome probabilities [P0, P1, P2, P3, P_rest]; P_rest lumps the remaining 2J-3 projectors.
struct OutcomeDistribution {
  std::array<double, 5> p{};
  RotationParams params;

  double rest() const { return p[4]; }
  double sum() const { return p[0] + p[1] + p[2] + p[3] + p[4]; }
};

inline constexpr std::size_t kRestOutcome = 4;

inline ProjectorBasis optimal_basis(const SpinState& phi0) {
  const AnticoherenceReport ac = anticoherence_report(phi0, 1e-10);
  if (!ac.pass) {
    throw std::invalid_argument(
        "optimal_basis: probe is not second-order anti-coherent (max |<J>| = " + std::to_string(ac.max_mean) +
        ", max diag dev = " + std::to_string(ac.max_diag_dev) + ", max offdiag = " + std::to_string(ac.max_offdiag) +
        ")");
  }
  const SpinOperators ops = spin_operators(phi0.spin());
  const double norm = std::sqrt(phi0.spin().casimir() / 3.0);
  return ProjectorBasis{phi0.spin(),
                        {phi0, SpinState(phi0.spin(), ops.x * phi0.amps() / norm),
                         SpinState(phi0.spin(), ops.y * phi0.amps() / norm),
                         SpinState(phi0.spin(), ops.z * phi0.amps() / norm)}};
}

namespace detail {

inline OutcomeDistribution project(const ProjectorBasis& basis, const CVector& rotated, const RotationParams& p) {
  OutcomeDistribution d;
  d.params = p;
  double total = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    d.p[mu] = std::norm(basis.states[mu].amps().dot(rotated));
    total += d.p[mu];
  }
  // Rounding can push the complement a few ulps below zero.
  d.p[kRestOutcome] = std::max(0.0, 1.0 - total);
  return d;
}

}  // namespace detail

/// P_mu = |<psi_mu| exp(-i theta1 u.J) |phi0>|^2.
inline OutcomeDistribution exact_probabilities(const SpinState& phi0, const ProjectorBasis& basis,
                                               const RotationParams& p) {
  if (phi0.spin() != basis.j) {
    throw std::invalid_argument("exact_probabilities: basis and probe have different J");
  }
  const CVector rotated = rotation_unitary(phi0.spin(), p) * phi0.amps();
  return detail::project(basis, rotated, p);
}

/// Second-order expansion P0 = 1 - t^2 J(J+1)/3, P_i = t^2 u_i^2 J(J+1)/3.
inline OutcomeDistribution small_angle_probabilities(Spin j, double theta1, const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("small_angle_probabilities: axis must be a unit vector");
  }
  const double c = theta1 * theta1 * j.casimir() / 3.0;
  if (!(c <= 1.0)) {
    throw std::domain_error("small_angle_probabilities: theta1^2 J(J+1)/3 exceeds 1");
  }
  OutcomeDistribution d;
  d.params = params_from_axis(theta1, u);
  d.p[0] = 1.0 - c;
  for (int i = 0; i < 3; ++i) {
    d.p[i + 1] = c * u(i) * u(i);
  }
  d.p[kRestOutcome] = 0.0;
  return d;
}

inline constexpr double kFisherStep = 1e-5;
inline constexpr double kFisherProbabilityFloor = 1e-15;

/// Multinomial Fisher information sum_mu (dP_mu/d theta_k)^2 / P_mu over all five outcomes.
///
/// Derivatives are central differences with step kFisherStep. Outcomes with
/// P_mu below kFisherProbabilityFloor are dropped.
inline double classical_fisher(const SpinState& phi0, const ProjectorBasis& basis, const RotationParams& p, int k) {
  if (k < 1 || k > 3) {
    throw std::out_of_range("classical_fisher: k must be 1, 2 or 3");
  }
  const OutcomeDistribution mid = exact_probabilities(phi0, basis, p);
  const OutcomeDistribution plus = exact_probabilities(phi0, basis, p.with(k, p[k] + kFisherStep));
  const OutcomeDistribution minus = exact_probabilities(phi0, basis, p.with(k, p[k] - kFisherStep));
  double f = 0.0;
  for (std::size_t mu = 0; mu < mid.p.size(); ++mu) {
    if (mid.p[mu] < kFisherProbabilityFloor) continue;
    const double dp = (plus.p[mu] - minus.p[mu]) / (2.0 * kFisherStep);
    f += dp * dp / mid.p[mu];
  }
  return f;
}

struct SaturationReport {
  RotationParams params;
  std::array<double, 3> classical{};  ///< F(theta_k)
  std::array<double, 3> quantum{};    ///< Q_kk
  std::array<double, 3> ratio{};      ///< F(theta_k) / Q_kk, NaN when Q_kk == 0
};

/// Compares F(theta_k) of the optimal-basis readout with the QFI diagonal Q_kk.
inline SaturationReport multiparam_saturation_check(const SpinState& phi0, const RotationParams& p) {
  const ProjectorBasis basis = optimal_basis(phi0);
  const Mat3 q = qfi_matrix(phi0, p);
  SaturationReport r;
  r.params = p;
  for (int k = 1; k <= 3; ++k) {
    r.classical[k - 1] = classical_fisher(phi0, basis, p, k);
    r.quantum[k - 1] = q(k - 1, k - 1);
    r.ratio[k - 1] = r.quantum[k - 1] > 0.0 ? r.classical[k - 1] / r.quantum[k - 1] : std::nan("");
  }
  return r;
}

}  // namespace rotosense
