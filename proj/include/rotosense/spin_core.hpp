#pragma once

// Spin-J algebra for N-photon polarization states.
//
// Conventions used throughout the library:
//   * |J,m> amplitudes are stored in descending m order (index k <-> m = J - k).
//   * Qubit 0 is the most significant bit of a computational-basis index.
//   * |H> <-> |0>, |V> <-> |1>, so |J,m> carries k = J - m vertical photons.
//   * J_i = sum_k sigma_i^(k) / 2, and a rotation is exp(-i theta1 u.J), which
//     acts on each photon as exp(-i (theta1/2) u.sigma).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rotosense {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

/// Total angular momentum J, stored as the integer 2J.
class Spin {
public:
  constexpr Spin() = default;

  static Spin from_twice(int twice_j) {
    if (twice_j < 0) {
      throw std::invalid_argument("spin: 2J must be non-negative, got " + std::to_string(twice_j));
    }
    Spin s;
    s.twice_ = twice_j;
    return s;
  }

  /// Accepts J as a real number; it must be a non-negative half-integer.
  static Spin from_value(double j) {
    if (!std::isfinite(j) || j < 0.0) {
      throw std::invalid_argument("spin: J must be a finite non-negative half-integer");
    }
    const double twice = 2.0 * j;
    const double rounded = std::round(twice);
    if (std::abs(twice - rounded) > 1e-9) {
      throw std::invalid_argument("spin: J must be a half-integer, got " + std::to_string(j));
    }
    return from_twice(static_cast<int>(rounded));
  }

  /// Spin of the symmetric subspace of n photons, J = n/2.
  static Spin from_photons(int n) { return from_twice(n); }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr int dim() const { return twice_ + 1; }
  constexpr int photons() const { return twice_; }
  constexpr double casimir() const { return value() * (value() + 1.0); }

  friend constexpr bool operator==(Spin, Spin) = default;

private:
  int twice_ = 0;
};

namespace detail {

inline void require_finite_norm(double norm2, const char* what) {
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    throw std::invalid_argument(std::string(what) + ": amplitude vector has zero or non-finite norm");
  }
}

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace detail

/// Pure state in the spin-J irrep. Construction normalizes the amplitudes.
class SpinState {
public:
  SpinState(Spin j, CVector amps) : j_(j), amps_(std::move(amps)) {
    if (amps_.size() != j_.dim()) {
      throw std::invalid_argument("SpinState: expected " + std::to_string(j_.dim()) +
                                  " amplitudes, got " + std::to_string(amps_.size()));
    }
    const double n2 = amps_.squaredNorm();
    detail::require_finite_norm(n2, "SpinState");
    amps_ /= std::sqrt(n2);
  }

  /// Basis state |J, m>.
  static SpinState basis(Spin j, double m) {
    const double k = j.value() - m;
    const double kr = std::round(k);
    if (std::abs(k - kr) > 1e-9 || kr < 0 || kr >= j.dim()) {
      throw std::invalid_argument("SpinState::basis: m out of range for J");
    }
    CVector v = CVector::Zero(j.dim());
    v(static_cast<Eigen::Index>(kr)) = 1.0;
    return SpinState(j, std::move(v));
  }

  Spin spin() const { return j_; }
  double j() const { return j_.value(); }
  const CVector& amps() const { return amps_; }
  cd amp_at_m(double m) const { return amps_(static_cast<Eigen::Index>(std::llround(j() - m))); }

private:
  Spin j_;
  CVector amps_;
};

/// Pure state of an n-qubit register; qubit 0 is the most significant bit.
class QubitState {
public:
  QubitState(int n_qubits, CVector amps) : n_(n_qubits), amps_(std::move(amps)) {
    if (n_ < 1 || n_ > 24) {
      throw std::invalid_argument("QubitState: n_qubits must be in [1, 24]");
    }
    if (amps_.size() != (Eigen::Index{1} << n_)) {
      throw std::invalid_argument("QubitState: expected 2^" + std::to_string(n_) + " amplitudes, got " +
                                  std::to_string(amps_.size()));
    }
    const double n2 = amps_.squaredNorm();
    detail::require_finite_norm(n2, "QubitState");
    amps_ /= std::sqrt(n2);
  }

  static QubitState from_amplitudes(CVector amps) {
    if (!detail::is_power_of_two(static_cast<std::size_t>(amps.size())) || amps.size() < 2) {
      throw std::invalid_argument("QubitState: amplitude count must be a power of two >= 2");
    }
    int n = 0;
    while ((Eigen::Index{1} << n) < amps.size()) ++n;
    return QubitState(n, std::move(amps));
  }

  /// Computational basis state; bits are read with qubit 0 as the MSB.
  static QubitState basis(int n_qubits, std::uint64_t index) {
    CVector v = CVector::Zero(Eigen::Index{1} << n_qubits);
    if (index >= static_cast<std::uint64_t>(v.size())) {
      throw std::invalid_argument("QubitState::basis: index out of range");
    }
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return QubitState(n_qubits, std::move(v));
  }

  int n_qubits() const { return n_; }
  Eigen::Index dim() const { return amps_.size(); }
  const CVector& amps() const { return amps_; }

private:
  int n_;
  CVector amps_;
};

/// Rotation by theta1 about the axis with polar angle theta2 and azimuth theta3.
struct RotationParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;

  double operator[](int k) const {
    switch (k) {
      case 1: return theta1;
      case 2: return theta2;
      case 3: return theta3;
      default: throw std::out_of_range("RotationParams: index must be 1, 2 or 3");
    }
  }

  RotationParams with(int k, double value) const {
    RotationParams p = *this;
    switch (k) {
      case 1: p.theta1 = value; break;
      case 2: p.theta2 = value; break;
      case 3: p.theta3 = value; break;
      default: throw std::out_of_range("RotationParams: index must be 1, 2 or 3");
    }
    return p;
  }
};

inline Vec3 axis_from_angles(double theta2, double theta3) {
  return {std::sin(theta2) * std::cos(theta3), std::sin(theta2) * std::sin(theta3), std::cos(theta2)};
}

inline Vec3 axis(const RotationParams& p) { return axis_from_angles(p.theta2, p.theta3); }

/// Polar and azimuthal angles of a unit vector, the inverse of axis_from_angles.
inline std::pair<double, double> angles_from_axis(const Vec3& u) {
  const Vec3 n = u.normalized();
  return {std::acos(std::clamp(n.z(), -1.0, 1.0)), std::atan2(n.y(), n.x())};
}

/// Rotation parameters for angle theta1 about the unit axis u.
inline RotationParams params_from_axis(double theta1, const Vec3& u) {
  const auto [t2, t3] = angles_from_axis(u);
  return {theta1, t2, t3};
}

struct SpinOperators {
  CMatrix x, y, z;

  const CMatrix& operator[](int i) const {
    switch (i) {
      case 0: return x;
      case 1: return y;
      case 2: return z;
      default: throw std::out_of_range("SpinOperators: index must be 0, 1 or 2");
    }
  }

  /// n.J for a real 3-vector n.
  CMatrix dot(const Vec3& n) const { return n.x() * x + n.y() * y + n.z() * z; }
};

/// Jx, Jy, Jz in the |J,m> basis (descending m) built from the ladder operators.
inline SpinOperators spin_operators(Spin j) {
  const int d = j.dim();
  const double jv = j.value();
  CMatrix jz = CMatrix::Zero(d, d);
  CMatrix jp = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    jz(k, k) = jv - k;
  }
  // J+ |J,m> = sqrt(J(J+1) - m(m+1)) |J,m+1>; m+1 sits one row above m.
  for (int k = 1; k < d; ++k) {
    const double m = jv - k;
    jp(k - 1, k) = std::sqrt(jv * (jv + 1.0) - m * (m + 1.0));
  }
  const CMatrix jm = jp.adjoint();
  SpinOperators ops;
  ops.x = 0.5 * (jp + jm);
  ops.y = (-0.5 * kI) * (jp - jm);
  ops.z = std::move(jz);
  return ops;
}

inline SpinOperators spin_operators(double j) { return spin_operators(Spin::from_value(j)); }

namespace detail {

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// exp(-i t H) for Hermitian H, via its eigendecomposition.
inline CMatrix exp_hermitian(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("matrix_exponential: Hermitian eigensolver failed");
  }
  const Eigen::VectorXd& w = es.eigenvalues();
  CVector phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    phases(k) = std::exp(cd{0.0, -t * w(k)});
  }
  const CMatrix& v = es.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

/// Scaling and squaring with a degree-18 Taylor polynomial for general input.
inline CMatrix exp_scaling_squaring(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  }
  const CMatrix scaled = a / std::ldexp(1.0, squarings);
  CMatrix result = CMatrix::Identity(n, n);
  // Horner evaluation of sum_{k<=18} A^k / k!.
  constexpr int kDegree = 18;
  for (int k = kDegree; k >= 1; --k) {
    result = CMatrix::Identity(n, n) + (scaled * result) / static_cast<double>(k);
  }
  for (int s = 0; s < squarings; ++s) {
    result = result * result;
  }
  return result;
}

}  // namespace detail

/// exp(A) for a square complex matrix of dimension <= 128.
///
/// Hermitian and skew-Hermitian inputs go through a dense eigendecomposition,
/// which keeps the result unitary to solver precision. Anything else falls back
/// to scaling and squaring.
inline CMatrix matrix_exponential(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("matrix_exponential: matrix must be square");
  }
  if (a.rows() > 128) {
    throw std::invalid_argument("matrix_exponential: dimension must be <= 128");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  const double scale = std::max(detail::max_abs(a), 1.0);
  if (detail::max_abs(a + a.adjoint()) <= 1e-14 * scale) {
    // A = -i H with H = i A Hermitian.
    const CMatrix h = kI * a;
    return detail::exp_hermitian(0.5 * (h + h.adjoint()), 1.0);
  }
  if (detail::max_abs(a - a.adjoint()) <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()));
    const CMatrix& v = es.eigenvectors();
    return v * es.eigenvalues().array().exp().matrix().cast<cd>().asDiagonal() * v.adjoint();
  }
  return detail::exp_scaling_squaring(a);
}

/// exp(-i theta1 u.J) in the spin-J irrep.
inline CMatrix rotation_unitary(Spin j, const RotationParams& p) {
  if (!std::isfinite(p.theta1) || !std::isfinite(p.theta2) || !std::isfinite(p.theta3)) {
    throw std::invalid_argument("rotation_unitary: non-finite rotation parameters");
  }
  const SpinOperators ops = spin_operators(j);
  return detail::exp_hermitian(ops.dot(axis(p)), p.theta1);
}

inline CMatrix rotation_unitary(double j, const RotationParams& p) {
  return rotation_unitary(Spin::from_value(j), p);
}

inline SpinState rotate(const SpinState& s, const RotationParams& p) {
  return SpinState(s.spin(), rotation_unitary(s.spin(), p) * s.amps());
}

/// Single-photon rotation exp(-i (theta1/2) u.sigma), the per-qubit factor of rotation_unitary.
inline Eigen::Matrix2cd qubit_rotation(const RotationParams& p) {
  const Vec3 u = axis(p);
  const double c = std::cos(0.5 * p.theta1);
  const double s = std::sin(0.5 * p.theta1);
  Eigen::Matrix2cd m;
  m(0, 0) = cd{c, -s * u.z()};
  m(0, 1) = cd{-s * u.y(), -s * u.x()};
  m(1, 0) = cd{s * u.y(), -s * u.x()};
  m(1, 1) = cd{c, s * u.z()};
  return m;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

inline int popcount(std::uint64_t v) { return __builtin_popcountll(v); }

/// Embeds |J,m> into the symmetric subspace of N = 2J qubits.
inline QubitState dicke_to_qubit(const SpinState& s) {
  const int n = s.spin().photons();
  if (n < 1) {
    throw std::invalid_argument("dicke_to_qubit: need at least one photon (J >= 1/2)");
  }
  if (n > 24) {
    throw std::invalid_argument("dicke_to_qubit: too many photons for a statevector");
  }
  std::vector<double> inv_norm(n + 1);
  for (int k = 0; k <= n; ++k) {
    inv_norm[k] = 1.0 / std::sqrt(binomial(n, k));
  }
  const std::uint64_t dim = std::uint64_t{1} << n;
  CVector out(static_cast<Eigen::Index>(dim));
  for (std::uint64_t b = 0; b < dim; ++b) {
    const int k = popcount(b);
    out(static_cast<Eigen::Index>(b)) = s.amps()(k) * inv_norm[k];
  }
  return QubitState(n, std::move(out));
}

struct SymmetricProjection {
  SpinState state;
  /// Squared weight outside the maximal-J subspace, relative to the input norm.
  double lost_weight;
};

/// Projects onto the maximal-J symmetric subspace and renormalizes.
inline SymmetricProjection qubit_to_dicke(const QubitState& q) {
  const int n = q.n_qubits();
  CVector c = CVector::Zero(n + 1);
  for (Eigen::Index b = 0; b < q.dim(); ++b) {
    c(popcount(static_cast<std::uint64_t>(b))) += q.amps()(b);
  }
  for (int k = 0; k <= n; ++k) {
    c(k) /= std::sqrt(binomial(n, k));
  }
  const double kept = c.squaredNorm();
  if (kept < 1e-12) {
    throw std::domain_error("qubit_to_dicke: state has no component in the symmetric subspace");
  }
  return {SpinState(Spin::from_photons(n), std::move(c)), std::max(0.0, 1.0 - kept)};
}

/// <a|b> for spin states of equal J.
inline cd inner(const SpinState& a, const SpinState& b) {
  if (a.spin() != b.spin()) {
    throw std::invalid_argument("inner: spin states have different J");
  }
  return a.amps().dot(b.amps());
}

}  // namespace rotosense
