#pragma once

// Exact statevector simulation for small registers (up to 12 qubits).

#include "rotosense/bell_analysis.hpp"
#include "rotosense/spin_core.hpp"
#include "rotosense/states.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rotosense {

inline constexpr int kMaxCircuitQubits = 12;

enum class GateKind { H, X, Z, S, Custom };

inline std::string_view to_string(GateKind k) {
  switch (k) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Z: return "Z";
    case GateKind::S: return "S";
    case GateKind::Custom: return "U";
  }
  return "?";
}

inline std::optional<GateKind> gate_kind_from_string(std::string_view s) {
  if (s == "H") return GateKind::H;
  if (s == "X" || s == "CNOT" || s == "CX" || s == "MCX" || s == "TOFFOLI") return GateKind::X;
  if (s == "Z" || s == "CZ" || s == "MCZ") return GateKind::Z;
  if (s == "S") return GateKind::S;
  if (s == "U" || s == "CUSTOM") return GateKind::Custom;
  return std::nullopt;
}

using Mat2 = Eigen::Matrix2cd;

inline Mat2 gate_matrix(GateKind k) {
  Mat2 m;
  const double r = 1.0 / std::sqrt(2.0);
  switch (k) {
    case GateKind::H: m << r, r, r, -r; break;
    case GateKind::X: m << 0, 1, 1, 0; break;
    case GateKind::Z: m << 1, 0, 0, -1; break;
    case GateKind::S: m << 1, 0, 0, kI; break;
    case GateKind::Custom: throw std::invalid_argument("gate_matrix: custom gates carry their own matrix");
  }
  return m;
}

/// A single-qubit operation applied to each target, conditioned on every control being |1>.
struct Gate {
  GateKind kind = GateKind::X;
  std::vector<int> targets;
  std::vector<int> controls;
  Mat2 matrix = Mat2::Identity();
  std::string label;  ///< name of a custom gate, e.g. "U1"

  static Gate make(GateKind kind, std::vector<int> targets, std::vector<int> controls = {}) {
    Gate g;
    g.kind = kind;
    g.targets = std::move(targets);
    g.controls = std::move(controls);
    g.matrix = gate_matrix(kind);
    g.label = std::string(to_string(kind));
    return g;
  }

  static Gate custom(const Mat2& m, std::vector<int> targets, std::vector<int> controls = {}, std::string label = "U") {
    if ((m.adjoint() * m - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
      throw std::invalid_argument("Gate: custom matrix '" + label + "' is not unitary");
    }
    Gate g;
    g.kind = GateKind::Custom;
    g.targets = std::move(targets);
    g.controls = std::move(controls);
    g.matrix = m;
    g.label = std::move(label);
    return g;
  }

  /// Same operation on other qubits.
  Gate on(std::vector<int> new_targets, std::vector<int> new_controls = {}) const {
    Gate g = *this;
    g.targets = std::move(new_targets);
    g.controls = std::move(new_controls);
    return g;
  }
};

inline Gate h(int t, std::vector<int> c = {}) { return Gate::make(GateKind::H, {t}, std::move(c)); }
inline Gate x(int t, std::vector<int> c = {}) { return Gate::make(GateKind::X, {t}, std::move(c)); }
inline Gate z(int t, std::vector<int> c = {}) { return Gate::make(GateKind::Z, {t}, std::move(c)); }
inline Gate s(int t, std::vector<int> c = {}) { return Gate::make(GateKind::S, {t}, std::move(c)); }

inline void validate_gate(const Gate& g, int n_qubits) {
  if (g.targets.empty()) throw std::invalid_argument("Gate: no target qubit");
  std::vector<int> all = g.targets;
  all.insert(all.end(), g.controls.begin(), g.controls.end());
  for (int q : all) {
    if (q < 0 || q >= n_qubits) {
      throw std::invalid_argument("Gate '" + g.label + "': qubit " + std::to_string(q) + " outside register of " +
                                  std::to_string(n_qubits));
    }
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw std::invalid_argument("Gate '" + g.label + "': control and target qubits must be distinct");
  }
  if ((g.matrix.adjoint() * g.matrix - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("Gate '" + g.label + "': matrix is not unitary");
  }
}

struct Circuit {
  int n_qubits = 0;
  std::vector<Gate> gates;
  /// Qubits read out at the end; empty means all.
  std::vector<int> measured;

  explicit Circuit(int n = 1) : n_qubits(n) {
    if (n < 1 || n > kMaxCircuitQubits) {
      throw std::invalid_argument("Circuit: register size must be in [1, " + std::to_string(kMaxCircuitQubits) + "]");
    }
  }

  Circuit& add(Gate g) {
    validate_gate(g, n_qubits);
    gates.push_back(std::move(g));
    return *this;
  }
};

namespace detail {

inline void apply_gate(CVector& v, int n_qubits, const Gate& g) {
  std::uint64_t cmask = 0;
  for (int c : g.controls) cmask |= bit_of(n_qubits, c);
  for (int t : g.targets) {
    const std::uint64_t tb = bit_of(n_qubits, t);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(v.size()); ++i) {
      if ((i & tb) || (i & cmask) != cmask) continue;
      const cd a0 = v(static_cast<Eigen::Index>(i));
      const cd a1 = v(static_cast<Eigen::Index>(i | tb));
      v(static_cast<Eigen::Index>(i)) = g.matrix(0, 0) * a0 + g.matrix(0, 1) * a1;
      v(static_cast<Eigen::Index>(i | tb)) = g.matrix(1, 0) * a0 + g.matrix(1, 1) * a1;
    }
  }
}

}  // namespace detail

inline QubitState run_circuit(const Circuit& c, const QubitState& input) {
  if (input.n_qubits() != c.n_qubits) {
    throw std::invalid_argument("run_circuit: circuit has " + std::to_string(c.n_qubits) + " qubits, state has " +
                                std::to_string(input.n_qubits()));
  }
  CVector v = input.amps();
  for (const Gate& g : c.gates) {
    validate_gate(g, c.n_qubits);
    detail::apply_gate(v, c.n_qubits, g);
  }
  return QubitState(c.n_qubits, std::move(v));
}

/// The full unitary, column by column.
inline CMatrix circuit_unitary(const Circuit& c) {
  const Eigen::Index d = Eigen::Index{1} << c.n_qubits;
  CMatrix u(d, d);
  for (Eigen::Index col = 0; col < d; ++col) {
    u.col(col) = run_circuit(c, QubitState::basis(c.n_qubits, static_cast<std::uint64_t>(col))).amps();
  }
  return u;
}

inline double fidelity(const QubitState& a, const QubitState& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("fidelity: states have different dimensions");
  }
  return std::min(1.0, std::norm(a.amps().dot(b.amps())));
}

/// Computational-basis outcome probabilities over the measured qubits (all when `measured` is empty).
inline std::vector<double> outcome_distribution(const QubitState& q, const std::vector<int>& measured = {}) {
  if (measured.empty()) {
    std::vector<double> p(static_cast<std::size_t>(q.dim()));
    for (Eigen::Index i = 0; i < q.dim(); ++i) p[static_cast<std::size_t>(i)] = std::norm(q.amps()(i));
    return p;
  }
  std::vector<double> p(std::size_t{1} << measured.size(), 0.0);
  for (Eigen::Index i = 0; i < q.dim(); ++i) {
    std::size_t k = 0;
    for (int m : measured) k = 2 * k + ((static_cast<std::uint64_t>(i) & detail::bit_of(q.n_qubits(), m)) ? 1 : 0);
    p[k] += std::norm(q.amps()(i));
  }
  return p;
}

/// Single-qubit gates printed in the state-preparation and analyzer diagrams: "U1", "U2", "U", "S".
inline Gate paper_gate(std::string_view name) {
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
  Mat2 m;
  if (name == "U1") {
    m << kI, -r2, r2, -kI;
    return Gate::custom(m / r3, {0}, {}, "U1");
  }
  if (name == "U2") {
    m << cd{r3, 1}, cd{-r3, -1}, cd{r3, -1}, cd{r3, -1};
    return Gate::custom(m / (2.0 * r2), {0}, {}, "U2");
  }
  if (name == "U") {
    m << 1, -r2, r2, 1;
    return Gate::custom(m / r3, {0}, {}, "U");
  }
  if (name == "S") return s(0);
  throw std::invalid_argument("paper_gate: unknown gate '" + std::string(name) + "'");
}

inline constexpr std::size_t kTetraPrepGateCount = 11;

/// Four-qubit preparation of tetra2 from |0000>.
inline Circuit circuit_tetra_prep() {
  Circuit c(4);
  c.add(h(0))
      .add(paper_gate("U1").on({2}))
      .add(x(1, {0}))
      .add(paper_gate("U2").on({3}, {2}))
      .add(z(1, {2, 3}))
      .add(x(2))
      .add(x(3))
      .add(x(1, {2, 3}))
      .add(x(3))
      .add(h(3))
      .add(x(2, {3}));
  return c;
}

/// Readings of the two densely packed columns (fifth and sixth) of the six-qubit diagram.
enum class N6Reading {
  /// Toffoli (4,5 -> 2), plain H on 3; the dangling control column is dropped.
  SplitColumns,
  /// Plain H on 3, then the target on 2 joins the next column: X on 2 controlled by 3,4,5.
  MergedTarget,
  /// Toffoli (4,5 -> 2) and H on 3 controlled by 4,5.
  ControlledHadamard,
  /// Toffoli (4,5 -> 2), H on 3 controlled by 4,5, then X on 2 controlled by 3,4,5.
  ControlledHadamardMerged,
};

inline constexpr std::array<N6Reading, 4> kN6Readings = {N6Reading::SplitColumns, N6Reading::MergedTarget,
                                                         N6Reading::ControlledHadamard,
                                                         N6Reading::ControlledHadamardMerged};

inline std::string_view to_string(N6Reading r) {
  switch (r) {
    case N6Reading::SplitColumns: return "split-columns";
    case N6Reading::MergedTarget: return "merged-target";
    case N6Reading::ControlledHadamard: return "controlled-hadamard";
    case N6Reading::ControlledHadamardMerged: return "controlled-hadamard-merged";
  }
  return "?";
}

/// Highest-fidelity reading; see n6_prep_report.
inline constexpr N6Reading kDefaultN6Reading = N6Reading::ControlledHadamardMerged;

inline constexpr std::size_t kN6PrepGateCountDefault = 26;

/// Six-qubit preparation circuit for the balanced state, transcribed column by column.
inline Circuit circuit_n6_prep(N6Reading reading = kDefaultN6Reading) {
  Circuit c(6);
  c.add(h(0)).add(h(2)).add(paper_gate("U").on({4}));
  c.add(x(1, {0})).add(x(3, {2})).add(h(5, {4}));
  c.add(x(1, {2, 4, 5}));
  c.add(x(3, {2, 4, 5}));
  switch (reading) {
    case N6Reading::SplitColumns: c.add(x(2, {4, 5})).add(h(3)); break;
    case N6Reading::MergedTarget: c.add(h(3)).add(x(2, {3, 4, 5})); break;
    case N6Reading::ControlledHadamard: c.add(x(2, {4, 5})).add(h(3, {4, 5})); break;
    case N6Reading::ControlledHadamardMerged: c.add(x(2, {4, 5})).add(h(3, {4, 5})).add(x(2, {3, 4, 5})); break;
  }
  c.add(x(4));
  c.add(z(1, {2, 4, 5})).add(x(3, {2, 4, 5})).add(h(2, {4, 5})).add(x(3, {2, 4, 5}));
  c.add(x(4)).add(x(5));
  c.add(x(1, {2, 4, 5})).add(x(2, {4, 5})).add(z(1, {2, 4, 5})).add(h(3, {4, 5})).add(x(2, {3, 4, 5}));
  c.add(x(4)).add(h(5));
  c.add(x(4, {5}));
  return c;
}

/// Bell analyzer on two polarization qubits (0, 1) and two path qubits (2, 3); |u> = |0>, |d> = |1>.
inline Circuit circuit_bell_analyzer() {
  Circuit c(4);
  c.add(x(1, {0})).add(h(2)).add(x(3));
  c.add(h(0)).add(x(3, {2}));
  c.add(s(1, {0}));
  c.add(x(2, {0})).add(z(3, {1}));
  c.add(x(1));
  c.add(h(0, {1}));
  c.add(x(1));
  c.add(x(1, {0}));
  return c;
}

inline constexpr std::size_t kBellAnalyzerGateCount = 12;

// ---------------------------------------------------------------------------
// Diagnostics

struct PrepFidelity {
  std::string circuit;
  std::string reading;
  std::size_t gate_count = 0;
  double fidelity = 0.0;
  double norm_error = 0.0;
};

inline PrepFidelity tetra_prep_report() {
  const Circuit c = circuit_tetra_prep();
  const QubitState out = run_circuit(c, QubitState::basis(4, 0));
  return {"tetra_prep", "literal", c.gates.size(), fidelity(out, dicke_to_qubit(states::tetra2())),
          std::abs(out.amps().norm() - 1.0)};
}

/// Fidelity of every reading of the six-qubit circuit against the balanced state.
inline std::vector<PrepFidelity> n6_prep_report() {
  const QubitState target = dicke_to_qubit(states::balance());
  std::vector<PrepFidelity> out;
  for (N6Reading r : kN6Readings) {
    const Circuit c = circuit_n6_prep(r);
    const QubitState o = run_circuit(c, QubitState::basis(6, 0));
    out.push_back({"n6_prep", std::string(to_string(r)), c.gates.size(), fidelity(o, target),
                   std::abs(o.amps().norm() - 1.0)});
  }
  return out;
}

/// Input to the analyzer: X on the first photon of Bell state `label`, times |u d> on the paths.
inline QubitState analyzer_input(int label) {
  const QubitState b = bell_states().at(static_cast<std::size_t>(label));
  Circuit flip(2);
  flip.add(x(0));
  const CVector pol = run_circuit(flip, b).amps();
  CVector path = CVector::Zero(4);
  path(1) = 1.0;  // |u>|d> = |0>|1>
  CVector v(16);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) v(4 * i + k) = pol(i) * path(k);
  return QubitState(4, std::move(v));
}

struct AnalyzerRow {
  int label = 0;
  std::vector<double> distribution;  ///< 16 outcomes, index = 4-bit string with qubit 0 first
  std::vector<int> support;
};

struct AnalyzerOverlap {
  int a = 0, b = 0;
  double tvd = 0.0;
  std::vector<int> shared_outcomes;
};

struct AnalyzerReport {
  std::vector<AnalyzerRow> rows;         ///< labels 0, 1, 2, 3
  std::vector<AnalyzerOverlap> overlaps; ///< all six label pairs
  bool symmetric_disjoint = false;       ///< labels 0, 1, 3 pairwise TVD = 1
  bool antisymmetric_disjoint = false;   ///< label 2 disjoint from 0, 1, 3
};

inline constexpr double kSupportFloor = 1e-10;

inline AnalyzerReport analyzer_report() {
  const Circuit c = circuit_bell_analyzer();
  AnalyzerReport r;
  for (int l = 0; l < 4; ++l) {
    AnalyzerRow row;
    row.label = l;
    row.distribution = outcome_distribution(run_circuit(c, analyzer_input(l)));
    for (std::size_t k = 0; k < row.distribution.size(); ++k)
      if (row.distribution[k] > kSupportFloor) row.support.push_back(static_cast<int>(k));
    r.rows.push_back(std::move(row));
  }
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      AnalyzerOverlap o{a, b, 0.0, {}};
      for (std::size_t k = 0; k < 16; ++k) {
        const double pa = r.rows[a].distribution[k], pb = r.rows[b].distribution[k];
        o.tvd += 0.5 * std::abs(pa - pb);
        if (pa > kSupportFloor && pb > kSupportFloor) o.shared_outcomes.push_back(static_cast<int>(k));
      }
      r.overlaps.push_back(std::move(o));
    }
  }
  auto disjoint = [&](int a, int b) {
    for (const auto& o : r.overlaps)
      if ((o.a == a && o.b == b) || (o.a == b && o.b == a)) return std::abs(o.tvd - 1.0) <= 1e-10;
    return false;
  };
  r.symmetric_disjoint = disjoint(0, 1) && disjoint(0, 3) && disjoint(1, 3);
  r.antisymmetric_disjoint = disjoint(2, 0) && disjoint(2, 1) && disjoint(2, 3);
  return r;
}

inline std::string bitstring(int outcome, int n_bits) {
  std::string s(static_cast<std::size_t>(n_bits), '0');
  for (int q = 0; q < n_bits; ++q)
    if (outcome & (1 << (n_bits - 1 - q))) s[static_cast<std::size_t>(q)] = '1';
  return s;
}

struct GateIdentityCheck {
  std::string name;
  double error = 0.0;  ///< max-abs entry of the difference
};

inline constexpr double kGateIdentityTol = 1e-12;

/// H^2 = X^2 = Z^2 = I, S^2 = Z, CNOT^2 = I, and unitarity of the printed gates.
inline std::vector<GateIdentityCheck> gate_identity_checks() {
  auto sq = [](const Gate& g, int n) {
    Circuit c(n);
    c.add(g).add(g);
    return circuit_unitary(c);
  };
  auto dev = [](const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); };
  const CMatrix i2 = CMatrix::Identity(2, 2), i4 = CMatrix::Identity(4, 4);
  std::vector<GateIdentityCheck> out;
  out.push_back({"H^2 = I", dev(sq(h(0), 1), i2)});
  out.push_back({"X^2 = I", dev(sq(x(0), 1), i2)});
  out.push_back({"Z^2 = I", dev(sq(z(0), 1), i2)});
  out.push_back({"S^2 = Z", dev(sq(s(0), 1), gate_matrix(GateKind::Z))});
  out.push_back({"CNOT^2 = I", dev(sq(x(1, {0}), 2), i4)});
  for (const char* name : {"U1", "U2", "U"}) {
    const Mat2 m = paper_gate(name).matrix;
    out.push_back({std::string(name) + "^dagger " + name + " = I", dev(m.adjoint() * m, Mat2::Identity())});
  }
  return out;
}

}  // namespace rotosense
