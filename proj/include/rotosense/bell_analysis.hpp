#pragma once

// Bell-pair decomposition of symmetric polarization states.
//
// Labels: 0 = (HH+VV)/sqrt2, 1 = i(HV+VH)/sqrt2, 2 = -(HV-VH)/sqrt2 (singlet),
// 3 = i(HH-VV)/sqrt2. Only 0, 1 and 3 are symmetric under photon exchange.

#include "rotosense/measurement.hpp"
#include "rotosense/spin_core.hpp"
#include "rotosense/states.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rotosense {

using Pairing = std::vector<std::pair<int, int>>;

inline constexpr int kSingletLabel = 2;

/// (0,1), (2,3), ... for an even number of qubits.
inline Pairing default_pairing(int n_qubits) {
  if (n_qubits < 2 || n_qubits % 2 != 0) {
    throw std::invalid_argument("default_pairing: need an even number of qubits");
  }
  Pairing p;
  for (int q = 0; q < n_qubits; q += 2) p.emplace_back(q, q + 1);
  return p;
}

/// Amplitude of Bell state `label` on the two-qubit basis state 2*first + second.
inline std::array<std::array<cd, 4>, 4> bell_table() {
  const double r = 1.0 / std::sqrt(2.0);
  return {{{r, 0.0, 0.0, r},
           {0.0, cd{0.0, r}, cd{0.0, r}, 0.0},
           {0.0, -r, r, 0.0},
           {cd{0.0, r}, 0.0, 0.0, cd{0.0, -r}}}};
}

inline std::array<QubitState, 4> bell_states() {
  const auto t = bell_table();
  auto make = [&](int l) {
    CVector v(4);
    for (int c = 0; c < 4; ++c) v(c) = t[l][c];
    return QubitState(2, std::move(v));
  };
  return {make(0), make(1), make(2), make(3)};
}

/// Amplitudes <phi_l1 phi_l2 ... | psi> under a fixed qubit pairing.
///
/// Tuples are stored densely; the code of (l_1, ..., l_P) is sum_p l_p 4^(P-p),
/// so the first pair is the most significant base-4 digit.
class BellProductAmplitudes {
public:
  BellProductAmplitudes(Pairing pairing, std::vector<cd> amps) : pairing_(std::move(pairing)), amps_(std::move(amps)) {
    if (amps_.size() != (std::size_t{1} << (2 * pairing_.size()))) {
      throw std::invalid_argument("BellProductAmplitudes: need 4^n_pairs amplitudes");
    }
  }

  const Pairing& pairing() const { return pairing_; }
  int n_pairs() const { return static_cast<int>(pairing_.size()); }
  const std::vector<cd>& amps() const { return amps_; }

  std::size_t code(std::span<const int> labels) const {
    if (static_cast<int>(labels.size()) != n_pairs()) {
      throw std::invalid_argument("BellProductAmplitudes: label tuple has the wrong length");
    }
    std::size_t c = 0;
    for (int l : labels) {
      if (l < 0 || l > 3) throw std::invalid_argument("BellProductAmplitudes: labels must be in 0..3");
      c = 4 * c + static_cast<std::size_t>(l);
    }
    return c;
  }

  std::vector<int> labels(std::size_t code) const {
    std::vector<int> out(n_pairs());
    for (int p = n_pairs() - 1; p >= 0; --p) {
      out[p] = static_cast<int>(code % 4);
      code /= 4;
    }
    return out;
  }

  cd at(std::span<const int> labels) const { return amps_[code(labels)]; }
  cd at(std::initializer_list<int> labels) const {
    return at(std::span<const int>(labels.begin(), labels.size()));
  }
  double probability(std::initializer_list<int> labels) const { return std::norm(at(labels)); }

  /// "(l1,l2,...)"
  std::string key(std::size_t code) const {
    std::string s = "(";
    const auto l = labels(code);
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i) s += ',';
      s += static_cast<char>('0' + l[i]);
    }
    return s + ")";
  }

  double total_weight() const {
    double w = 0.0;
    for (const cd& a : amps_) w += std::norm(a);
    return w;
  }

  /// Probability on tuples containing at least one singlet.
  double singlet_weight() const {
    double w = 0.0;
    for (std::size_t c = 0; c < amps_.size(); ++c) {
      for (int l : labels(c)) {
        if (l == kSingletLabel) {
          w += std::norm(amps_[c]);
          break;
        }
      }
    }
    return w;
  }

private:
  Pairing pairing_;
  std::vector<cd> amps_;
};

namespace detail {

inline void validate_pairing(int n_qubits, const Pairing& pairing) {
  if (n_qubits % 2 != 0) {
    throw std::invalid_argument("bell_decompose: odd number of qubits");
  }
  if (static_cast<int>(pairing.size()) * 2 != n_qubits) {
    throw std::invalid_argument("bell_decompose: pairing must cover every qubit exactly once");
  }
  std::vector<bool> seen(n_qubits, false);
  for (const auto& [a, b] : pairing) {
    for (int q : {a, b}) {
      if (q < 0 || q >= n_qubits) throw std::invalid_argument("bell_decompose: pairing index out of range");
      if (seen[q]) throw std::invalid_argument("bell_decompose: pairing is not a perfect matching");
      seen[q] = true;
    }
  }
}

inline std::uint64_t bit_of(int n_qubits, int q) { return std::uint64_t{1} << (n_qubits - 1 - q); }

/// Applies the 4x4 map `m` to qubits (a, b) of `v` in place, with a as the high bit.
inline void apply_pair_map(std::vector<cd>& v, int n_qubits, int a, int b, const std::array<std::array<cd, 4>, 4>& m) {
  const std::uint64_t ba = bit_of(n_qubits, a), bb = bit_of(n_qubits, b);
  const std::uint64_t idx[4] = {0, bb, ba, ba | bb};
  for (std::uint64_t x = 0; x < v.size(); ++x) {
    if (x & (ba | bb)) continue;
    cd in[4], out[4];
    for (int c = 0; c < 4; ++c) in[c] = v[x | idx[c]];
    for (int r = 0; r < 4; ++r) {
      out[r] = 0.0;
      for (int c = 0; c < 4; ++c) out[r] += m[r][c] * in[c];
    }
    for (int c = 0; c < 4; ++c) v[x | idx[c]] = out[c];
  }
}

}  // namespace detail

/// Change of basis from the computational basis to products of Bell states.
inline BellProductAmplitudes bell_decompose(const QubitState& q, const Pairing& pairing) {
  detail::validate_pairing(q.n_qubits(), pairing);
  const int n = q.n_qubits();
  const auto table = bell_table();
  std::array<std::array<cd, 4>, 4> analysis{};  // row l = conj(phi_l)
  for (int l = 0; l < 4; ++l)
    for (int c = 0; c < 4; ++c) analysis[l][c] = std::conj(table[l][c]);

  std::vector<cd> work(q.amps().data(), q.amps().data() + q.dim());
  for (const auto& [a, b] : pairing) detail::apply_pair_map(work, n, a, b, analysis);

  const std::size_t n_pairs = pairing.size();
  std::vector<cd> amps(std::size_t{1} << (2 * n_pairs));
  for (std::size_t code = 0; code < amps.size(); ++code) {
    std::uint64_t x = 0;
    std::size_t rem = code;
    for (std::size_t p = n_pairs; p-- > 0;) {
      const int l = static_cast<int>(rem % 4);
      rem /= 4;
      if (l & 2) x |= detail::bit_of(n, pairing[p].first);
      if (l & 1) x |= detail::bit_of(n, pairing[p].second);
    }
    amps[code] = work[x];
  }
  return BellProductAmplitudes(pairing, std::move(amps));
}

inline BellProductAmplitudes bell_decompose(const QubitState& q) {
  return bell_decompose(q, default_pairing(q.n_qubits()));
}

/// Inverse of bell_decompose; returns the raw (unnormalized) amplitude vector.
inline CVector bell_reconstruct_amplitudes(const BellProductAmplitudes& bp) {
  const int n = 2 * bp.n_pairs();
  const auto table = bell_table();
  std::array<std::array<cd, 4>, 4> synthesis{};  // column l = phi_l
  for (int r = 0; r < 4; ++r)
    for (int l = 0; l < 4; ++l) synthesis[r][l] = table[l][r];

  std::vector<cd> work(std::size_t{1} << n);
  for (std::size_t code = 0; code < bp.amps().size(); ++code) {
    std::uint64_t x = 0;
    const auto labels = bp.labels(code);
    for (int p = 0; p < bp.n_pairs(); ++p) {
      if (labels[p] & 2) x |= detail::bit_of(n, bp.pairing()[p].first);
      if (labels[p] & 1) x |= detail::bit_of(n, bp.pairing()[p].second);
    }
    work[x] = bp.amps()[code];
  }
  for (const auto& [a, b] : bp.pairing()) detail::apply_pair_map(work, n, a, b, synthesis);
  return Eigen::Map<CVector>(work.data(), static_cast<Eigen::Index>(work.size()));
}

inline QubitState bell_reconstruct(const BellProductAmplitudes& bp) {
  return QubitState(2 * bp.n_pairs(), bell_reconstruct_amplitudes(bp));
}

/// Label tuples whose probabilities are summed into P0..P3.
struct AggregationGroups {
  int n_pairs = 0;
  std::array<std::vector<std::vector<int>>, 4> tuples;
};

/// Groups for N = 4 (two pairs) and N = 6 (three pairs).
///
/// For N = 6 the P2 group holds all seven tuples in the support of J_y psi_0:
/// the three permutations of (0,3,0), of (3,1,1), and (3,3,3).
inline AggregationGroups aggregation_groups(int n_photons) {
  AggregationGroups g;
  if (n_photons == 4) {
    g.n_pairs = 2;
    g.tuples[0] = {{0, 0}, {3, 3}, {1, 1}};
    g.tuples[1] = {{0, 1}, {1, 0}};
    g.tuples[2] = {{1, 3}, {3, 1}};
    g.tuples[3] = {{0, 3}, {3, 0}};
    return g;
  }
  if (n_photons == 6) {
    g.n_pairs = 3;
    g.tuples[0] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 3, 3}, {3, 1, 3}, {3, 3, 1}, {1, 1, 1}};
    g.tuples[1] = {{0, 0, 0}, {3, 3, 0}, {0, 3, 3}, {3, 0, 3}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    g.tuples[2] = {{0, 3, 0}, {3, 0, 0}, {0, 0, 3}, {3, 1, 1}, {1, 3, 1}, {1, 1, 3}, {3, 3, 3}};
    g.tuples[3] = {{0, 3, 1}, {3, 0, 1}, {1, 0, 3}, {1, 3, 0}, {0, 1, 3}, {3, 1, 0}};
    return g;
  }
  throw std::invalid_argument("aggregation_groups: only N = 4 and N = 6 are supported");
}

/// [P0, P1, P2, P3] from Bell-pair outcome probabilities.
inline std::array<double, 4> aggregate_probabilities(const BellProductAmplitudes& bp, int n_photons) {
  const AggregationGroups g = aggregation_groups(n_photons);
  if (bp.n_pairs() != g.n_pairs) {
    throw std::invalid_argument("aggregate_probabilities: expected " + std::to_string(g.n_pairs) + " pairs, got " +
                                std::to_string(bp.n_pairs()));
  }
  std::array<double, 4> out{};
  for (int mu = 0; mu < 4; ++mu) {
    for (const auto& t : g.tuples[mu]) out[mu] += std::norm(bp.at(std::span<const int>(t)));
  }
  return out;
}

/// Outcome probabilities of the Bell-pair readout, aggregated into [P0, P1, P2, P3, rest].
inline OutcomeDistribution bell_pipeline_probabilities(const SpinState& phi0, const RotationParams& p) {
  const QubitState q = dicke_to_qubit(rotate(phi0, p));
  const auto agg = aggregate_probabilities(bell_decompose(q), q.n_qubits());
  OutcomeDistribution d;
  d.params = p;
  double total = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    d.p[mu] = agg[mu];
    total += agg[mu];
  }
  d.p[kRestOutcome] = std::max(0.0, 1.0 - total);
  return d;
}

// ---------------------------------------------------------------------------
// Published Bell-product expansions and their numerical reconciliation.

struct BellTerm {
  std::string labels;  ///< e.g. "013"
  cd coeff;
};

struct PublishedExpansion {
  int n_photons;
  int index;  ///< psi_index
  std::vector<BellTerm> terms;
};

inline std::vector<PublishedExpansion> published_expansions() {
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0), r5 = std::sqrt(5.0), r6 = std::sqrt(6.0),
               r10 = std::sqrt(10.0);
  const cd i = kI;
  std::vector<PublishedExpansion> out;

  // N = 4
  out.push_back({4, 0, {{"00", 0.5 * (1.0 + i / r3)}, {"33", -0.5 * (1.0 - i / r3)}, {"11", -0.5 * (2.0 * i / r3)}}});
  out.push_back({4, 1, {{"01", -i / r2}, {"10", -i / r2}}});
  out.push_back({4, 2, {{"31", -1.0 / r2}, {"13", -1.0 / r2}}});
  out.push_back({4, 3, {{"03", -i / r2}, {"30", -i / r2}}});
  out.push_back({4, 4, {{"00", 0.5 * (1.0 - i / r3)}, {"33", -0.5 * (1.0 + i / r3)}, {"11", 0.5 * (2.0 * i / r3)}}});

  // N = 6
  {
    const cd c = -i / r6;
    out.push_back({6, 0, {{"001", c}, {"331", -c}, {"100", c}, {"133", -c}, {"010", c}, {"313", -c}}});
  }
  {
    const double c = 1.0 / (2.0 * r2);
    out.push_back({6, 1, {{"000", c * r3}, {"330", -c / r3}, {"033", -c / r3}, {"303", -c / r3},
                          {"011", -c * 2.0 / r3}, {"101", -c * 2.0 / r3}, {"110", -c * 2.0 / r3}}});
  }
  {
    const double c = 1.0 / r6;
    out.push_back({6, 2, {{"030", c}, {"300", c}, {"003", c}, {"311", -c}, {"131", -c}, {"113", -c}}});
  }
  {
    const double c = -1.0 / r6;
    out.push_back({6, 3, {{"031", c}, {"301", c}, {"103", c}, {"130", c}, {"013", c}, {"310", c}}});
  }
  {
    const cd c = -i / r10;
    out.push_back({6, 4, {{"001", c}, {"331", -c}, {"100", c}, {"133", -c}, {"010", c}, {"313", -c},
                          {"111", 2.0 * c}}});
  }
  {
    const double c = 1.0 / (2.0 * r2);
    out.push_back({6, 5, {{"000", c / r5}, {"330", -c * 3.0 / r5}, {"033", -c * 3.0 / r5}, {"303", -c * 3.0 / r5},
                          {"011", c * 2.0 / r5}, {"101", c * 2.0 / r5}, {"110", c * 2.0 / r5}}});
  }
  {
    const double c = 1.0 / (r2 * r5);
    out.push_back({6, 6, {{"030", c}, {"300", c}, {"003", c}, {"311", -c}, {"131", -c}, {"113", -c},
                          {"333", 2.0 * c}}});
  }
  return out;
}

inline BellProductAmplitudes expansion_amplitudes(const PublishedExpansion& e) {
  const int n_pairs = e.n_photons / 2;
  const Pairing pairing = default_pairing(e.n_photons);
  std::vector<cd> amps(std::size_t{1} << (2 * n_pairs));
  BellProductAmplitudes probe(pairing, amps);
  for (const BellTerm& t : e.terms) {
    std::vector<int> labels;
    for (char ch : t.labels) labels.push_back(ch - '0');
    amps[probe.code(labels)] += t.coeff;
  }
  return BellProductAmplitudes(pairing, std::move(amps));
}

struct DecompositionCheck {
  int n_photons = 0;
  int index = 0;
  /// "optimal_basis" for psi_0..psi_3, "complement" for the remaining symmetric states.
  std::string reference;
  double norm = 0.0;
  double symmetric_weight = 0.0;
  /// |<paper|truth>|^2 / <paper|paper>; for complement states, the weight inside
  /// the symmetric subspace orthogonal to psi_0..psi_3.
  double fidelity = 0.0;
  bool pass = false;
  std::vector<BellTerm> published;
  /// Bell coefficients of the reference state; filled only when the check fails.
  std::vector<BellTerm> recomputed;
};

struct DecompositionReport {
  std::vector<DecompositionCheck> checks;

  bool all_pass(int n_photons) const {
    for (const auto& c : checks)
      if (c.n_photons == n_photons && !c.pass) return false;
    return true;
  }
};

inline constexpr double kDecompositionFidelityTol = 1e-9;

namespace detail {

inline std::vector<BellTerm> nonzero_terms(const BellProductAmplitudes& bp, double floor = 1e-12) {
  std::vector<BellTerm> out;
  for (std::size_t c = 0; c < bp.amps().size(); ++c) {
    if (std::abs(bp.amps()[c]) <= floor) continue;
    std::string s;
    for (int l : bp.labels(c)) s += static_cast<char>('0' + l);
    out.push_back({s, bp.amps()[c]});
  }
  return out;
}

}  // namespace detail

/// Rebuilds every published expansion in the 2^N computational basis and compares it
/// with the directly computed optimal basis of tetra2 (N = 4) and balance (N = 6).
inline DecompositionReport verify_paper_decompositions() {
  DecompositionReport report;
  for (int n : {4, 6}) {
    const SpinState phi0 = n == 4 ? states::tetra2() : states::balance();
    const ProjectorBasis basis = optimal_basis(phi0);
    std::array<CVector, 4> truth;
    for (int mu = 0; mu < 4; ++mu) truth[mu] = dicke_to_qubit(basis.states[mu]).amps();
    // Orthonormal symmetric basis |J,m> embedded in qubit space.
    const Spin j = Spin::from_photons(n);
    std::vector<CVector> sym;
    for (int k = 0; k < j.dim(); ++k) sym.push_back(dicke_to_qubit(SpinState::basis(j, j.value() - k)).amps());

    for (const PublishedExpansion& e : published_expansions()) {
      if (e.n_photons != n) continue;
      DecompositionCheck c;
      c.n_photons = n;
      c.index = e.index;
      c.published = e.terms;
      const BellProductAmplitudes bp = expansion_amplitudes(e);
      const CVector v = bell_reconstruct_amplitudes(bp);
      const double n2 = v.squaredNorm();
      c.norm = std::sqrt(n2);
      double sym_w = 0.0;
      CVector sym_part = CVector::Zero(v.size());
      for (const CVector& s : sym) {
        const cd a = s.dot(v);
        sym_w += std::norm(a);
        sym_part += a * s;
      }
      c.symmetric_weight = sym_w / n2;
      CVector reference;
      if (e.index < 4) {
        c.reference = "optimal_basis";
        c.fidelity = std::norm(truth[e.index].dot(v)) / n2;
        reference = truth[e.index];
      } else {
        c.reference = "complement";
        CVector comp = sym_part;
        for (const CVector& t : truth) comp -= t.dot(v) * t;
        c.fidelity = comp.squaredNorm() / n2;
        if (comp.norm() > 1e-12) reference = comp / comp.norm();
      }
      c.pass = c.fidelity >= 1.0 - kDecompositionFidelityTol && std::abs(c.norm - 1.0) <= kDecompositionFidelityTol;
      if (!c.pass && reference.size() > 0) {
        c.recomputed = detail::nonzero_terms(bell_decompose(QubitState(n, reference)));
      }
      report.checks.push_back(std::move(c));
    }
  }
  return report;
}

}  // namespace rotosense
