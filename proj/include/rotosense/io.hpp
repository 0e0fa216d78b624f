#pragma once

// JSON and CSV serialization of states, circuits and reports.

#include "rotosense/bell_analysis.hpp"
#include "rotosense/circuit_sim.hpp"
#include "rotosense/estimation.hpp"
#include "rotosense/measurement.hpp"
#include "rotosense/metrology.hpp"
#include "rotosense/spin_core.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rotosense::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Primitives

inline json to_json(const cd& z) { return json::array({z.real(), z.imag()}); }

inline cd complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument("expected a complex number as [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

inline json to_json(const Mat3& m) {
  json out = json::array();
  for (int i = 0; i < 3; ++i) out.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
  return out;
}

inline json to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

inline CVector cvector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

inline json to_json(const RotationParams& p) {
  return {{"theta1", p.theta1}, {"theta2", p.theta2}, {"theta3", p.theta3}, {"u", to_json(axis(p))}};
}

// ---------------------------------------------------------------------------
// States

inline json to_json(const SpinState& s) { return {{"J", s.j()}, {"amps", to_json(s.amps())}}; }

inline json to_json(const QubitState& q) { return {{"n_qubits", q.n_qubits()}, {"amps", to_json(q.amps())}}; }

inline SpinState spin_state_from_json(const json& j) {
  if (!j.contains("J") || !j.contains("amps")) throw std::invalid_argument("spin state JSON needs \"J\" and \"amps\"");
  return SpinState(Spin::from_value(j.at("J").get<double>()), cvector_from_json(j.at("amps")));
}

inline QubitState qubit_state_from_json(const json& j) {
  if (!j.contains("n_qubits") || !j.contains("amps")) {
    throw std::invalid_argument("qubit state JSON needs \"n_qubits\" and \"amps\"");
  }
  return QubitState(j.at("n_qubits").get<int>(), cvector_from_json(j.at("amps")));
}

inline constexpr double kFileSymmetricLossTol = 1e-10;

/// Reads a spin state; a qubit state is accepted if it lies in the symmetric subspace.
inline SpinState any_state_from_json(const json& j) {
  if (j.contains("J")) return spin_state_from_json(j);
  if (j.contains("n_qubits")) {
    const QubitState q = qubit_state_from_json(j);
    const SymmetricProjection p = [&] {
      try {
        return qubit_to_dicke(q);
      } catch (const std::domain_error& e) {
        throw std::invalid_argument(e.what());
      }
    }();
    if (p.lost_weight > kFileSymmetricLossTol) {
      throw std::invalid_argument("qubit state is not permutation symmetric (lost weight " +
                                  std::to_string(p.lost_weight) + ")");
    }
    return p.state;
  }
  throw std::invalid_argument("state JSON needs a \"J\" or \"n_qubits\" field");
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Metrology

inline json to_json(const JExpectations& e) { return {{"mean", to_json(e.mean)}, {"cov", to_json(e.cov)}}; }

inline json to_json(const AnticoherenceReport& r) {
  return {{"pass", r.pass},
          {"tol", r.tol},
          {"deviations", {{"max_mean", r.max_mean}, {"max_diag_dev", r.max_diag_dev}, {"max_offdiag", r.max_offdiag}}},
          {"mean", to_json(r.moments.mean)},
          {"cov", to_json(r.moments.cov)}};
}

// ---------------------------------------------------------------------------
// Measurement

inline json to_json(const OutcomeDistribution& d) {
  return {{"params", to_json(d.params)}, {"P0", d.p[0]}, {"P1", d.p[1]}, {"P2", d.p[2]},
          {"P3", d.p[3]},               {"Prest", d.p[4]}};
}

inline json to_json(const SaturationReport& r) {
  json rows = json::array();
  for (int k = 0; k < 3; ++k) {
    rows.push_back({{"k", k + 1}, {"classical", r.classical[k]}, {"quantum", r.quantum[k]}, {"ratio", r.ratio[k]}});
  }
  return {{"params", to_json(r.params)}, {"components", rows}};
}

// ---------------------------------------------------------------------------
// Bell analysis

inline json pairing_to_json(const Pairing& p) {
  json out = json::array();
  for (const auto& [a, b] : p) out.push_back(json::array({a, b}));
  return out;
}

/// {"pairing": [[0,1],...], "amps": {"(0,1)": [re, im], ...}} with every tuple listed.
inline json to_json(const BellProductAmplitudes& bp) {
  json amps = json::object();
  for (std::size_t c = 0; c < bp.amps().size(); ++c) amps[bp.key(c)] = to_json(bp.amps()[c]);
  return {{"pairing", pairing_to_json(bp.pairing())}, {"amps", amps}};
}

inline BellProductAmplitudes bell_amplitudes_from_json(const json& j) {
  Pairing pairing;
  for (const json& pr : j.at("pairing")) pairing.emplace_back(pr.at(0).get<int>(), pr.at(1).get<int>());
  std::vector<cd> amps(std::size_t{1} << (2 * pairing.size()));
  BellProductAmplitudes probe(pairing, amps);
  for (const auto& [key, val] : j.at("amps").items()) {
    if (key.size() < 2 || key.front() != '(' || key.back() != ')') {
      throw std::invalid_argument("bad Bell tuple key " + key);
    }
    std::vector<int> labels;
    std::stringstream ss(key.substr(1, key.size() - 2));
    for (std::string tok; std::getline(ss, tok, ',');) labels.push_back(std::stoi(tok));
    amps[probe.code(labels)] = complex_from_json(val);
  }
  return BellProductAmplitudes(pairing, std::move(amps));
}

inline json to_json(const std::vector<BellTerm>& terms) {
  json out = json::object();
  for (const BellTerm& t : terms) {
    std::string key = "(";
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
      if (i) key += ',';
      key += t.labels[i];
    }
    out[key + ")"] = to_json(t.coeff);
  }
  return out;
}

inline json to_json(const DecompositionReport& r) {
  json checks = json::array();
  for (const DecompositionCheck& c : r.checks) {
    json e = {{"n_photons", c.n_photons}, {"index", c.index},       {"reference", c.reference},
              {"norm", c.norm},           {"symmetric_weight", c.symmetric_weight},
              {"fidelity", c.fidelity},   {"pass", c.pass},         {"published", to_json(c.published)}};
    if (!c.recomputed.empty()) e["recomputed"] = to_json(c.recomputed);
    checks.push_back(std::move(e));
  }
  return {{"all_pass_n4", r.all_pass(4)}, {"all_pass_n6", r.all_pass(6)}, {"checks", checks}};
}

// ---------------------------------------------------------------------------
// Circuits

inline json to_json(const Gate& g) {
  json out = {{"kind", std::string(to_string(g.kind))}, {"targets", g.targets}, {"controls", g.controls}};
  if (g.kind == GateKind::Custom) {
    out["label"] = g.label;
    json m = json::array();
    for (int r = 0; r < 2; ++r) m.push_back(json::array({to_json(g.matrix(r, 0)), to_json(g.matrix(r, 1))}));
    out["matrix"] = m;
  }
  return out;
}

inline json to_json(const Circuit& c) {
  json gates = json::array();
  for (const Gate& g : c.gates) gates.push_back(to_json(g));
  json out = {{"n_qubits", c.n_qubits}, {"gates", gates}};
  if (!c.measured.empty()) out["measured"] = c.measured;
  return out;
}

namespace detail {

inline std::vector<int> int_list(const json& g, const char* key) {
  if (!g.contains(key)) return {};
  const json& v = g.at(key);
  if (v.is_number_integer()) return {v.get<int>()};
  return v.get<std::vector<int>>();
}

}  // namespace detail

/// Parses {"n_qubits": n, "gates": [{"kind", "targets", "controls", "matrix"?}]}.
///
/// "kind" also accepts CNOT/CX/MCX/TOFFOLI (X with controls), CZ/MCZ, and the
/// named gates U1, U2, U, S from paper_gate.
inline Circuit circuit_from_json(const json& j) {
  if (!j.contains("n_qubits") || !j.contains("gates")) {
    throw std::invalid_argument("circuit JSON needs \"n_qubits\" and \"gates\"");
  }
  Circuit c(j.at("n_qubits").get<int>());
  for (const json& g : j.at("gates")) {
    const std::string kind = g.at("kind").get<std::string>();
    const std::vector<int> targets = detail::int_list(g, "targets");
    const std::vector<int> controls = detail::int_list(g, "controls");
    if (g.contains("matrix")) {
      const json& m = g.at("matrix");
      if (!m.is_array() || m.size() != 2 || m[0].size() != 2 || m[1].size() != 2) {
        throw std::invalid_argument("gate matrix must be 2x2");
      }
      Mat2 u;
      for (int r = 0; r < 2; ++r)
        for (int col = 0; col < 2; ++col) u(r, col) = complex_from_json(m[r][col]);
      c.add(Gate::custom(u, targets, controls, g.value("label", kind)));
    } else if (kind == "U1" || kind == "U2" || kind == "U") {
      c.add(paper_gate(kind).on(targets, controls));
    } else if (auto k = gate_kind_from_string(kind); k && *k != GateKind::Custom) {
      c.add(Gate::make(*k, targets, controls));
    } else {
      throw std::invalid_argument("unknown gate kind '" + kind + "'");
    }
  }
  if (j.contains("measured")) c.measured = j.at("measured").get<std::vector<int>>();
  return c;
}

inline json to_json(const PrepFidelity& p) {
  return {{"circuit", p.circuit},
          {"reading", p.reading},
          {"gate_count", p.gate_count},
          {"fidelity", p.fidelity},
          {"norm_error", p.norm_error}};
}

inline json to_json(const AnalyzerReport& r) {
  json rows = json::array();
  for (const AnalyzerRow& row : r.rows) {
    json dist = json::object();
    for (std::size_t k = 0; k < row.distribution.size(); ++k) {
      if (row.distribution[k] > kSupportFloor) dist[bitstring(static_cast<int>(k), 4)] = row.distribution[k];
    }
    json support = json::array();
    for (int k : row.support) support.push_back(bitstring(k, 4));
    rows.push_back({{"label", row.label}, {"support", support}, {"distribution", dist}});
  }
  json overlaps = json::array();
  for (const AnalyzerOverlap& o : r.overlaps) {
    json shared = json::array();
    for (int k : o.shared_outcomes) shared.push_back(bitstring(k, 4));
    overlaps.push_back({{"a", o.a}, {"b", o.b}, {"tvd", o.tvd}, {"shared_outcomes", shared}});
  }
  return {{"symmetric_disjoint", r.symmetric_disjoint},
          {"antisymmetric_disjoint", r.antisymmetric_disjoint},
          {"rows", rows},
          {"overlaps", overlaps}};
}

// ---------------------------------------------------------------------------
// Estimation

inline json to_json(const EstimateReport& e) {
  json out = {{"theta1_hat", e.theta1_hat}, {"n", e.n}, {"J", e.j.value()}, {"rest_folded", e.rest_folded}};
  out["u_hat_abs"] = e.u_hat_abs ? to_json(*e.u_hat_abs) : json(nullptr);
  return out;
}

inline json to_json(const QcrbReport& r) {
  return {{"pipeline", std::string(to_string(r.pipeline))},
          {"J", r.j.value()},
          {"params", to_json(r.params)},
          {"n", r.n},
          {"trials", r.trials},
          {"seed", r.seed},
          {"fisher", r.fisher},
          {"theta1_mean", r.theta1_mean},
          {"theta1_sigma", r.theta1_sigma},
          {"theta1_sigma_pred", r.theta1_sigma_pred},
          {"sigma_ratio", r.sigma_ratio},
          {"u_abs_true", to_json(r.u_abs_true)},
          {"u_mean", to_json(r.u_mean)},
          {"u_sigma", to_json(r.u_sigma)},
          {"degenerate_trials", r.degenerate_trials},
          {"rest_counts_folded", r.rest_counts},
          {"clamp_count", 0},
          {"sampled", to_json(r.sampled)},
          {"small_angle", to_json(r.small_angle)},
          {"max_probability_gap", r.max_probability_gap}};
}

// ---------------------------------------------------------------------------
// CSV

/// Fixed-format number rendering so CSV output is byte-identical across runs.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// trial, theta1_hat, u1_hat, u2_hat, u3_hat; the axis columns are empty for degenerate trials.
inline std::string estimates_csv(const QcrbReport& r) {
  std::string out = "trial,theta1_hat,u1_hat,u2_hat,u3_hat\n";
  for (const TrialEstimate& e : r.estimates) {
    out += std::to_string(e.trial) + ',' + num(e.theta1_hat);
    for (int i = 0; i < 3; ++i) out += ',' + (e.degenerate ? std::string() : num(e.u_hat_abs(i)));
    out += '\n';
  }
  return out;
}

inline std::string distribution_csv_header() { return "theta1,u1,u2,u3,P0,P1,P2,P3,Prest"; }

inline std::string distribution_csv_row(const OutcomeDistribution& d) {
  const Vec3 u = axis(d.params);
  std::string s = num(d.params.theta1) + ',' + num(u(0)) + ',' + num(u(1)) + ',' + num(u(2));
  for (double p : d.p) s += ',' + num(p);
  return s;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace rotosense::io
