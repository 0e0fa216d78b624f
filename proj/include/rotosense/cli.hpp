#pragma once

// Command-line front end: fisher, probabilities, circuit-verify, estimate, decompose.

#include "rotosense/rotosense.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rotosense::cli {

using io::json;

inline constexpr double kThetaWarnThreshold = 0.05;

struct RunConfig {
  std::string command;
  std::string state;  ///< empty means tetra2, or no target for circuit-verify
  double theta1 = 0.05;
  double theta2 = 0.0;
  double theta3 = 0.0;
  std::uint64_t n = 1000000;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  std::string pipeline = "both";
  std::string circuit;
  std::vector<double> grid = {0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
  unsigned threads = 0;

  RotationParams params() const { return {theta1, theta2, theta3}; }
};

/// Resolves tetra1 / tetra2 / balance or file:path.
inline SpinState resolve_state(std::string selector) {
  if (selector.empty()) selector = "tetra2";
  if (auto s = states::by_name(selector)) return *s;
  if (selector.rfind("file:", 0) == 0) return io::any_state_from_json(io::read_json_file(selector.substr(5)));
  throw std::invalid_argument("unknown state '" + selector + "' (use tetra1, tetra2, balance or file:PATH)");
}

inline std::string state_label(const RunConfig& cfg) { return cfg.state.empty() ? "tetra2" : cfg.state; }

// ---------------------------------------------------------------------------
// Commands. Each returns the text written to the output.

inline std::string cmd_fisher(const RunConfig& cfg) {
  if (cfg.format != "json") throw std::invalid_argument("fisher supports --format json only");
  const SpinState s = resolve_state(cfg.state);
  const RotationParams p = cfg.params();
  const AnticoherenceReport ac = anticoherence_report(s, 1e-12);
  json single = json::object();
  single["x"] = fisher_single(s, Vec3::UnitX());
  single["y"] = fisher_single(s, Vec3::UnitY());
  single["z"] = fisher_single(s, Vec3::UnitZ());
  single["u"] = fisher_single(s, axis(p));
  const Mat3 q = qfi_matrix(s, p);
  json out = {{"command", "fisher"},
              {"state", state_label(cfg)},
              {"J", s.j()},
              {"params", io::to_json(p)},
              {"anticoherence", io::to_json(ac)},
              {"fisher_single", single},
              {"anticoherent_bound", anticoherent_fisher(s.spin())},
              {"qfi", io::to_json(q)},
              {"Q11", q(0, 0)}};
  if (ac.pass) out["saturation"] = io::to_json(multiparam_saturation_check(s, p));
  return out.dump(2) + "\n";
}

inline std::string cmd_probabilities(const RunConfig& cfg) {
  const SpinState s = resolve_state(cfg.state);
  const ProjectorBasis basis = optimal_basis(s);
  const bool has_bell = s.spin().photons() == 4 || s.spin().photons() == 6;
  const Vec3 u = axis(cfg.params());

  json rows = json::array();
  std::string csv = io::distribution_csv_header() + ",SA_P0,SA_P1,SA_P2,SA_P3,Bell_P0,Bell_P1,Bell_P2,Bell_P3,gap\n";
  for (double t : cfg.grid) {
    const RotationParams p{t, cfg.theta2, cfg.theta3};
    const OutcomeDistribution exact = exact_probabilities(s, basis, p);
    std::optional<OutcomeDistribution> small;
    try {
      small = small_angle_probabilities(s.spin(), t, u);
    } catch (const std::domain_error&) {
    }
    std::optional<OutcomeDistribution> bell;
    if (has_bell) bell = bell_pipeline_probabilities(s, p);
    double gap = 0.0, bell_gap = 0.0;
    for (std::size_t mu = 0; mu < 4; ++mu) {
      if (small) gap = std::max(gap, std::abs(exact.p[mu] - small->p[mu]));
      if (bell) bell_gap = std::max(bell_gap, std::abs(exact.p[mu] - bell->p[mu]));
    }
    json row = {{"theta1", t}, {"u", io::to_json(u)}, {"exact", io::to_json(exact)}};
    row["small_angle"] = small ? io::to_json(*small) : json(nullptr);
    row["bell"] = bell ? io::to_json(*bell) : json(nullptr);
    row["gap"] = small ? json(gap) : json(nullptr);
    row["bell_gap"] = bell ? json(bell_gap) : json(nullptr);
    rows.push_back(std::move(row));

    csv += io::distribution_csv_row(exact);
    for (std::size_t mu = 0; mu < 4; ++mu) csv += ',' + (small ? io::num(small->p[mu]) : std::string());
    for (std::size_t mu = 0; mu < 4; ++mu) csv += ',' + (bell ? io::num(bell->p[mu]) : std::string());
    csv += ',' + (small ? io::num(gap) : std::string()) + '\n';
  }
  if (cfg.format == "csv") return csv;
  json out = {{"command", "probabilities"}, {"state", state_label(cfg)}, {"J", s.j()}, {"rows", rows}};
  if (has_bell) out["pairing"] = io::pairing_to_json(default_pairing(s.spin().photons()));
  return out.dump(2) + "\n";
}

inline std::string cmd_circuit_verify(const RunConfig& cfg) {
  if (cfg.format != "json") throw std::invalid_argument("circuit-verify supports --format json only");
  json out = {{"command", "circuit-verify"}};
  if (!cfg.circuit.empty()) {
    const Circuit c = io::circuit_from_json(io::read_json_file(cfg.circuit));
    const QubitState result = run_circuit(c, QubitState::basis(c.n_qubits, 0));
    json dist = json::object();
    const auto p = outcome_distribution(result, c.measured);
    const int bits = c.measured.empty() ? c.n_qubits : static_cast<int>(c.measured.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] > kSupportFloor) dist[bitstring(static_cast<int>(k), bits)] = p[k];
    }
    out["circuit"] = {{"path", cfg.circuit}, {"n_qubits", c.n_qubits}, {"gate_count", c.gates.size()},
                      {"norm_error", std::abs(result.amps().norm() - 1.0)}, {"output", io::to_json(result)},
                      {"distribution", dist}};
    if (!cfg.state.empty()) {
      const SpinState target = resolve_state(cfg.state);
      if (target.spin().photons() != c.n_qubits) {
        throw std::invalid_argument("target state has " + std::to_string(target.spin().photons()) +
                                    " photons but the circuit has " + std::to_string(c.n_qubits) + " qubits");
      }
      out["circuit"]["target"] = cfg.state;
      out["circuit"]["fidelity"] = fidelity(result, dicke_to_qubit(target));
    }
    return out.dump(2) + "\n";
  }
  json ids = json::array();
  bool ids_pass = true;
  for (const auto& g : gate_identity_checks()) {
    ids.push_back({{"identity", g.name}, {"error", g.error}, {"pass", g.error <= kGateIdentityTol}});
    ids_pass = ids_pass && g.error <= kGateIdentityTol;
  }
  json n6 = json::array();
  for (const auto& r : n6_prep_report()) n6.push_back(io::to_json(r));
  out["gate_identities"] = {{"pass", ids_pass}, {"tol", kGateIdentityTol}, {"checks", ids}};
  out["tetra_prep"] = io::to_json(tetra_prep_report());
  out["n6_prep"] = {{"default_reading", std::string(to_string(kDefaultN6Reading))}, {"readings", n6}};
  out["bell_analyzer"] = io::to_json(analyzer_report());
  return out.dump(2) + "\n";
}

inline std::string cmd_estimate(const RunConfig& cfg) {
  const SpinState s = resolve_state(cfg.state);
  std::vector<Pipeline> pipes;
  if (cfg.pipeline == "both") {
    pipes = {Pipeline::Optimal, Pipeline::Bell};
  } else if (auto p = pipeline_from_string(cfg.pipeline)) {
    pipes = {*p};
  } else {
    throw std::invalid_argument("unknown pipeline '" + cfg.pipeline + "' (use optimal, bell or both)");
  }
  if (cfg.format == "csv" && pipes.size() != 1) {
    throw std::invalid_argument("csv output needs a single --pipeline (optimal or bell)");
  }
  std::vector<QcrbReport> reports;
  for (Pipeline p : pipes) reports.push_back(qcrb_experiment(s, cfg.params(), cfg.n, cfg.trials, cfg.seed, p, cfg.threads));
  if (cfg.format == "csv") return io::estimates_csv(reports.front());
  json out = {{"command", "estimate"}, {"state", state_label(cfg)}};
  json reps = json::array();
  for (const auto& r : reports) reps.push_back(io::to_json(r));
  out["reports"] = reps;
  if (reports.size() == 2) {
    out["bell_over_optimal_sigma"] = reports[1].theta1_sigma / reports[0].theta1_sigma;
  }
  return out.dump(2) + "\n";
}

inline std::string cmd_decompose(const RunConfig& cfg) {
  const SpinState s = resolve_state(cfg.state);
  const int n = s.spin().photons();
  const QubitState q = dicke_to_qubit(rotate(s, cfg.params()));
  const BellProductAmplitudes bp = bell_decompose(q);
  if (cfg.format == "csv") {
    std::string csv = "tuple,re,im,prob\n";
    for (std::size_t c = 0; c < bp.amps().size(); ++c) {
      csv += '"' + bp.key(c) + "\"," + io::num(bp.amps()[c].real()) + ',' + io::num(bp.amps()[c].imag()) + ',' +
             io::num(std::norm(bp.amps()[c])) + '\n';
    }
    return csv;
  }
  json out = {{"command", "decompose"},
              {"state", state_label(cfg)},
              {"params", io::to_json(cfg.params())},
              {"bell", io::to_json(bp)},
              {"singlet_weight", bp.singlet_weight()}};
  if (n == 4 || n == 6) {
    const auto agg = aggregate_probabilities(bp, n);
    out["aggregated"] = {{"P0", agg[0]}, {"P1", agg[1]}, {"P2", agg[2]}, {"P3", agg[3]}};
  }
  out["published_check"] = io::to_json(verify_paper_decompositions());
  return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

inline void print_error(std::ostream& err, const std::string& msg) {
  err << json{{"error", one_line(msg)}}.dump() << "\n";
}

}  // namespace detail

/// Parses argv, runs the command and writes to --out or `out`. Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string config_path;
  CLI::App app{"rotation sensing with anti-coherent spin states", "rotosense"};
  app.add_option("command", cfg.command, "fisher | probabilities | circuit-verify | estimate | decompose")
      ->required()
      ->check(CLI::IsMember({"fisher", "probabilities", "circuit-verify", "estimate", "decompose"}));
  auto* o_state = app.add_option("--state", cfg.state, "tetra1, tetra2, balance or file:PATH");
  auto* o_t1 = app.add_option("--theta1", cfg.theta1, "rotation angle (rad)");
  auto* o_t2 = app.add_option("--theta2", cfg.theta2, "axis polar angle (rad)");
  auto* o_t3 = app.add_option("--theta3", cfg.theta3, "axis azimuth (rad)");
  auto* o_n = app.add_option("--n", cfg.n, "shots per trial")->check(CLI::PositiveNumber);
  auto* o_trials = app.add_option("--trials", cfg.trials, "Monte Carlo trials");
  auto* o_seed = app.add_option("--seed", cfg.seed, "RNG seed");
  auto* o_out = app.add_option("--out", cfg.out, "output file (default stdout)");
  auto* o_fmt = app.add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  auto* o_pipe = app.add_option("--pipeline", cfg.pipeline, "optimal, bell or both");
  auto* o_circ = app.add_option("--circuit", cfg.circuit, "circuit JSON file for circuit-verify");
  auto* o_grid = app.add_option("--grid", cfg.grid, "theta1 values for probabilities")->delimiter(',');
  auto* o_threads = app.add_option("--threads", cfg.threads, "worker threads (default ROTOSENSE_THREADS or all)");
  app.add_option("--config", config_path, "JSON file with the same keys; flags take precedence");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    detail::print_error(err, e.what());
    return 2;
  }

  try {
    if (!config_path.empty()) {
      const json c = io::read_json_file(config_path);
      auto take = [&](CLI::Option* opt, const char* key, auto& field) {
        if (opt->count() == 0 && c.contains(key)) c.at(key).get_to(field);
      };
      take(o_state, "state", cfg.state);
      take(o_t1, "theta1", cfg.theta1);
      take(o_t2, "theta2", cfg.theta2);
      take(o_t3, "theta3", cfg.theta3);
      take(o_n, "n", cfg.n);
      take(o_trials, "trials", cfg.trials);
      take(o_seed, "seed", cfg.seed);
      take(o_out, "out", cfg.out);
      take(o_fmt, "format", cfg.format);
      take(o_pipe, "pipeline", cfg.pipeline);
      take(o_circ, "circuit", cfg.circuit);
      take(o_grid, "grid", cfg.grid);
      take(o_threads, "threads", cfg.threads);
      if (cfg.format != "json" && cfg.format != "csv") throw std::invalid_argument("format must be json or csv");
    }
    if (cfg.theta1 > kThetaWarnThreshold && cfg.command != "probabilities") {
      err << "warning: theta1 = " << cfg.theta1 << " exceeds the small-angle validity threshold "
          << kThetaWarnThreshold << "\n";
    }

    std::string text;
    if (cfg.command == "fisher") text = cmd_fisher(cfg);
    else if (cfg.command == "probabilities") text = cmd_probabilities(cfg);
    else if (cfg.command == "circuit-verify") text = cmd_circuit_verify(cfg);
    else if (cfg.command == "estimate") text = cmd_estimate(cfg);
    else text = cmd_decompose(cfg);

    if (cfg.out.empty()) out << text;
    else io::write_text(cfg.out, text);
    return 0;
  } catch (const std::exception& e) {
    detail::print_error(err, e.what());
    return 1;
  }
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace rotosense::cli
