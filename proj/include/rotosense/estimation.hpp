#pragma once

// Monte Carlo estimation of small rotations from multinomial outcome counts.

#include "rotosense/bell_analysis.hpp"
#include "rotosense/measurement.hpp"
#include "rotosense/metrology.hpp"
#include "rotosense/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace rotosense {

// ---------------------------------------------------------------------------
// Random streams
//
// Every draw comes from a std::mt19937_64 seeded by hashing (seed, stream ids)
// with splitmix64, so a trial's outcome depends only on (seed, trial) and not
// on the order or thread in which trials run.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xD6E8FEB86659FD93ULL));
}

using Engine = std::mt19937_64;

/// Multinomial draw by sequential conditional binomials.
///
/// Category i draws from its own engine seeded with derive_seed(stream, i), so two
/// distributions with nearly equal probabilities sampled on the same stream give
/// strongly correlated counts.
inline std::vector<std::uint64_t> sample_multinomial(std::span<const double> probs, std::uint64_t n,
                                                     std::uint64_t stream) {
  std::vector<std::uint64_t> counts(probs.size(), 0);
  if (probs.empty()) return counts;
  double mass = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("sample_multinomial: invalid probability");
    mass += p;
  }
  if (!(mass > 0.0)) throw std::invalid_argument("sample_multinomial: probabilities sum to zero");
  std::uint64_t remaining = n;
  double remaining_mass = mass;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double q = remaining_mass > 0.0 ? std::clamp(probs[i] / remaining_mass, 0.0, 1.0) : 0.0;
    std::uint64_t c = 0;
    if (q >= 1.0) {
      c = remaining;
    } else if (q > 0.0) {
      Engine eng(derive_seed(stream, i));
      std::binomial_distribution<std::uint64_t> bin(remaining, q);
      c = bin(eng);
    }
    counts[i] = c;
    remaining -= c;
    remaining_mass -= probs[i];
  }
  counts.back() += remaining;
  return counts;
}

struct OutcomeCounts {
  std::vector<std::uint64_t> counts;  ///< aligned with OutcomeDistribution::p
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

inline void validate_distribution(const OutcomeDistribution& d) {
  double total = 0.0;
  for (double p : d.p) {
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) throw std::invalid_argument("outcome distribution entry outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("outcome distribution does not sum to 1");
}

inline OutcomeCounts sample_outcomes(const OutcomeDistribution& dist, std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_outcomes: n must be at least 1");
  validate_distribution(dist);
  std::array<double, 5> p{};
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::max(0.0, dist.p[i]);
  return {sample_multinomial(p, n, seed), n, seed};
}

// ---------------------------------------------------------------------------
// Estimator

struct EstimateReport {
  double theta1_hat = 0.0;
  /// |u_i| estimates; empty when every count landed in the P0 outcome.
  std::optional<Vec3> u_hat_abs;
  std::uint64_t n = 0;
  Spin j;
  /// Counts in the P_rest outcome, folded into P0.
  std::uint64_t rest_folded = 0;

  bool degenerate() const { return !u_hat_abs.has_value(); }
};

/// |theta1| = sqrt((1 - P0) * 3 / (J(J+1))) and |u_i| = sqrt(P_i / (1 - P0)).
///
/// P_rest counts are added to P0 before inversion, so the |u_i| always satisfy
/// sum u_i^2 = 1.
inline EstimateReport estimate_params(const OutcomeCounts& c, Spin j) {
  if (c.counts.size() != 5) throw std::invalid_argument("estimate_params: expected 5 outcome categories");
  std::uint64_t total = 0;
  for (auto v : c.counts) total += v;
  if (total != c.n || c.n == 0) throw std::invalid_argument("estimate_params: counts do not sum to n");
  if (j.casimir() <= 0.0) throw std::invalid_argument("estimate_params: J must be positive");
  EstimateReport r;
  r.n = c.n;
  r.j = j;
  r.rest_folded = c.counts[kRestOutcome];
  const double n = static_cast<double>(c.n);
  const std::uint64_t off = c.counts[1] + c.counts[2] + c.counts[3];
  const double one_minus_p0 = static_cast<double>(off) / n;
  r.theta1_hat = std::sqrt(one_minus_p0 * 3.0 / j.casimir());
  if (off > 0) {
    Vec3 u;
    for (int i = 0; i < 3; ++i) u(i) = std::sqrt(static_cast<double>(c.counts[i + 1]) / static_cast<double>(off));
    r.u_hat_abs = u;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Multinomial moments

struct MultinomialStats {
  std::uint64_t n = 0;
  std::vector<double> p;
  std::vector<double> var;  ///< n p_i (1 - p_i)
  Eigen::MatrixXd cov;      ///< off-diagonal -n p_i p_j, diagonal = var

  /// Var(sum_i a_i chi_i) = sum a_i^2 Var(chi_i) + 2 sum_{i<j} a_i a_j Cov(chi_i, chi_j).
  double var_linear(std::span<const double> a) const {
    if (a.size() != p.size()) throw std::invalid_argument("var_linear: coefficient count mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      v += a[i] * a[i] * var[i];
      for (std::size_t k = i + 1; k < p.size(); ++k) v += 2.0 * a[i] * a[k] * cov(i, k);
    }
    return v;
  }

  /// Var(sum_{i in S} chi_i) = n (sum_S p_i)(1 - sum_S p_i).
  double var_sum(std::span<const std::size_t> subset) const {
    double s = 0.0;
    for (std::size_t i : subset) s += p.at(i);
    return static_cast<double>(n) * s * (1.0 - s);
  }
};

inline MultinomialStats multinomial_stats(std::span<const double> probs, std::uint64_t n) {
  MultinomialStats st;
  st.n = n;
  st.p.assign(probs.begin(), probs.end());
  const std::size_t k = st.p.size();
  const double nd = static_cast<double>(n);
  st.var.resize(k);
  st.cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    st.var[i] = nd * st.p[i] * (1.0 - st.p[i]);
    for (std::size_t j = 0; j < k; ++j) {
      st.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          i == j ? st.var[i] : -nd * st.p[i] * st.p[j];
    }
  }
  return st;
}

inline MultinomialStats multinomial_stats(const OutcomeDistribution& d, std::uint64_t n) {
  validate_distribution(d);
  return multinomial_stats(std::span<const double>(d.p), n);
}

// ---------------------------------------------------------------------------
// Bell-pair readout sampling

/// Bell-tuple probabilities grouped into the aggregated outcomes.
struct BellOutcomeModel {
  int n_photons = 0;
  std::vector<double> tuple_probs;                 ///< indexed by tuple code
  std::array<std::vector<std::size_t>, 5> members; ///< tuple codes per outcome; [4] holds every ungrouped tuple
  std::array<double, 5> group_probs{};
};

inline BellOutcomeModel bell_outcome_model(const SpinState& phi0, const RotationParams& p) {
  const QubitState q = dicke_to_qubit(rotate(phi0, p));
  const BellProductAmplitudes bp = bell_decompose(q);
  const AggregationGroups g = aggregation_groups(q.n_qubits());
  BellOutcomeModel m;
  m.n_photons = q.n_qubits();
  m.tuple_probs.resize(bp.amps().size());
  std::vector<int> owner(bp.amps().size(), 4);
  for (int mu = 0; mu < 4; ++mu)
    for (const auto& t : g.tuples[mu]) owner[bp.code(t)] = mu;
  for (std::size_t c = 0; c < bp.amps().size(); ++c) {
    m.tuple_probs[c] = std::norm(bp.amps()[c]);
    m.members[owner[c]].push_back(c);
    m.group_probs[owner[c]] += m.tuple_probs[c];
  }
  return m;
}

struct BellCounts {
  std::vector<std::uint64_t> tuple_counts;
  OutcomeCounts aggregated;
};

/// Samples Bell-tuple outcomes: first the five aggregated outcomes, then the tuples within each.
inline BellCounts sample_bell_outcomes(const BellOutcomeModel& m, std::uint64_t n, std::uint64_t stream) {
  BellCounts out;
  out.aggregated = {sample_multinomial(m.group_probs, n, stream), n, stream};
  out.tuple_counts.assign(m.tuple_probs.size(), 0);
  for (std::size_t g = 0; g < 5; ++g) {
    const std::uint64_t cg = out.aggregated.counts[g];
    if (cg == 0 || m.members[g].empty()) continue;
    std::vector<double> sub;
    for (std::size_t code : m.members[g]) sub.push_back(m.tuple_probs[code]);
    double mass = 0.0;
    for (double v : sub) mass += v;
    if (!(mass > 0.0)) continue;
    const auto sc = sample_multinomial(sub, cg, derive_seed(stream, 0xBE11ULL, g));
    for (std::size_t i = 0; i < sc.size(); ++i) out.tuple_counts[m.members[g][i]] = sc[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// QCRB experiment

enum class Pipeline { Optimal, Bell };

inline std::string_view to_string(Pipeline p) { return p == Pipeline::Optimal ? "optimal" : "bell"; }

inline std::optional<Pipeline> pipeline_from_string(std::string_view s) {
  if (s == "optimal") return Pipeline::Optimal;
  if (s == "bell") return Pipeline::Bell;
  return std::nullopt;
}

inline constexpr double kSmallAngleValidity = 0.05;
inline constexpr std::size_t kMinTrials = 100;

struct TrialEstimate {
  std::size_t trial = 0;
  double theta1_hat = 0.0;
  Vec3 u_hat_abs = Vec3::Zero();
  bool degenerate = false;
};

struct QcrbReport {
  Pipeline pipeline = Pipeline::Optimal;
  Spin j;
  RotationParams params;
  std::uint64_t n = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  double fisher = 0.0;            ///< 4 J(J+1)/3
  double theta1_mean = 0.0;
  double theta1_sigma = 0.0;      ///< sample standard deviation over trials
  double theta1_sigma_pred = 0.0; ///< 1 / sqrt(n F)
  double sigma_ratio = 0.0;
  Vec3 u_abs_true = Vec3::Zero();
  Vec3 u_mean = Vec3::Zero();
  Vec3 u_sigma = Vec3::Zero();
  std::size_t degenerate_trials = 0;
  std::uint64_t rest_counts = 0;  ///< total P_rest counts folded into P0

  OutcomeDistribution sampled;    ///< distribution the counts were drawn from
  OutcomeDistribution small_angle;
  double max_probability_gap = 0.0;  ///< max_mu |P_mu(sampled) - P_mu(small angle)|

  std::vector<TrialEstimate> estimates;
};

namespace detail {

/// Pairwise summation; the result does not depend on how the work was split across threads.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

inline std::pair<double, double> mean_and_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  return {mean, std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Thread count from ROTOSENSE_THREADS, else the hardware concurrency.
inline unsigned default_thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ROTOSENSE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return std::min<unsigned>(static_cast<unsigned>(v), std::max(hw, static_cast<unsigned>(v)));
  }
  return hw;
}

/// Runs `trials` independent experiments of n shots and compares the spread of
/// theta1_hat with the bound 1 / sqrt(n * 4J(J+1)/3).
///
/// Trial t samples from stream derive_seed(seed, t); both pipelines draw the
/// aggregated outcomes in the same order, so their estimates are paired.
inline QcrbReport qcrb_experiment(const SpinState& phi0, const RotationParams& params, std::uint64_t n,
                                  std::size_t trials, std::uint64_t seed, Pipeline pipeline, unsigned threads = 0) {
  if (trials < kMinTrials) {
    throw std::invalid_argument("qcrb_experiment: need at least " + std::to_string(kMinTrials) + " trials");
  }
  if (n < 1) throw std::invalid_argument("qcrb_experiment: n must be at least 1");
  const ProjectorBasis basis = optimal_basis(phi0);

  QcrbReport r;
  r.pipeline = pipeline;
  r.j = phi0.spin();
  r.params = params;
  r.n = n;
  r.trials = trials;
  r.seed = seed;
  r.fisher = anticoherent_fisher(phi0.spin());
  r.theta1_sigma_pred = 1.0 / std::sqrt(static_cast<double>(n) * r.fisher);
  r.u_abs_true = axis(params).cwiseAbs();
  r.small_angle = small_angle_probabilities(phi0.spin(), params.theta1, axis(params));

  std::optional<BellOutcomeModel> bell;
  if (pipeline == Pipeline::Optimal) {
    r.sampled = exact_probabilities(phi0, basis, params);
  } else {
    bell = bell_outcome_model(phi0, params);
    r.sampled.params = params;
    r.sampled.p = bell->group_probs;
  }
  for (std::size_t mu = 0; mu < 4; ++mu)
    r.max_probability_gap = std::max(r.max_probability_gap, std::abs(r.sampled.p[mu] - r.small_angle.p[mu]));

  r.estimates.resize(trials);
  std::vector<std::uint64_t> rest(trials, 0);
  auto run_trial = [&](std::size_t t) {
    const std::uint64_t stream = derive_seed(seed, t);
    OutcomeCounts counts = pipeline == Pipeline::Optimal ? sample_outcomes(r.sampled, n, stream)
                                                         : sample_bell_outcomes(*bell, n, stream).aggregated;
    const EstimateReport e = estimate_params(counts, phi0.spin());
    TrialEstimate& out = r.estimates[t];
    out.trial = t;
    out.theta1_hat = e.theta1_hat;
    out.degenerate = e.degenerate();
    if (e.u_hat_abs) out.u_hat_abs = *e.u_hat_abs;
    rest[t] = e.rest_folded;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads == 0 ? default_thread_count() : threads,
                                                           static_cast<unsigned>(trials)));
  if (workers == 1) {
    for (std::size_t t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < trials; t += workers) run_trial(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<double> th;
  std::array<std::vector<double>, 3> us;
  for (const TrialEstimate& e : r.estimates) {
    th.push_back(e.theta1_hat);
    if (e.degenerate) {
      ++r.degenerate_trials;
      continue;
    }
    for (int i = 0; i < 3; ++i) us[i].push_back(e.u_hat_abs(i));
  }
  for (auto v : rest) r.rest_counts += v;
  std::tie(r.theta1_mean, r.theta1_sigma) = detail::mean_and_sd(th);
  r.sigma_ratio = r.theta1_sigma / r.theta1_sigma_pred;
  for (int i = 0; i < 3; ++i) std::tie(r.u_mean(i), r.u_sigma(i)) = detail::mean_and_sd(us[i]);
  return r;
}

}  // namespace rotosense
