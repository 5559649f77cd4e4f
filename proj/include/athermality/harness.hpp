#pragma once

// Seeded randomized verification suites. Every trial draws from its own
// RngStream(master_seed, stream_index_for(check_name, trial)), so a report is
// a pure function of the config no matter how trials are scheduled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "channels.hpp"
#include "divergences.hpp"
#include "parallel.hpp"
#include "thermo.hpp"

namespace athermality {

enum class ChannelPool { Stinespring, Depolarizing, Unitary, Mixed };

inline std::string to_string(ChannelPool p) {
  switch (p) {
    case ChannelPool::Stinespring: return "stinespring";
    case ChannelPool::Depolarizing: return "depolarizing";
    case ChannelPool::Unitary: return "unitary";
    case ChannelPool::Mixed: return "mixed";
  }
  return "unknown";
}

inline ChannelPool channel_pool_from_string(const std::string& s) {
  for (ChannelPool p : {ChannelPool::Stinespring, ChannelPool::Depolarizing, ChannelPool::Unitary, ChannelPool::Mixed})
    if (to_string(p) == s) return p;
  throw ConfigError("unknown channel pool '" + s + "'");
}

struct HarnessConfig {
  std::uint64_t master_seed = 0;
  int trials = 500;
  std::vector<int> dims{2, 3};
  double sigma_min_eig = 1e-3;
  double tolerance = 1e-9;
  std::vector<double> alpha_grid{0.5, 0.75, 1.5, 2.0};

  // Super-additivity violation search: total random trials per family, split
  // evenly over alpha_grid, then a hill-climb from the best candidate.
  int search_trials = 10000;
  std::vector<int> search_dims{2, 2};
  int hill_climb_steps = 200;
  double hill_climb_step = 0.05;
  double witness_threshold = 1e-6;

  int support_channels = 50;
  int support_inputs = 200;
  int las_instances = 20;
  double las_noise = 0.01;

  double beta = 1.0;
  ChannelPool channel_pool = ChannelPool::Stinespring;
  int max_witnesses = 8;  // stored per check; witness_count still counts all

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (dims.empty()) throw ConfigError("dims must be nonempty");
    for (int d : dims)
      if (d < 2 || d > 8) throw ConfigError("dims must lie in [2, 8] so that bipartite composites stay <= 64");
    if (search_dims.size() != 2 || search_dims[0] < 2 || search_dims[1] < 2 || search_dims[0] * search_dims[1] > kMaxDim)
      throw ConfigError("search_dims must be two dims >= 2 with product <= 64");
    if (!(sigma_min_eig > kSupportTol) || sigma_min_eig >= 0.5)
      throw ConfigError("sigma_min_eig must lie in (1e-12, 0.5)");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (alpha_grid.empty()) throw ConfigError("alpha_grid must be nonempty");
    for (double a : alpha_grid)
      if (!(a > 0.0) || a == 1.0 || !std::isfinite(a)) throw ConfigError("alpha values must be positive, finite and != 1");
    if (search_trials < 1 || hill_climb_steps < 0 || !(hill_climb_step > 0.0) || !(witness_threshold > 0.0))
      throw ConfigError("invalid search settings");
    if (support_channels < 1 || support_inputs < 0 || las_instances < 0 || !(las_noise >= 0.0))
      throw ConfigError("invalid lemma-check settings");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive and finite");
    if (max_witnesses < 0) throw ConfigError("max_witnesses must be >= 0");
  }
};

/// Inputs that reproduce one measured gap.
///   dpi:             D(T ρ‖T σ) − D(ρ‖σ)            states rho, sigma; channel
///   additivity:      |D(ρ1⊗ρ2‖σ1⊗σ2) − D(ρ1‖σ1) − D(ρ2‖σ2)|   rho1, rho2, sigma1, sigma2
///   superadditivity: D(ρ1‖σ1) + D(ρ2‖σ2) − D(ρ12‖σ1⊗σ2)       rho12, sigma1, sigma2; dims
struct ViolationWitness {
  std::string check;
  std::string relation;
  DivergenceSpec spec;
  std::vector<int> dims;
  std::vector<std::pair<std::string, DensityMatrix>> states;
  std::optional<QuantumChannel> channel;
  double gap = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
  int trial = -1;
  std::string origin = "random";

  const DensityMatrix& state(const std::string& name) const {
    for (const auto& [n, s] : states)
      if (n == name) return s;
    throw ConfigError("witness has no state '" + name + "'");
  }
};

struct CheckReport {
  std::string check_name;
  std::string kind;  // inequality | ladder | search | search_alpha | sanity | demo
  int trials_run = 0;
  double tolerance = 0.0;
  double max_violation = 0.0;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<ViolationWitness> witnesses;
  int witness_count = 0;
  bool passed = false;
  bool counts_toward_suite = true;
  std::vector<double> trial_values;  // per-trial violation, for CSV output
};

struct SuiteReport {
  HarnessConfig config;
  std::vector<CheckReport> checks;
  bool passed = false;
};

namespace detail {

/// a − b on the extended reals; ∞ − ∞ counts as 0.
inline double difference(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  return a.value() - b.value();
}

inline int pick(const std::vector<int>& v, RngStream& rng) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(v.size()) - 1))];
}

inline DensityMatrix sample_sigma(int d, double floor, RngStream& rng) {
  return enforce_min_eigenvalue(random_density(d, rng), floor);
}

inline DensityMatrix sample_rho(int d, RngStream& rng) { return random_density(d, rng.uniform_int(1, d), rng); }

inline QuantumChannel sample_channel(ChannelPool pool, int din, int dout, RngStream& rng) {
  if (pool == ChannelPool::Mixed) {
    const ChannelPool choice[] = {ChannelPool::Stinespring, ChannelPool::Depolarizing, ChannelPool::Unitary};
    pool = choice[rng.uniform_int(0, 2)];
  }
  switch (pool) {
    case ChannelPool::Depolarizing: return QuantumChannel::depolarizing(din, dout);
    case ChannelPool::Unitary: return QuantumChannel::unitary(random_unitary(din, rng));
    default: break;
  }
  const int env_min = std::max({1, (din + dout - 1) / dout, (dout + din - 1) / din});
  return random_channel(din, dout, rng.uniform_int(env_min, env_min + 2), rng);
}

struct TrialResult {
  double violation = 0.0;
  std::vector<double> metrics;
  std::optional<ViolationWitness> witness;
};

inline RngStream trial_stream(const HarnessConfig& cfg, const std::string& name, int trial) {
  return RngStream(cfg.master_seed, stream_index_for(name, static_cast<std::uint64_t>(trial)));
}

inline ViolationWitness make_witness(const HarnessConfig& cfg, const std::string& name, int trial, std::string relation,
                                     const DivergenceSpec& spec) {
  ViolationWitness w;
  w.check = name;
  w.relation = std::move(relation);
  w.spec = spec;
  w.master_seed = cfg.master_seed;
  w.stream_index = stream_index_for(name, static_cast<std::uint64_t>(trial));
  w.trial = trial;
  return w;
}

/// Runs `trials` independent trials and reduces them in trial order.
template <class Fn>
CheckReport run_trials(const HarnessConfig& cfg, const std::string& name, std::string kind, double tol, int trials,
                       const std::vector<std::string>& metric_names, Fn&& fn) {
  const std::vector<TrialResult> results = parallel_map(trials, [&](int t) {
    RngStream rng = trial_stream(cfg, name, t);
    return fn(t, rng);
  });
  CheckReport rep;
  rep.check_name = name;
  rep.kind = std::move(kind);
  rep.trials_run = trials;
  rep.tolerance = tol;
  std::vector<double> metric_max(metric_names.size(), -std::numeric_limits<double>::infinity());
  for (const TrialResult& r : results) {
    rep.max_violation = std::max(rep.max_violation, r.violation);
    if (std::isnan(r.violation)) rep.max_violation = std::numeric_limits<double>::infinity();
    rep.trial_values.push_back(r.violation);
    for (std::size_t m = 0; m < metric_names.size() && m < r.metrics.size(); ++m)
      metric_max[m] = std::max(metric_max[m], r.metrics[m]);
    if (r.witness) {
      ++rep.witness_count;
      if (static_cast<int>(rep.witnesses.size()) < cfg.max_witnesses) rep.witnesses.push_back(*r.witness);
    }
  }
  for (std::size_t m = 0; m < metric_names.size(); ++m) rep.metrics.emplace_back(metric_names[m], metric_max[m]);
  rep.passed = rep.max_violation <= tol;
  return rep;
}

inline std::string spec_check_name(const std::string& check, const DivergenceSpec& spec) {
  return check + "/" + spec.label();
}

}  // namespace detail

/// Recomputes the gap recorded in a witness from its serialized inputs.
inline double replay(const ViolationWitness& w) {
  const DivergenceSpec& spec = w.spec;
  if (w.relation == "dpi") {
    if (!w.channel) throw MissingWitness("dpi witness without channel");
    const DensityMatrix& rho = w.state("rho");
    const DensityMatrix& sigma = w.state("sigma");
    return detail::difference(divergence(spec, w.channel->apply(rho), w.channel->apply(sigma)),
                              divergence(spec, rho, sigma));
  }
  if (w.relation == "additivity") {
    const DensityMatrix& r1 = w.state("rho1");
    const DensityMatrix& r2 = w.state("rho2");
    const DensityMatrix& s1 = w.state("sigma1");
    const DensityMatrix& s2 = w.state("sigma2");
    return std::abs(detail::difference(divergence(spec, tensor(r1, r2), tensor(s1, s2)),
                                       divergence(spec, r1, s1) + divergence(spec, r2, s2)));
  }
  if (w.relation == "superadditivity") {
    if (w.dims.size() != 2) throw DimensionMismatch("superadditivity witness needs two dims");
    const DensityMatrix& rho12 = w.state("rho12");
    const DensityMatrix& s1 = w.state("sigma1");
    const DensityMatrix& s2 = w.state("sigma2");
    const int k0[] = {0};
    const int k1[] = {1};
    const DensityMatrix r1 = partial_trace(rho12, w.dims, k0);
    const DensityMatrix r2 = partial_trace(rho12, w.dims, k1);
    return detail::difference(divergence(spec, r1, s1) + divergence(spec, r2, s2),
                              divergence(spec, rho12, tensor(s1, s2)));
  }
  throw ConfigError("unknown witness relation '" + w.relation + "'");
}

// ---------------------------------------------------------------------------
// Divergence axioms

inline CheckReport check_dpi(const HarnessConfig& cfg, const DivergenceSpec& spec) {
  spec.validate();
  const std::string name = detail::spec_check_name("dpi", spec);
  return detail::run_trials(cfg, name, "inequality", cfg.tolerance, cfg.trials, {}, [&](int t, RngStream& rng) {
    const int d = detail::pick(cfg.dims, rng);
    const int dout = detail::pick(cfg.dims, rng);
    const DensityMatrix sigma = detail::sample_sigma(d, cfg.sigma_min_eig, rng);
    const DensityMatrix rho = detail::sample_rho(d, rng);
    const QuantumChannel ch = detail::sample_channel(cfg.channel_pool, d, dout, rng);
    detail::TrialResult r;
    r.violation = detail::difference(divergence(spec, ch.apply(rho), ch.apply(sigma)), divergence(spec, rho, sigma));
    if (r.violation > cfg.tolerance) {
      ViolationWitness w = detail::make_witness(cfg, name, t, "dpi", spec);
      w.states = {{"rho", rho}, {"sigma", sigma}};
      w.channel = ch;
      w.gap = r.violation;
      r.witness = std::move(w);
    }
    return r;
  });
}

inline CheckReport check_additivity(const HarnessConfig& cfg, const DivergenceSpec& spec) {
  spec.validate();
  const std::string name = detail::spec_check_name("additivity", spec);
  return detail::run_trials(cfg, name, "inequality", cfg.tolerance, cfg.trials, {}, [&](int t, RngStream& rng) {
    const int d1 = detail::pick(cfg.dims, rng);
    const int d2 = detail::pick(cfg.dims, rng);
    const DensityMatrix r1 = detail::sample_rho(d1, rng);
    const DensityMatrix r2 = detail::sample_rho(d2, rng);
    const DensityMatrix s1 = detail::sample_sigma(d1, cfg.sigma_min_eig, rng);
    const DensityMatrix s2 = detail::sample_sigma(d2, cfg.sigma_min_eig, rng);
    detail::TrialResult r;
    r.violation = std::abs(detail::difference(divergence(spec, tensor(r1, r2), tensor(s1, s2)),
                                              divergence(spec, r1, s1) + divergence(spec, r2, s2)));
    if (r.violation > cfg.tolerance) {
      ViolationWitness w = detail::make_witness(cfg, name, t, "additivity", spec);
      w.states = {{"rho1", r1}, {"rho2", r2}, {"sigma1", s1}, {"sigma2", s2}};
      w.gap = r.violation;
      r.witness = std::move(w);
    }
    return r;
  });
}

/// Violation is Σ marginal divergences − joint divergence. For the relative
/// entropy the joint-minus-marginals gap must also equal I(1:2).
inline CheckReport check_superadditivity(const HarnessConfig& cfg, const DivergenceSpec& spec) {
  spec.validate();
  const std::string name = detail::spec_check_name("superadditivity", spec);
  const bool is_re = spec.family == DivergenceFamily::RelativeEntropy;
  std::vector<std::string> metric_names{"superadditivity_violation"};
  if (is_re) metric_names.push_back("mutual_information_deviation");
  return detail::run_trials(cfg, name, "inequality", cfg.tolerance, cfg.trials, metric_names, [&](int t, RngStream& rng) {
    const int d1 = detail::pick(cfg.dims, rng);
    const int d2 = detail::pick(cfg.dims, rng);
    const DensityMatrix rho12 = detail::sample_rho(d1 * d2, rng);
    const DensityMatrix s1 = detail::sample_sigma(d1, cfg.sigma_min_eig, rng);
    const DensityMatrix s2 = detail::sample_sigma(d2, cfg.sigma_min_eig, rng);
    ViolationWitness w = detail::make_witness(cfg, name, t, "superadditivity", spec);
    w.dims = {d1, d2};
    w.states = {{"rho12", rho12}, {"sigma1", s1}, {"sigma2", s2}};
    detail::TrialResult r;
    const double v = replay(w);
    r.metrics.push_back(v);
    r.violation = v;
    if (is_re) {
      const double mi_dev = std::abs(-v - mutual_information(rho12, w.dims));
      r.metrics.push_back(mi_dev);
      r.violation = std::max(v, mi_dev);
    }
    if (r.violation > cfg.tolerance) {
      w.gap = v;
      r.witness = std::move(w);
    }
    return r;
  });
}

inline const std::vector<double>& continuity_ladder() {
  static const std::vector<double> ladder{1e-2, 1e-3, 1e-4, 1e-5};
  return ladder;
}

/// m(δ) = max over trials of |D(ρ'‖σ) − D(ρ‖σ)| with ρ' = ρ moved by trace norm δ
/// along a fixed random Hermitian direction per trial, projected onto the states. Passes iff m is nonincreasing over
/// the ladder and m(1e-5) ≤ 1e-3.
inline CheckReport check_continuity(const HarnessConfig& cfg, const DivergenceSpec& spec) {
  spec.validate();
  const std::string name = detail::spec_check_name("continuity", spec);
  const std::vector<double>& ladder = continuity_ladder();
  std::vector<std::string> metric_names;
  for (double delta : ladder) {
    std::ostringstream os;
    os << "m(" << delta << ")";
    metric_names.push_back(os.str());
  }
  CheckReport rep =
      detail::run_trials(cfg, name, "ladder", 1e-3, cfg.trials, metric_names, [&](int, RngStream& rng) {
        const int d = detail::pick(cfg.dims, rng);
        const DensityMatrix sigma = detail::sample_sigma(d, cfg.sigma_min_eig, rng);
        const DensityMatrix rho = detail::sample_rho(d, rng);
        const std::uint64_t direction_seed = rng.engine()();
        const ExtendedReal base = divergence(spec, rho, sigma);
        detail::TrialResult r;
        for (double delta : ladder) {
          RngStream direction(direction_seed, 0);  // same direction at every rung
          const DensityMatrix moved = perturb_hermitian(rho, delta, direction);
          r.metrics.push_back(std::abs(detail::difference(divergence(spec, moved, sigma), base)));
        }
        r.violation = r.metrics.back();
        return r;
      });
  bool monotone = true;
  for (std::size_t i = 1; i < rep.metrics.size(); ++i)
    if (rep.metrics[i].second > rep.metrics[i - 1].second) monotone = false;
  rep.max_violation = rep.metrics.back().second;
  rep.metrics.emplace_back("ladder_nonincreasing", monotone ? 1.0 : 0.0);
  rep.passed = monotone && rep.max_violation <= rep.tolerance;
  return rep;
}

namespace detail {

struct SearchCandidate {
  DensityMatrix rho12;
  DensityMatrix sigma1;
  DensityMatrix sigma2;
};

inline double superadditivity_gap(const DivergenceSpec& spec, const SearchCandidate& c, std::span<const int> dims) {
  const int k0[] = {0};
  const int k1[] = {1};
  return difference(divergence(spec, partial_trace(c.rho12, dims, k0), c.sigma1) +
                        divergence(spec, partial_trace(c.rho12, dims, k1), c.sigma2),
                    divergence(spec, c.rho12, tensor(c.sigma1, c.sigma2)));
}

}  // namespace detail

/// Random search for D(ρ1‖σ1) + D(ρ2‖σ2) − D(ρ12‖σ1⊗σ2) > witness_threshold,
/// followed by a hill-climb from the best random candidate. `trials` = 0 uses
/// config.search_trials.
inline CheckReport search_superadditivity_violation(const HarnessConfig& cfg, DivergenceFamily family, double alpha,
                                                    int trials = 0) {
  const DivergenceSpec spec{family, family == DivergenceFamily::RelativeEntropy ? 1.0 : alpha};
  spec.validate();
  if (trials <= 0) trials = cfg.search_trials;
  const std::string name = detail::spec_check_name("superadditivity_search", spec);
  const std::vector<int> dims = cfg.search_dims;
  const int d12 = dims[0] * dims[1];

  struct Outcome {
    double gap = -std::numeric_limits<double>::infinity();
    std::optional<detail::SearchCandidate> candidate;
  };
  const std::vector<Outcome> outcomes = parallel_map(trials, [&](int t) {
    RngStream rng = detail::trial_stream(cfg, name, t);
    detail::SearchCandidate c{random_density(d12, rng.uniform_int(1, d12), rng),
                              detail::sample_sigma(dims[0], cfg.sigma_min_eig, rng),
                              detail::sample_sigma(dims[1], cfg.sigma_min_eig, rng)};
    Outcome o;
    o.gap = detail::superadditivity_gap(spec, c, dims);
    o.candidate = std::move(c);
    return o;
  });

  CheckReport rep;
  rep.check_name = name;
  rep.kind = family == DivergenceFamily::RelativeEntropy ? "sanity" : "search_alpha";
  rep.trials_run = trials;
  rep.tolerance = cfg.witness_threshold;
  rep.max_violation = -std::numeric_limits<double>::infinity();

  auto record = [&](const detail::SearchCandidate& c, double gap, int trial, std::uint64_t stream, std::string origin) {
    if (!(gap > cfg.witness_threshold)) return;
    ++rep.witness_count;
    if (static_cast<int>(rep.witnesses.size()) >= cfg.max_witnesses) return;
    ViolationWitness w = detail::make_witness(cfg, name, std::max(trial, 0), "superadditivity", spec);
    w.trial = trial;
    w.stream_index = stream;
    w.origin = std::move(origin);
    w.dims = dims;
    w.states = {{"rho12", c.rho12}, {"sigma1", c.sigma1}, {"sigma2", c.sigma2}};
    w.gap = gap;
    rep.witnesses.push_back(std::move(w));
  };

  int best = 0;
  for (int t = 0; t < trials; ++t) {
    const Outcome& o = outcomes[t];
    rep.trial_values.push_back(o.gap);
    if (o.gap > outcomes[best].gap) best = t;
    record(*o.candidate, o.gap, t, stream_index_for(name, static_cast<std::uint64_t>(t)), "random");
  }
  rep.max_violation = outcomes[best].gap;

  // hill-climb: perturb all three inputs by step_size in trace norm, keep improvements
  const std::string climb_name = name + "/hill_climb";
  const std::uint64_t climb_stream = stream_index_for(climb_name, 0);
  RngStream rng(cfg.master_seed, climb_stream);
  detail::SearchCandidate cur = *outcomes[best].candidate;
  double cur_gap = outcomes[best].gap;
  int accepted = 0;
  for (int s = 0; s < cfg.hill_climb_steps; ++s) {
    const double step = cfg.hill_climb_step;
    detail::SearchCandidate next{
        perturb_hermitian(cur.rho12, step, rng),
        enforce_min_eigenvalue(perturb_hermitian(cur.sigma1, step, rng), cfg.sigma_min_eig),
        enforce_min_eigenvalue(perturb_hermitian(cur.sigma2, step, rng), cfg.sigma_min_eig)};
    const double g = detail::superadditivity_gap(spec, next, dims);
    if (g > cur_gap) {
      cur = std::move(next);
      cur_gap = g;
      ++accepted;
    }
  }
  if (accepted > 0) record(cur, cur_gap, -1, climb_stream, "hill_climb");
  rep.max_violation = std::max(rep.max_violation, cur_gap);
  rep.metrics = {{"best_random_gap", outcomes[best].gap},
                 {"hill_climb_gap", cur_gap},
                 {"hill_climb_accepted", static_cast<double>(accepted)}};
  rep.passed = family == DivergenceFamily::RelativeEntropy ? rep.witness_count == 0 : rep.witness_count > 0;
  return rep;
}

/// One report per family summarizing the per-α searches; passes iff some α
/// produced a witness. Search trials are split evenly across the α-grid.
inline std::vector<CheckReport> search_family(const HarnessConfig& cfg, DivergenceFamily family) {
  std::vector<double> alphas;
  for (double a : cfg.alpha_grid)
    if (DivergenceSpec{family, a}.valid()) alphas.push_back(a);
  std::vector<CheckReport> out;
  CheckReport summary;
  summary.check_name = "superadditivity_search/" + to_string(family);
  summary.kind = "search";
  summary.tolerance = cfg.witness_threshold;
  summary.max_violation = -std::numeric_limits<double>::infinity();
  if (alphas.empty()) {
    summary.metrics.emplace_back("alphas_searched", 0.0);
    out.push_back(std::move(summary));
    return out;
  }
  const int per_alpha = std::max(1, (cfg.search_trials + static_cast<int>(alphas.size()) - 1) /
                                        static_cast<int>(alphas.size()));
  for (double a : alphas) {
    CheckReport r = search_superadditivity_violation(cfg, family, a, per_alpha);
    r.counts_toward_suite = false;
    summary.trials_run += r.trials_run;
    summary.max_violation = std::max(summary.max_violation, r.max_violation);
    summary.witness_count += r.witness_count;
    std::ostringstream os;
    os << "witnesses(alpha=" << a << ")";
    summary.metrics.emplace_back(os.str(), static_cast<double>(r.witness_count));
    // spread the stored witnesses evenly across α
    const int quota = std::max(1, cfg.max_witnesses / static_cast<int>(alphas.size()));
    for (int i = 0; i < quota && i < static_cast<int>(r.witnesses.size()); ++i) {
      if (static_cast<int>(summary.witnesses.size()) >= cfg.max_witnesses) break;
      summary.witnesses.push_back(r.witnesses[i]);
    }
    out.push_back(std::move(r));
  }
  summary.passed = summary.witness_count > 0;
  out.insert(out.begin(), std::move(summary));
  return out;
}

// ---------------------------------------------------------------------------
// Free-energy properties

inline CheckReport check_deltaf_consistency(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  return detail::run_trials(cfg, "deltaf_consistency", "inequality", cfg.tolerance, cfg.trials, {},
                            [&](int, RngStream& rng) {
                              const int d = detail::pick(cfg.dims, rng);
                              const HermitianOperator h = random_hermitian(d, 1.0, rng);
                              const DensityMatrix rho = detail::sample_rho(d, rng);
                              const DensityMatrix omega = gibbs_state(beta, h);
                              const double lhs = delta_f(ThermoObject(rho, h), beta);
                              const double rhs = free_energy(ThermoObject(rho, h), beta) -
                                                 free_energy(ThermoObject(omega, h), beta);
                              return detail::TrialResult{std::abs(lhs - rhs), {}, {}};
                            });
}

inline CheckReport check_deltaf_additivity(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  return detail::run_trials(cfg, "deltaf_additivity", "inequality", cfg.tolerance, cfg.trials, {},
                            [&](int, RngStream& rng) {
                              const int d1 = detail::pick(cfg.dims, rng);
                              const int d2 = detail::pick(cfg.dims, rng);
                              const ThermoObject a(detail::sample_rho(d1, rng), random_hermitian(d1, 1.0, rng));
                              const ThermoObject b(detail::sample_rho(d2, rng), random_hermitian(d2, 1.0, rng));
                              const double joint = delta_f(compose(a, b), beta);
                              return detail::TrialResult{
                                  std::abs(joint - delta_f(a, beta) - delta_f(b, beta)), {}, {}};
                            });
}

inline const std::vector<double>& gauge_shifts() {
  static const std::vector<double> shifts{-5.0, 1.0, 37.2};
  return shifts;
}

inline CheckReport check_deltaf_gauge(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  const double tol = std::min(cfg.tolerance, 1e-10);
  return detail::run_trials(cfg, "deltaf_gauge", "inequality", tol, cfg.trials, {}, [&](int, RngStream& rng) {
    const int d = detail::pick(cfg.dims, rng);
    const HermitianOperator h = random_hermitian(d, 1.0, rng);
    const DensityMatrix rho = detail::sample_rho(d, rng);
    const double base = delta_f(ThermoObject(rho, h), beta);
    double worst = 0.0;
    for (double c : gauge_shifts()) worst = std::max(worst, std::abs(delta_f(ThermoObject(rho, h.shifted(c)), beta) - base));
    return detail::TrialResult{worst, {}, {}};
  });
}

/// ΔF(ρ12) − ΔF(ρ1) − ΔF(ρ2) = β⁻¹ I(1:2) ≥ 0.
inline CheckReport check_deltaf_superadditivity(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  return detail::run_trials(
      cfg, "deltaf_superadditivity", "inequality", cfg.tolerance, cfg.trials,
      {"mutual_information_deviation", "negative_gap"}, [&](int, RngStream& rng) {
        const int d1 = detail::pick(cfg.dims, rng);
        const int d2 = detail::pick(cfg.dims, rng);
        const HermitianOperator h1 = random_hermitian(d1, 1.0, rng);
        const HermitianOperator h2 = random_hermitian(d2, 1.0, rng);
        const DensityMatrix rho12 = detail::sample_rho(d1 * d2, rng);
        auto [r1, r2] = detail::marginals(rho12, d1, d2);
        const double gap = delta_f(ThermoObject(rho12, hamiltonian_sum(h1, h2)), beta) -
                           delta_f(ThermoObject(r1, h1), beta) - delta_f(ThermoObject(r2, h2), beta);
        const double mi_dev = std::abs(gap - mutual_information(rho12, {d1, d2}) / beta);
        detail::TrialResult r;
        r.metrics = {mi_dev, -gap};
        r.violation = std::max(mi_dev, -gap);
        return r;
      });
}

inline CheckReport check_modular_round_trip(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  return detail::run_trials(cfg, "modular_round_trip", "inequality", std::max(cfg.tolerance, 1e-9), cfg.trials, {},
                            [&](int, RngStream& rng) {
                              const int d = detail::pick(cfg.dims, rng);
                              const DensityMatrix sigma = detail::sample_sigma(d, cfg.sigma_min_eig, rng);
                              const double c = rng.uniform(-5.0, 5.0);
                              const DensityMatrix back = gibbs_state(beta, modular_hamiltonian(sigma, beta, c));
                              return detail::TrialResult{trace_distance(back, sigma), {}, {}};
                            });
}

/// Plain monotonicity under random GP maps. Odd trials use a Hamiltonian-
/// changing map induced from a GP channel on S⊗A (keeping S or A). A trial
/// whose map fails GP verification counts as an infinite violation.
inline CheckReport check_monotone_plain(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  return detail::run_trials(
      cfg, "monotone_plain", "inequality", cfg.tolerance, cfg.trials, {"gp_residual"}, [&](int t, RngStream& rng) {
        const int d = detail::pick(cfg.dims, rng);
        const HermitianOperator h = random_hermitian(d, 1.0, rng);
        const DensityMatrix rho = detail::sample_rho(d, rng);
        std::optional<QuantumChannel> ch;
        HermitianOperator h_out = h;
        if (t % 2 == 0) {
          ch = random_gp_channel(h, beta, rng);
        } else {
          const int da = detail::pick(cfg.dims, rng);
          const HermitianOperator k = random_hermitian(da, 1.0, rng);
          const QuantumChannel joint = random_gp_channel(hamiltonian_sum(h, k), beta, rng);
          const KeptSubsystem keep = rng.uniform() < 0.5 ? KeptSubsystem::System : KeptSubsystem::Ancilla;
          GPMapSpec map = implement_gp_map(joint, h, k, beta, keep);
          ch = std::move(map.channel);
          h_out = std::move(map.ham_out);
        }
        const GibbsPreservation gp = is_gibbs_preserving(*ch, h, h_out, beta);
        detail::TrialResult r;
        r.metrics = {gp.residual};
        const double gap = delta_f(ThermoObject(rho, h), beta) - delta_f(ThermoObject(ch->apply(rho), h_out), beta);
        r.violation = gp.preserved ? -gap : std::numeric_limits<double>::infinity();
        return r;
      });
}

namespace detail {

struct SwapSample {
  DensityMatrix rho12;
  HermitianOperator h1;
  HermitianOperator h2;
  int d1;
  int d2;
};

inline SwapSample sample_swap_input(const HarnessConfig& cfg, RngStream& rng) {
  const int d1 = pick(cfg.dims, rng);
  const int d2 = pick(cfg.dims, rng);
  return {sample_rho(d1 * d2, rng), random_hermitian(d1, 1.0, rng), random_hermitian(d2, 1.0, rng), d1, d2};
}

inline double residual_named(const TransitionReport& r, const std::string& name) {
  for (const auto& [n, v] : r.residuals)
    if (n == name) return v;
  return 0.0;
}

}  // namespace detail

/// ΔF(source) − ΔF(target) for the marginal-catalytic swap.
inline CheckReport check_monotone_mc_swap(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  return detail::run_trials(cfg, "monotone_mc_swap", "inequality", cfg.tolerance, cfg.trials, {},
                            [&](int, RngStream& rng) {
                              const detail::SwapSample s = detail::sample_swap_input(cfg, rng);
                              const TransitionInstance t = construct_mc_swap(s.rho12, s.h1, s.h2, beta);
                              const double gap = delta_f(t.source, beta) - delta_f(t.target, beta);
                              return detail::TrialResult{-gap, {}, {}};
                            });
}

/// ΔF(source) − ΔF(target) for the correlated-catalytic swap, plus the joint
/// step ΔF(ρ ⊗ γ) − ΔF(η) across the GP witness.
inline CheckReport check_monotone_cc_swap(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  return detail::run_trials(
      cfg, "monotone_cc_swap", "inequality", cfg.tolerance, cfg.trials, {"negative_gap", "negative_joint_gap"},
      [&](int, RngStream& rng) {
        const detail::SwapSample s = detail::sample_swap_input(cfg, rng);
        const TransitionInstance t = construct_cc_swap(s.rho12, s.h1, s.h2, beta);
        const double gap = delta_f(t.source, beta) - delta_f(t.target, beta);
        const ThermoObject before = compose(t.source, t.catalysts.front());
        const ThermoObject after(*t.joint_output, hamiltonian_sum(t.target.hamiltonian(), t.catalysts.front().hamiltonian()));
        const double joint_gap = delta_f(before, beta) - delta_f(after, beta);
        detail::TrialResult r;
        r.metrics = {-gap, -joint_gap};
        r.violation = std::max(-gap, -joint_gap);
        return r;
      });
}

/// check_transition residuals of the constructed swap instances.
inline CheckReport check_swap_construction(const HarnessConfig& cfg, TransitionMode mode) {
  const double beta = cfg.beta;
  const bool mc = mode == TransitionMode::MarginalCatalytic;
  const std::string name = mc ? "transition_mc_swap" : "transition_cc_swap";
  return detail::run_trials(cfg, name, "inequality", cfg.tolerance, cfg.trials, {"gp_residual"},
                            [&](int, RngStream& rng) {
                              const detail::SwapSample s = detail::sample_swap_input(cfg, rng);
                              const TransitionInstance t = mc ? construct_mc_swap(s.rho12, s.h1, s.h2, beta)
                                                              : construct_cc_swap(s.rho12, s.h1, s.h2, beta);
                              const TransitionReport rep = check_transition(t, cfg.tolerance);
                              return detail::TrialResult{std::max(rep.max_residual, rep.gp_residual), {rep.gp_residual}, {}};
                            });
}

/// Catalyst marginal after the correlated-catalytic swap, against 1e-12.
inline CheckReport check_cc_swap_catalyst(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  return detail::run_trials(cfg, "cc_swap_catalyst_marginal", "inequality", 1e-12, cfg.trials, {},
                            [&](int, RngStream& rng) {
                              const detail::SwapSample s = detail::sample_swap_input(cfg, rng);
                              const TransitionInstance t = construct_cc_swap(s.rho12, s.h1, s.h2, beta);
                              const TransitionReport rep = check_transition(t, cfg.tolerance);
                              return detail::TrialResult{detail::residual_named(rep, "catalyst"), {}, {}};
                            });
}

/// (|00⟩+|11⟩)/√2 on two qubits.
inline DensityMatrix bell_state() {
  CVector psi = CVector::Zero(4);
  psi[0] = psi[3] = 1.0 / std::numbers::sqrt2;
  return DensityMatrix::pure(psi);
}

/// cc-swap on the Bell state with H = diag(0,1) per qubit: gap = 2 ln 2 / β.
inline CheckReport check_cc_swap_bell(const HarnessConfig& cfg) {
  const double beta = cfg.beta;
  const HermitianOperator h = HermitianOperator::diagonal({0.0, 1.0});
  const TransitionInstance t = construct_cc_swap(bell_state(), h, h, beta);
  const TransitionReport tr = check_transition(t, cfg.tolerance);
  const double gap = delta_f(t.source, beta) - delta_f(t.target, beta);
  const double expected = 2.0 * std::numbers::ln2 / beta;
  CheckReport rep;
  rep.check_name = "cc_swap_bell_gap";
  rep.kind = "inequality";
  rep.trials_run = 1;
  rep.tolerance = cfg.tolerance;
  rep.max_violation = std::max(std::abs(gap - expected), tr.max_residual);
  rep.metrics = {{"gap", gap}, {"expected", expected}, {"transition_residual", tr.max_residual},
                 {"catalyst_marginal", detail::residual_named(tr, "catalyst")}};
  rep.trial_values = {rep.max_violation};
  rep.passed = rep.max_violation <= rep.tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Lemmas

/// Support containment across random rank-decreasing channels: a random
/// channel followed by confinement to a random subspace of lower rank.
inline CheckReport check_support_lemma(const HarnessConfig& cfg) {
  return detail::run_trials(
      cfg, "support_containment", "inequality", std::max(cfg.tolerance, 1e-9), cfg.support_channels,
      {"basis_max_violation", "random_max_violation", "min_projector_rank_gap"}, [&](int, RngStream& rng) {
        const int d = detail::pick(cfg.dims, rng);
        const int dout = detail::pick(cfg.dims, rng);
        const QuantumChannel base = detail::sample_channel(ChannelPool::Stinespring, d, dout, rng);
        const int rank = rng.uniform_int(1, dout - 1);
        const QuantumChannel ch = compose(confine_to_subspace(dout, random_unitary(dout, rng), rank), base);
        const DensityMatrix sigma = detail::sample_sigma(d, cfg.sigma_min_eig, rng);
        const SupportContainmentReport r = check_support_containment(ch, sigma, cfg.support_inputs, rng);
        detail::TrialResult out;
        out.metrics = {r.basis_max_violation, r.random_max_violation, static_cast<double>(dout - r.projector_rank)};
        out.violation = r.max_violation;
        return out;
      });
}

struct LasStep {
  int n = 0;
  double d_n = 0.0;
  double bound = 0.0;
  double max_marginal_distance = 0.0;
  bool holds = false;
};

struct LasReport {
  double noise = 0.0;
  std::vector<LasStep> steps;
  double max_violation = 0.0;  // max over n of bound − d_n
  bool passed = false;
};

/// Finite-n chain of the lower asymptotic semi-continuity lemma: ρ'_n is ρ^{⊗n}
/// moved toward a random correlated state by trace-norm distance noise/n;
/// checks d_n = (S(ρ'_n‖σ^{⊗n}) − S(ρ^{⊗n}‖σ^{⊗n}))/n ≥ min_i S(ρ'_{n,i}‖σ) − S(ρ‖σ).
inline LasReport las_finite_n_demo(const DensityMatrix& rho, const DensityMatrix& sigma, int n_max, double noise,
                                   RngStream& rng, double tol = 1e-9) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("las demo: rho and sigma dims differ");
  if (n_max < 1) throw ConfigError("las demo: n_max must be >= 1");
  const int d = rho.dim();
  double total = 1.0;
  for (int n = 0; n < n_max; ++n) total *= d;
  if (n_max > 3 || total > kMaxDim) throw DimensionTooLarge("las demo needs n_max <= 3 and d^n_max <= 64");
  if (min_eigenvalue(sigma) <= kSupportTol) throw SigmaNotFullRank("las demo needs full-rank sigma");
  if (!(noise >= 0.0)) throw DomainError("las demo: noise must be >= 0");

  LasReport rep;
  rep.noise = noise;
  rep.passed = true;
  const double s1 = relative_entropy(rho, sigma).value();
  DensityMatrix rho_n = rho;
  DensityMatrix sigma_n = sigma;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) {
      rho_n = tensor(rho_n, rho);
      sigma_n = tensor(sigma_n, sigma);
    }
    const DensityMatrix direction = random_density(rho_n.dim(), rng);
    const DensityMatrix moved = perturb_toward(rho_n, direction, noise / n);
    LasStep step;
    step.n = n;
    step.d_n = (relative_entropy(moved, sigma_n).value() - relative_entropy(rho_n, sigma_n).value()) / n;
    const std::vector<int> dims(static_cast<std::size_t>(n), d);
    double min_marg = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const int keep[] = {i};
      const DensityMatrix marg = partial_trace(moved, dims, keep);
      min_marg = std::min(min_marg, relative_entropy(marg, sigma).value());
      step.max_marginal_distance = std::max(step.max_marginal_distance, trace_distance(marg, rho));
    }
    step.bound = min_marg - s1;
    step.holds = step.d_n >= step.bound - tol;
    rep.max_violation = std::max(rep.max_violation, step.bound - step.d_n);
    rep.passed = rep.passed && step.holds;
    rep.steps.push_back(step);
  }
  return rep;
}

/// The canned qubit instance: ρ = diag(0.75, 0.25), σ = I/2.
inline std::pair<DensityMatrix, DensityMatrix> las_canned_instance() {
  return {DensityMatrix::diagonal({0.75, 0.25}), DensityMatrix::maximally_mixed(2)};
}

/// Instance 0 is the canned qubit demo; the rest are random with d ∈ {2,3,4}.
inline CheckReport check_las(const HarnessConfig& cfg) {
  const int instances = 1 + cfg.las_instances;
  return detail::run_trials(cfg, "las_finite_n", "inequality", std::max(cfg.tolerance, 1e-9), instances,
                            {"max_marginal_distance_over_noise"}, [&](int t, RngStream& rng) {
                              DensityMatrix rho = las_canned_instance().first;
                              DensityMatrix sigma = las_canned_instance().second;
                              if (t > 0) {
                                const int d = rng.uniform_int(2, 4);
                                rho = random_density(d, rng);
                                sigma = detail::sample_sigma(d, cfg.sigma_min_eig, rng);
                              }
                              const LasReport r = las_finite_n_demo(rho, sigma, 3, cfg.las_noise, rng);
                              double ratio = 0.0;
                              for (const LasStep& s : r.steps)
                                if (cfg.las_noise > 0) ratio = std::max(ratio, s.max_marginal_distance * s.n / cfg.las_noise);
                              return detail::TrialResult{r.max_violation, {ratio}, {}};
                            });
}

// ---------------------------------------------------------------------------
// Suite

inline std::vector<DivergenceSpec> renyi_specs(const HarnessConfig& cfg) {
  std::vector<DivergenceSpec> out;
  for (DivergenceFamily f : {DivergenceFamily::RenyiPetz, DivergenceFamily::RenyiSandwiched})
    for (double a : cfg.alpha_grid)
      if (DivergenceSpec{f, a}.valid()) out.push_back({f, a});
  return out;
}

inline SuiteReport run_suite(const HarnessConfig& cfg) {
  cfg.validate();
  SuiteReport suite;
  suite.config = cfg;
  auto& checks = suite.checks;
  const DivergenceSpec re = DivergenceSpec::relative_entropy();

  checks.push_back(check_dpi(cfg, re));
  checks.push_back(check_additivity(cfg, re));
  checks.push_back(check_superadditivity(cfg, re));
  checks.push_back(check_continuity(cfg, re));
  for (const DivergenceSpec& s : renyi_specs(cfg)) {
    checks.push_back(check_dpi(cfg, s));
    checks.push_back(check_additivity(cfg, s));
  }
  for (DivergenceFamily f : {DivergenceFamily::RenyiPetz, DivergenceFamily::RenyiSandwiched})
    for (CheckReport& r : search_family(cfg, f)) checks.push_back(std::move(r));
  checks.push_back(search_superadditivity_violation(cfg, DivergenceFamily::RelativeEntropy, 1.0));

  checks.push_back(check_deltaf_consistency(cfg));
  checks.push_back(check_deltaf_additivity(cfg));
  checks.push_back(check_deltaf_gauge(cfg));
  checks.push_back(check_deltaf_superadditivity(cfg));
  checks.push_back(check_modular_round_trip(cfg));
  checks.push_back(check_monotone_plain(cfg));
  checks.push_back(check_monotone_mc_swap(cfg));
  checks.push_back(check_monotone_cc_swap(cfg));
  checks.push_back(check_swap_construction(cfg, TransitionMode::MarginalCatalytic));
  checks.push_back(check_swap_construction(cfg, TransitionMode::CorrelatedCatalytic));
  checks.push_back(check_cc_swap_catalyst(cfg));
  checks.push_back(check_cc_swap_bell(cfg));

  checks.push_back(check_support_lemma(cfg));
  checks.push_back(check_las(cfg));

  suite.passed = std::all_of(checks.begin(), checks.end(),
                             [](const CheckReport& r) { return !r.counts_toward_suite || r.passed; });
  return suite;
}

inline const CheckReport* find_check(const SuiteReport& s, const std::string& name) {
  for (const CheckReport& r : s.checks)
    if (r.check_name == name) return &r;
  return nullptr;
}

}  // namespace athermality
