// Acceptance driver: one PASS/FAIL line per criterion. Exit status is 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>

#include "athermality/feasibility.hpp"
#include "athermality/harness.hpp"
#include "athermality/io.hpp"

using namespace athermality;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream why;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    if (!ok) why << "; ";
    ok = false;
    why << what;
  }
};

const CheckReport& need(const SuiteReport& s, const std::string& name) {
  if (const CheckReport* r = find_check(s, name)) return *r;
  throw std::runtime_error("missing check " + name);
}

double metric(const CheckReport& r, const std::string& name) {
  for (const auto& [n, v] : r.metrics)
    if (n == name) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

void inequality(Outcome& v, const SuiteReport& s, const std::string& name, double tol, int min_trials) {
  const CheckReport& r = need(s, name);
  v.require(r.trials_run >= min_trials, name + " ran " + std::to_string(r.trials_run) + " trials");
  v.require(r.max_violation <= tol, name + " violation " + fmt(r.max_violation));
}

void print(int id, const Outcome& v, const std::string& summary) {
  std::printf("%s criterion %d: %s%s%s\n", v.ok ? "PASS" : "FAIL", id, summary.c_str(), v.ok ? "" : " -- ",
              v.ok ? "" : v.why.str().c_str());
}

Outcome criterion1(const SuiteReport& s) {
  Outcome v;
  const int n = 500;
  inequality(v, s, "dpi/relative_entropy", 1e-9, n);
  inequality(v, s, "additivity/relative_entropy", 1e-9, n);
  const CheckReport& sup = need(s, "superadditivity/relative_entropy");
  v.require(sup.trials_run >= n, "superadditivity trials");
  v.require(metric(sup, "superadditivity_violation") <= 1e-9, "superadditivity violation");
  v.require(metric(sup, "mutual_information_deviation") <= 1e-9, "mutual information deviation");
  const CheckReport& cont = need(s, "continuity/relative_entropy");
  v.require(cont.trials_run >= n, "continuity trials");
  v.require(cont.passed, "continuity ladder not nonincreasing or m(1e-5) > 1e-3");
  return v;
}

Outcome criterion2(const SuiteReport& s) {
  Outcome v;
  for (const DivergenceSpec& spec : renyi_specs(s.config)) {
    inequality(v, s, "dpi/" + spec.label(), 1e-9, 500);
    inequality(v, s, "additivity/" + spec.label(), 1e-9, 500);
  }
  for (DivergenceFamily f : {DivergenceFamily::RenyiPetz, DivergenceFamily::RenyiSandwiched}) {
    const CheckReport& r = need(s, "superadditivity_search/" + to_string(f));
    int replayable = 0;
    for (const ViolationWitness& w : r.witnesses)
      if (w.gap > 1e-6 && std::abs(replay(w) - w.gap) <= 1e-10) ++replayable;
    v.require(r.trials_run <= 10000, to_string(f) + " used more than 10^4 random trials");
    v.require(replayable >= 1, to_string(f) + " has no replayable witness");
  }
  return v;
}

Outcome criterion3(const SuiteReport& s) {
  Outcome v;
  inequality(v, s, "deltaf_consistency", 1e-9, 500);
  inequality(v, s, "deltaf_additivity", 1e-9, 500);
  inequality(v, s, "deltaf_gauge", 1e-10, 500);
  inequality(v, s, "monotone_plain", 1e-9, 500);
  inequality(v, s, "monotone_mc_swap", 1e-9, 500);
  inequality(v, s, "monotone_cc_swap", 1e-9, 500);
  return v;
}

Outcome criterion4(const SuiteReport& s) {
  Outcome v;
  inequality(v, s, "transition_mc_swap", 1e-9, 1);
  inequality(v, s, "transition_cc_swap", 1e-9, 1);
  inequality(v, s, "cc_swap_catalyst_marginal", 1e-12, 1);
  const CheckReport& bell = need(s, "cc_swap_bell_gap");
  v.require(std::abs(metric(bell, "gap") - 2.0 * std::log(2.0) / s.config.beta) <= 1e-9, "Bell gap");
  v.require(bell.passed, "Bell transition residual");
  return v;
}

Outcome criterion5(const SuiteReport& s) {
  Outcome v;
  const CheckReport& r = need(s, "support_containment");
  v.require(r.trials_run >= 50, "fewer than 50 channels");
  v.require(s.config.support_inputs >= 200, "fewer than 200 random inputs");
  v.require(r.max_violation <= 1e-9, "residual " + fmt(r.max_violation));
  return v;
}

Outcome criterion6(const SuiteReport& s) {
  Outcome v;
  const CheckReport& r = need(s, "las_finite_n");
  v.require(r.trials_run >= 21, "fewer than canned + 20 instances");
  v.require(r.max_violation <= 1e-9, "bound exceeded by " + fmt(r.max_violation));
  return v;
}

struct FeasibilityStats {
  int planted_ok = 0;
  int disagreements = 0;
  int contradictions = 0;
  double slowest = 0.0;
};

Outcome criterion7(std::uint64_t seed, FeasibilityStats& st) {
  Outcome v;
  auto timed = [&](const std::function<FeasibilityReport()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    FeasibilityReport r = fn();
    st.slowest = std::max(st.slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return r;
  };
  auto screen_consistent = [&](const FeasibilityProblem& p, const FeasibilityReport& r) {
    if (r.verdict == Verdict::Feasible && monotone_screen(p) > kMonotoneGapTol) ++st.contradictions;
  };

  for (int i = 0; i < 50; ++i) {
    RngStream rng(seed, stream_index_for("acceptance/planted", static_cast<std::uint64_t>(i)));
    const int d = 2 + i % 3;
    const HermitianOperator h = random_hermitian(d, 1.0, rng);
    const QuantumChannel g = random_gp_channel(h, 1.0, rng);
    const DensityMatrix rho = random_density(d, rng);
    const FeasibilityProblem p{rho, g.apply(rho), h, h, 1.0, {}};
    const FeasibilityReport r = timed([&] { return decide_feasibility(p); });
    screen_consistent(p, r);
    if (r.verdict == Verdict::Feasible && r.witness && verify_witness(p, *r.witness).ok(kWitnessTol)) ++st.planted_ok;
  }

  for (int i = 0; i < 50; ++i) {
    RngStream rng(seed, stream_index_for("acceptance/commuting", static_cast<std::uint64_t>(i)));
    const int d = 2 + i % 3;
    RVector e(d), pv(d), qv(d);
    for (int k = 0; k < d; ++k) e[k] = rng.uniform(0.0, 2.0);
    const HermitianOperator h = HermitianOperator::diagonal(e);
    const DensityMatrix omega = gibbs_state(1.0, h);
    for (int k = 0; k < d; ++k) pv[k] = rng.uniform();
    for (int k = 0; k < d; ++k) qv[k] = std::max(0.01, omega.matrix()(k, k).real() + 0.3 * (rng.uniform() - 0.5));
    pv /= pv.sum();
    qv /= qv.sum();
    const FeasibilityProblem p{DensityMatrix::diagonal(pv), DensityMatrix::diagonal(qv), h, h, 1.0, {}};
    const FeasibilityReport lp_rep = timed([&] { return classical_gp_feasibility(p); });
    const FeasibilityReport choi = timed([&] { return solve_choi_feasibility(p); });
    screen_consistent(p, lp_rep);
    screen_consistent(p, choi);
    if ((lp_rep.verdict == Verdict::Feasible) != (choi.verdict == Verdict::Feasible)) ++st.disagreements;
  }

  v.require(st.planted_ok == 50, std::to_string(st.planted_ok) + "/50 planted instances verified");
  v.require(st.disagreements == 0, std::to_string(st.disagreements) + " LP/Choi disagreements");
  v.require(st.contradictions == 0, std::to_string(st.contradictions) + " screen contradictions");
  v.require(st.slowest <= 60.0, "slowest instance " + fmt(st.slowest) + " s");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  HarnessConfig cfg;
  cfg.master_seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 42;

  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport first = run_suite(cfg);
  const double suite_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool all = true;
  auto report = [&](int id, const Outcome& v, const std::string& summary) {
    print(id, v, summary);
    all = all && v.ok;
  };
  report(1, criterion1(first), "relative entropy axioms");
  report(2, criterion2(first), "Renyi DPI/additivity and super-additivity witnesses");
  report(3, criterion3(first), "free-energy properties and monotonicity");
  report(4, criterion4(first), "swap transition constructions");
  report(5, criterion5(first), "support containment");
  report(6, criterion6(first), "finite-n semi-continuity chain");

  FeasibilityStats st;
  const Outcome c7 = criterion7(cfg.master_seed, st);
  report(7, c7, "feasibility solver (slowest instance " + fmt(st.slowest) + " s)");

  const std::string a = io::dump(io::to_json(first));
  const std::string b = io::dump(io::to_json(run_suite(cfg)));
  Outcome c8;
  c8.require(a == b, "reports differ");
  report(8, c8, "determinism (suite " + fmt(suite_seconds) + " s)");
  return all ? 0 : 1;
}
