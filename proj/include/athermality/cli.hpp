#pragma once

// Command-line front end. run_cli is the whole program minus main(), so tests
// can drive it with captured streams.
//
//   compute relent|renyi|gibbs|modular|deltaf|mi   exit 0, or 2 on bad input
//   verify                                         exit 0 pass, 1 fail, 2 config error
//   feasible PROBLEM                               exit 0/3/4/5 by verdict, 2 on bad input
//   demo las|mc-swap|cc-swap                       exit 0 pass, 1 fail, 2 bad subtarget
//   replay WITNESS                                 exit 0 iff the gap reproduces within 1e-10

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "io.hpp"

namespace athermality::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitInfeasibleByMonotone = 3;
inline constexpr int kExitNotFound = 4;
inline constexpr int kExitInfeasibleByLP = 5;
inline constexpr double kReplayTol = 1e-10;

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return kExitOk;
    case Verdict::InfeasibleByMonotone: return kExitInfeasibleByMonotone;
    case Verdict::InfeasibleByLP: return kExitInfeasibleByLP;
    case Verdict::NotFoundWithinBudget: return kExitNotFound;
  }
  return kExitFail;
}

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out;
  std::string csv;
};

namespace detail {

inline void emit(const io::json& j, const GlobalFlags& g, std::ostream& out) {
  const std::string text = io::dump(j);
  if (!g.out.empty()) io::write_file(g.out, text);
  out << text;
}

inline std::string csv_field(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// Long-format quantity,value table.
inline std::string csv_pairs(const std::vector<std::pair<std::string, double>>& rows) {
  std::string s = "quantity,value\n";
  for (const auto& [k, v] : rows) s += k + "," + csv_field(v) + "\n";
  return s;
}

inline std::string sanitize(const std::string& name) {
  std::string s;
  for (char c : name) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  return s;
}

// -- compute -----------------------------------------------------------------

struct ComputeArgs {
  std::string rho, sigma, state, hamiltonian, object;
  std::string family = "petz";
  double alpha = 2.0;
  double beta = 1.0;
  double shift = 0.0;
  std::vector<int> dims;
};

inline int run_compute(const std::string& target, const ComputeArgs& a, const GlobalFlags& g, std::ostream& out) {
  auto need = [](const std::string& path, const char* flag) {
    if (path.empty()) throw ConfigError(std::string("missing ") + flag);
    return io::read_file(path);
  };
  if (target == "relent") {
    const DensityMatrix rho = io::density_from_json(need(a.rho, "--rho"));
    const DensityMatrix sigma = io::density_from_json(need(a.sigma, "--sigma"));
    emit(io::value(relative_entropy(rho, sigma)), g, out);
  } else if (target == "renyi") {
    const DivergenceSpec spec{family_from_string(a.family), a.alpha};
    spec.validate();
    const DensityMatrix rho = io::density_from_json(need(a.rho, "--rho"));
    const DensityMatrix sigma = io::density_from_json(need(a.sigma, "--sigma"));
    io::json j = io::value(divergence(spec, rho, sigma));
    j["spec"] = io::to_json(spec);
    emit(j, g, out);
  } else if (target == "gibbs") {
    const HermitianOperator h = io::hermitian_from_json(need(a.hamiltonian, "--hamiltonian"));
    emit(io::to_json(gibbs_state(a.beta, h)), g, out);
  } else if (target == "modular") {
    const DensityMatrix sigma = io::density_from_json(need(a.sigma, "--sigma"));
    emit(io::to_json(modular_hamiltonian(sigma, a.beta, a.shift)), g, out);
  } else if (target == "deltaf") {
    double beta = a.beta;
    std::optional<ThermoObject> obj;
    if (!a.object.empty()) {
      const io::json j = io::read_file(a.object);
      obj = io::object_from_json(j);
      if (j.contains("beta")) beta = j.at("beta").get<double>();
    } else {
      obj.emplace(io::density_from_json(need(a.state, "--state or --object")),
                  io::hermitian_from_json(need(a.hamiltonian, "--hamiltonian")));
    }
    io::json j = io::value(athermality(*obj, beta));
    j["free_energy"] = io::number(free_energy(*obj, beta));
    j["beta"] = beta;
    emit(j, g, out);
  } else if (target == "mi") {
    const DensityMatrix rho = io::density_from_json(need(a.state, "--state"));
    if (a.dims.size() != 2) throw ConfigError("mi needs --dims d1,d2");
    emit(io::json{{"value", io::number(mutual_information(rho, a.dims))}}, g, out);
  }
  return kExitOk;
}

// -- verify ------------------------------------------------------------------

struct VerifyArgs {
  std::string config;
  std::optional<int> trials;
  std::vector<int> dims;
  std::vector<double> alpha;
  std::optional<int> search_trials;
  std::optional<double> beta;
  std::string channel_pool;
  std::string witness_dir;
  bool summary = false;
};

inline HarnessConfig build_config(const VerifyArgs& a, const GlobalFlags& g) {
  HarnessConfig cfg = a.config.empty() ? HarnessConfig{} : io::config_from_json(io::read_file(a.config));
  if (g.seed) cfg.master_seed = *g.seed;
  if (g.tol) cfg.tolerance = *g.tol;
  if (a.trials) cfg.trials = *a.trials;
  if (!a.dims.empty()) cfg.dims = a.dims;
  if (!a.alpha.empty()) cfg.alpha_grid = a.alpha;
  if (a.search_trials) cfg.search_trials = *a.search_trials;
  if (a.beta) cfg.beta = *a.beta;
  if (!a.channel_pool.empty()) cfg.channel_pool = channel_pool_from_string(a.channel_pool);
  cfg.validate();
  return cfg;
}

inline io::json summarize(const SuiteReport& s) {
  io::json checks = io::json::array();
  for (const CheckReport& r : s.checks) {
    if (!r.counts_toward_suite) continue;
    checks.push_back(io::json{{"check_name", r.check_name},
                              {"passed", r.passed},
                              {"max_violation", io::number(r.max_violation)},
                              {"tolerance", io::number(r.tolerance)},
                              {"witness_count", r.witness_count}});
  }
  return io::json{{"passed", s.passed}, {"checks", std::move(checks)}};
}

inline int run_verify(const VerifyArgs& a, const GlobalFlags& g, std::ostream& out, std::ostream& err) {
  const HarnessConfig cfg = build_config(a, g);
  const SuiteReport suite = run_suite(cfg);
  const io::json full = io::to_json(suite);
  if (!g.out.empty()) io::write_file(g.out, io::dump(full));
  out << io::dump(a.summary || !g.out.empty() ? summarize(suite) : full);
  if (!g.csv.empty()) io::write_file(g.csv, io::to_csv(suite));
  if (!a.witness_dir.empty()) {
    std::filesystem::create_directories(a.witness_dir);
    for (const CheckReport& r : suite.checks) {
      if (!r.counts_toward_suite) continue;
      for (std::size_t i = 0; i < r.witnesses.size(); ++i) {
        const std::string path =
            (std::filesystem::path(a.witness_dir) / (sanitize(r.check_name) + "_" + std::to_string(i) + ".json")).string();
        io::write_file(path, io::dump(io::to_json(r.witnesses[i])));
      }
    }
  }
  for (const CheckReport& r : suite.checks)
    if (r.counts_toward_suite && !r.passed) err << "check failed: " << r.check_name << "\n";
  return suite.passed ? kExitOk : kExitFail;
}

// -- feasible ----------------------------------------------------------------

struct FeasibleArgs {
  std::string problem;
  bool trace = false;
  std::string method = "douglas-rachford";
};

inline int run_feasible(const FeasibleArgs& a, const GlobalFlags& g, std::ostream& out) {
  FeasibilityProblem p = io::problem_from_json(io::read_file(a.problem));
  if (a.trace) p.options.record_trace = true;
  if (g.tol) p.options.residual_tol = *g.tol;
  p.validate();
  FeasibilityReport rep;
  if (a.method == "douglas-rachford") {
    rep = decide_feasibility(p);
  } else if (a.method == "dykstra") {
    const double gap = monotone_screen(p);
    if (gap > kMonotoneGapTol) {
      rep = decide_feasibility(p);
    } else {
      rep = solve_choi_feasibility(p, ProjectionMethod::Dykstra);
    }
  } else {
    throw ConfigError("unknown method '" + a.method + "'");
  }
  emit(io::to_json(rep, &p), g, out);
  if (!g.csv.empty() && !rep.residual_trace.empty()) {
    std::string s = "iteration,residual\n";
    for (std::size_t i = 0; i < rep.residual_trace.size(); ++i) s += std::to_string(i) + "," + csv_field(rep.residual_trace[i]) + "\n";
    io::write_file(g.csv, s);
  }
  return exit_code(rep.verdict);
}

// -- demo --------------------------------------------------------------------

struct DemoArgs {
  double noise = 0.01;
  std::string input;
  double beta = 1.0;
};

inline DensityMatrix demo_input(const std::string& kind, std::uint64_t seed) {
  if (kind == "bell") return bell_state();
  if (kind == "product") return tensor(DensityMatrix::diagonal({0.7, 0.3}), DensityMatrix::diagonal({0.6, 0.4}));
  if (kind == "random") {
    RngStream rng(seed, stream_index_for("demo/input", 0));
    return random_density(4, rng);
  }
  throw ConfigError("unknown demo input '" + kind + "' (bell|product|random)");
}

inline int run_demo_las(const DemoArgs& a, const GlobalFlags& g, std::ostream& out) {
  auto [rho, sigma] = las_canned_instance();
  RngStream rng(g.seed.value_or(0), stream_index_for("demo/las", 0));
  const LasReport rep = las_finite_n_demo(rho, sigma, 3, a.noise, rng, g.tol.value_or(1e-9));
  io::json j = io::to_json(rep);
  j["rho"] = io::to_json(rho);
  j["sigma"] = io::to_json(sigma);
  emit(j, g, out);
  if (!g.csv.empty()) {
    std::string s = "n,d_n,bound,max_marginal_distance\n";
    for (const LasStep& st : rep.steps)
      s += std::to_string(st.n) + "," + csv_field(st.d_n) + "," + csv_field(st.bound) + "," +
           csv_field(st.max_marginal_distance) + "\n";
    io::write_file(g.csv, s);
  }
  return rep.passed ? kExitOk : kExitFail;
}

inline int run_demo_swap(bool cc, const DemoArgs& a, const GlobalFlags& g, std::ostream& out) {
  const std::string kind = a.input.empty() ? (cc ? "bell" : "product") : a.input;
  const DensityMatrix rho12 = demo_input(kind, g.seed.value_or(0));
  const HermitianOperator h = HermitianOperator::diagonal({0.0, 1.0});
  const double beta = a.beta;
  const double tol = g.tol.value_or(1e-9);
  const TransitionInstance t = cc ? construct_cc_swap(rho12, h, h, beta) : construct_mc_swap(rho12, h, h, beta);
  const TransitionReport tr = check_transition(t, tol);
  auto [r1, r2] = athermality::detail::marginals(rho12, 2, 2);

  const double f_source = delta_f(t.source, beta);
  const double f_target = delta_f(t.target, beta);
  std::vector<std::pair<std::string, double>> rows{
      {"deltaf_source", f_source},
      {"deltaf_target", f_target},
      {"deltaf_gap", f_source - f_target},
      {"mutual_information_over_beta", mutual_information(rho12, {2, 2}) / beta},
      {"transition_max_residual", tr.max_residual},
      {"witness_gp_residual", tr.gp_residual}};
  io::json j{{"construction", cc ? "cc-swap" : "mc-swap"}, {"input", kind}, {"beta", beta}};
  j["marginals_before"] = io::json{{"system_1", io::to_json(r1)}, {"system_2", io::to_json(r2)}};

  const std::vector<int> out_dims = cc ? std::vector<int>{2, 2, 2} : std::vector<int>{2, 2, 2, 2};
  const DensityMatrix& eta = tr.output;
  auto marginal = [&](std::initializer_list<int> keep) {
    return partial_trace(eta, out_dims, std::span<const int>(keep.begin(), keep.size()));
  };
  if (cc) {
    const DensityMatrix cat = marginal({2});
    rows.emplace_back("catalyst_marginal_distance", trace_distance(cat, r2));
    rows.emplace_back("catalyst_system_correlation", mutual_information(marginal({0, 2}), {2, 2}));
    j["marginals_after"] = io::json{{"system", io::to_json(marginal({0, 1}))}, {"catalyst", io::to_json(cat)}};
  } else {
    const DensityMatrix c1 = marginal({2});
    const DensityMatrix c2 = marginal({3});
    rows.emplace_back("catalyst_1_marginal_distance", trace_distance(c1, r1));
    rows.emplace_back("catalyst_2_marginal_distance", trace_distance(c2, r2));
    j["marginals_after"] = io::json{{"system", io::to_json(marginal({0, 1}))},
                                    {"catalyst_1", io::to_json(c1)},
                                    {"catalyst_2", io::to_json(c2)},
                                    {"catalyst_joint", io::to_json(marginal({2, 3}))}};
  }
  io::json values = io::json::object();
  for (const auto& [k, v] : rows) values[k] = io::number(v);
  j["values"] = std::move(values);
  j["transition"] = io::to_json(tr);
  const bool ok = tr.passed && f_source - f_target >= -tol;
  j["passed"] = ok;
  emit(j, g, out);
  if (!g.csv.empty()) io::write_file(g.csv, csv_pairs(rows));
  return ok ? kExitOk : kExitFail;
}

// -- replay ------------------------------------------------------------------

inline int run_replay(const std::string& path, const GlobalFlags& g, std::ostream& out) {
  const ViolationWitness w = io::witness_from_json(io::read_file(path));
  const double gap = replay(w);
  const double diff = std::abs(gap - w.gap);
  const bool ok = diff <= kReplayTol || (std::isinf(gap) && gap == w.gap);
  emit(io::json{{"check", w.check},
                {"recorded_gap", io::number(w.gap)},
                {"replayed_gap", io::number(gap)},
                {"difference", io::number(diff)},
                {"reproduced", ok}},
       g, out);
  return ok ? kExitOk : kExitFail;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Relative entropy and athermality toolkit", "athermality"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  std::uint64_t seed = 0;
  double tol = 0.0;
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Master seed");
  CLI::Option* tol_opt = app.add_option("--tol", tol, "Tolerance override")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Also write the JSON result to this path");
  app.add_option("--csv", g.csv, "Write a long-format CSV table to this path");

  // compute
  detail::ComputeArgs ca;
  CLI::App* compute = app.add_subcommand("compute", "Evaluate one quantity");
  compute->require_subcommand(1);
  std::string compute_target;
  auto add_compute = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = compute->add_subcommand(name, desc);
    sub->callback([&compute_target, name] { compute_target = name; });
    return sub;
  };
  CLI::App* c_relent = add_compute("relent", "S(rho||sigma)");
  c_relent->add_option("--rho", ca.rho, "State file")->required();
  c_relent->add_option("--sigma", ca.sigma, "State file")->required();
  CLI::App* c_renyi = add_compute("renyi", "Renyi divergence");
  c_renyi->add_option("--rho", ca.rho, "State file")->required();
  c_renyi->add_option("--sigma", ca.sigma, "State file")->required();
  c_renyi->add_option("--family", ca.family, "petz | sandwiched");
  c_renyi->add_option("--alpha", ca.alpha, "Order");
  CLI::App* c_gibbs = add_compute("gibbs", "Gibbs state of a Hamiltonian");
  c_gibbs->add_option("--hamiltonian,-H", ca.hamiltonian, "Hamiltonian file")->required();
  c_gibbs->add_option("--beta", ca.beta, "Inverse temperature");
  CLI::App* c_mod = add_compute("modular", "Modular Hamiltonian of a full-rank state");
  c_mod->add_option("--sigma", ca.sigma, "State file")->required();
  c_mod->add_option("--beta", ca.beta, "Inverse temperature");
  c_mod->add_option("--shift", ca.shift, "Additive constant C");
  CLI::App* c_df = add_compute("deltaf", "Athermality beta^-1 S(rho||omega)");
  c_df->add_option("--object", ca.object, "Object file {beta, state, hamiltonian}");
  c_df->add_option("--state", ca.state, "State file");
  c_df->add_option("--hamiltonian,-H", ca.hamiltonian, "Hamiltonian file");
  c_df->add_option("--beta", ca.beta, "Inverse temperature (object file wins)");
  CLI::App* c_mi = add_compute("mi", "Mutual information of a bipartite state");
  c_mi->add_option("--state", ca.state, "State file")->required();
  c_mi->add_option("--dims", ca.dims, "d1,d2")->delimiter(',')->required();

  // verify
  detail::VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "Run the randomized verification suite");
  verify->add_option("--config", va.config, "HarnessConfig JSON");
  verify->add_option("--trials", va.trials, "Trials per check");
  verify->add_option("--dims", va.dims, "Per-factor dims, e.g. 2,3")->delimiter(',');
  verify->add_option("--alpha", va.alpha, "Alpha grid, e.g. 0.5,2")->delimiter(',');
  verify->add_option("--search-trials", va.search_trials, "Violation-search trials per family");
  verify->add_option("--beta", va.beta, "Inverse temperature for free-energy checks");
  verify->add_option("--channel-pool", va.channel_pool, "stinespring | depolarizing | unitary | mixed");
  verify->add_option("--witness-dir", va.witness_dir, "Write each stored witness as a standalone JSON file");
  verify->add_flag("--summary", va.summary, "Print only the per-check summary");

  // feasible
  detail::FeasibleArgs fa;
  CLI::App* feasible = app.add_subcommand("feasible", "Decide whether a GP map rho -> sigma exists");
  feasible->add_option("problem", fa.problem, "Problem JSON")->required();
  feasible->add_flag("--trace", fa.trace, "Record the residual trace");
  feasible->add_option("--method", fa.method, "douglas-rachford | dykstra");

  // demo
  detail::DemoArgs da;
  CLI::App* demo = app.add_subcommand("demo", "Canned demonstrations");
  demo->require_subcommand(1);
  CLI::App* d_las = demo->add_subcommand("las", "Finite-n semi-continuity chain");
  d_las->add_option("--noise", da.noise, "Trace-norm perturbation at n = 1");
  CLI::App* d_mc = demo->add_subcommand("mc-swap", "Marginal-catalytic swap");
  CLI::App* d_cc = demo->add_subcommand("cc-swap", "Correlated-catalytic swap");
  for (CLI::App* d : {d_mc, d_cc}) {
    d->add_option("--input", da.input, "bell | product | random");
    d->add_option("--beta", da.beta, "Inverse temperature");
  }

  // replay
  std::string replay_path;
  CLI::App* replay_cmd = app.add_subcommand("replay", "Recompute the gap stored in a witness file");
  replay_cmd->add_option("witness", replay_path, "Witness JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitBadInput;
  }
  if (*seed_opt) g.seed = seed;
  if (*tol_opt) g.tol = tol;

  try {
    if (*compute) return detail::run_compute(compute_target, ca, g, out);
    if (*verify) return detail::run_verify(va, g, out, err);
    if (*feasible) return detail::run_feasible(fa, g, out);
    if (*demo) {
      if (*d_las) return detail::run_demo_las(da, g, out);
      return detail::run_demo_swap(static_cast<bool>(*d_cc), da, g, out);
    }
    if (*replay_cmd) return detail::run_replay(replay_path, g, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const Error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const nlohmann::ordered_json::exception& e) {
    err << "malformed input: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}

}  // namespace athermality::cli
