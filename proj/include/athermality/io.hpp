#pragma once

// JSON interchange. Matrices are {"dim", "re", "im"} row-major ("rows"/"cols"
// instead of "dim" when not square; "im" may be omitted for real input).
// Doubles are written in shortest round-trip form, so read(write(x)) == x.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "feasibility.hpp"
#include "harness.hpp"

namespace athermality::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalars

/// Finite doubles as numbers; ±∞ as "infinity"/"-infinity"; NaN as null.
inline json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "infinity" : "-infinity";
  return v;
}

inline double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "infinity") return std::numeric_limits<double>::infinity();
    if (s == "-infinity") return -std::numeric_limits<double>::infinity();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw ConfigError("expected a number, got " + j.dump());
}

inline json value(const ExtendedReal& v) { return json{{"value", number(v.value())}}; }

// ---------------------------------------------------------------------------
// Matrices

inline json to_json(const CMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json rr = json::array();
    json ri = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  json j;
  if (m.rows() == m.cols()) {
    j["dim"] = m.rows();
  } else {
    j["rows"] = m.rows();
    j["cols"] = m.cols();
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("matrix must be a JSON object");
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (j.contains("dim")) {
    rows = cols = j.at("dim").get<Eigen::Index>();
  } else if (j.contains("rows") && j.contains("cols")) {
    rows = j.at("rows").get<Eigen::Index>();
    cols = j.at("cols").get<Eigen::Index>();
  } else {
    throw ConfigError("matrix needs \"dim\" or \"rows\"/\"cols\"");
  }
  if (rows < 1 || cols < 1 || rows > kMaxDim * kMaxDim || cols > kMaxDim * kMaxDim)
    throw ConfigError("matrix dimensions out of range");
  CMatrix m = CMatrix::Zero(rows, cols);
  auto fill = [&](const char* key, bool imag) {
    const json& a = j.at(key);
    if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != rows)
      throw ConfigError(std::string("matrix \"") + key + "\" must have one array per row");
    for (Eigen::Index r = 0; r < rows; ++r) {
      const json& row = a[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
        throw ConfigError(std::string("matrix \"") + key + "\" row has the wrong length");
      for (Eigen::Index c = 0; c < cols; ++c) {
        const double v = read_number(row[static_cast<std::size_t>(c)]);
        if (!std::isfinite(v)) throw ConfigError("matrix entries must be finite");
        if (imag)
          m(r, c).imag(v);
        else
          m(r, c).real(v);
      }
    }
  };
  fill("re", false);
  if (j.contains("im")) fill("im", true);
  return m;
}

inline json to_json(const HermitianOperator& h) { return to_json(h.matrix()); }
inline json to_json(const DensityMatrix& rho) { return to_json(rho.matrix()); }

inline HermitianOperator hermitian_from_json(const json& j) { return HermitianOperator(matrix_from_json(j)); }

/// Validated, not renormalized: entries are kept bit-for-bit.
inline DensityMatrix density_from_json(const json& j) { return DensityMatrix(matrix_from_json(j), 1e-9); }

// ---------------------------------------------------------------------------
// Channels, objects, transitions

inline json to_json(const QuantumChannel& t) {
  json kraus = json::array();
  for (const CMatrix& k : t.kraus()) kraus.push_back(to_json(k));
  return json{{"dim_in", t.dim_in()}, {"dim_out", t.dim_out()}, {"kraus", std::move(kraus)}};
}

inline QuantumChannel channel_from_json(const json& j) {
  std::vector<CMatrix> kraus;
  for (const json& k : j.at("kraus")) kraus.push_back(matrix_from_json(k));
  return QuantumChannel(j.at("dim_in").get<int>(), j.at("dim_out").get<int>(), std::move(kraus));
}

inline json to_json(const ThermoObject& obj, double beta) {
  return json{{"beta", beta}, {"state", to_json(obj.state())}, {"hamiltonian", to_json(obj.hamiltonian())}};
}

inline ThermoObject object_from_json(const json& j) {
  return ThermoObject(density_from_json(j.at("state")), hermitian_from_json(j.at("hamiltonian")));
}

inline json to_json(const TransitionInstance& t) {
  json cats = json::array();
  for (const ThermoObject& c : t.catalysts) cats.push_back(to_json(c, t.beta));
  json j{{"beta", t.beta},
         {"mode", to_string(t.mode)},
         {"source", to_json(t.source, t.beta)},
         {"target", to_json(t.target, t.beta)},
         {"catalysts", std::move(cats)}};
  j["witness"] = t.witness_channel ? to_json(*t.witness_channel) : json(nullptr);
  j["joint_output"] = t.joint_output ? to_json(*t.joint_output) : json(nullptr);
  return j;
}

inline TransitionInstance transition_from_json(const json& j) {
  TransitionInstance t{object_from_json(j.at("source")), object_from_json(j.at("target"))};
  t.beta = j.at("beta").get<double>();
  t.mode = transition_mode_from_string(j.value("mode", std::string("Plain")));
  if (j.contains("catalysts"))
    for (const json& c : j.at("catalysts")) t.catalysts.push_back(object_from_json(c));
  if (j.contains("witness") && !j.at("witness").is_null()) t.witness_channel = channel_from_json(j.at("witness"));
  if (j.contains("joint_output") && !j.at("joint_output").is_null())
    t.joint_output = density_from_json(j.at("joint_output"));
  return t;
}

inline json to_json(const TransitionReport& r) {
  json res = json::object();
  for (const auto& [name, v] : r.residuals) res[name] = number(v);
  return json{{"mode", to_string(r.mode)},   {"gp_residual", number(r.gp_residual)},
              {"residuals", std::move(res)}, {"max_residual", number(r.max_residual)},
              {"passed", r.passed}};
}

// ---------------------------------------------------------------------------
// Feasibility

inline json to_json(const FeasibilityOptions& o) {
  return json{{"max_iter", o.max_iter},
              {"residual_tol", o.residual_tol},
              {"stall_window", o.stall_window},
              {"record_trace", o.record_trace},
              {"split_affine", o.split_affine}};
}

inline FeasibilityOptions options_from_json(const json& j) {
  FeasibilityOptions o;
  o.max_iter = j.value("max_iter", o.max_iter);
  o.residual_tol = j.value("residual_tol", o.residual_tol);
  o.stall_window = j.value("stall_window", o.stall_window);
  o.record_trace = j.value("record_trace", o.record_trace);
  o.split_affine = j.value("split_affine", o.split_affine);
  return o;
}

inline json to_json(const FeasibilityProblem& p) {
  return json{{"beta", p.beta},         {"rho", to_json(p.rho)}, {"H", to_json(p.h)},
              {"sigma", to_json(p.sigma)}, {"K", to_json(p.k)},   {"options", to_json(p.options)}};
}

inline FeasibilityProblem problem_from_json(const json& j) {
  FeasibilityProblem p{density_from_json(j.at("rho")), density_from_json(j.at("sigma")),
                       hermitian_from_json(j.at("H")), hermitian_from_json(j.at("K")), j.at("beta").get<double>(),
                       j.contains("options") ? options_from_json(j.at("options")) : FeasibilityOptions{}};
  p.validate();
  return p;
}

inline json to_json(const WitnessCheck& w) {
  return json{{"completeness", number(w.completeness)},
              {"choi_min_eigenvalue", number(w.choi_min_eigenvalue)},
              {"state_residual", number(w.state_residual)},
              {"gibbs_residual", number(w.gibbs_residual)}};
}

inline json to_json(const FeasibilityReport& r, const FeasibilityProblem* p = nullptr) {
  json j{{"verdict", to_string(r.verdict)},
         {"solver", r.solver},
         {"residual", number(r.residual)},
         {"iterations", r.iterations},
         {"monotone_gap", number(r.monotone_gap)},
         {"drift_jumps", r.drift_jumps},
         {"note", r.note}};
  if (!r.residual_trace.empty()) {
    json trace = json::array();
    for (double v : r.residual_trace) trace.push_back(number(v));
    j["residual_trace"] = std::move(trace);
  }
  j["witness"] = r.witness ? to_json(*r.witness) : json(nullptr);
  if (r.witness && p) j["witness_check"] = to_json(verify_witness(*p, *r.witness));
  return j;
}

// ---------------------------------------------------------------------------
// Harness

inline json to_json(const DivergenceSpec& s) {
  json j{{"family", to_string(s.family)}};
  if (s.family != DivergenceFamily::RelativeEntropy) j["alpha"] = s.alpha;
  return j;
}

inline DivergenceSpec spec_from_json(const json& j) {
  DivergenceSpec s{family_from_string(j.at("family").get<std::string>()), j.value("alpha", 1.0)};
  s.validate();
  return s;
}

inline json to_json(const HarnessConfig& c) {
  return json{{"master_seed", c.master_seed},
              {"trials", c.trials},
              {"dims", c.dims},
              {"sigma_min_eig", c.sigma_min_eig},
              {"tolerance", c.tolerance},
              {"alpha_grid", c.alpha_grid},
              {"search_trials", c.search_trials},
              {"search_dims", c.search_dims},
              {"hill_climb_steps", c.hill_climb_steps},
              {"hill_climb_step", c.hill_climb_step},
              {"witness_threshold", c.witness_threshold},
              {"support_channels", c.support_channels},
              {"support_inputs", c.support_inputs},
              {"las_instances", c.las_instances},
              {"las_noise", c.las_noise},
              {"beta", c.beta},
              {"channel_pool", to_string(c.channel_pool)},
              {"max_witnesses", c.max_witnesses}};
}

/// Missing keys keep their defaults.
inline HarnessConfig config_from_json(const json& j) {
  HarnessConfig c;
  c.master_seed = j.value("master_seed", c.master_seed);
  c.trials = j.value("trials", c.trials);
  c.dims = j.value("dims", c.dims);
  c.sigma_min_eig = j.value("sigma_min_eig", c.sigma_min_eig);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.alpha_grid = j.value("alpha_grid", c.alpha_grid);
  c.search_trials = j.value("search_trials", c.search_trials);
  c.search_dims = j.value("search_dims", c.search_dims);
  c.hill_climb_steps = j.value("hill_climb_steps", c.hill_climb_steps);
  c.hill_climb_step = j.value("hill_climb_step", c.hill_climb_step);
  c.witness_threshold = j.value("witness_threshold", c.witness_threshold);
  c.support_channels = j.value("support_channels", c.support_channels);
  c.support_inputs = j.value("support_inputs", c.support_inputs);
  c.las_instances = j.value("las_instances", c.las_instances);
  c.las_noise = j.value("las_noise", c.las_noise);
  c.beta = j.value("beta", c.beta);
  if (j.contains("channel_pool")) c.channel_pool = channel_pool_from_string(j.at("channel_pool").get<std::string>());
  c.max_witnesses = j.value("max_witnesses", c.max_witnesses);
  c.validate();
  return c;
}

inline json to_json(const ViolationWitness& w) {
  json states = json::object();
  for (const auto& [name, s] : w.states) states[name] = to_json(s);
  json j{{"check", w.check},
         {"relation", w.relation},
         {"spec", to_json(w.spec)},
         {"dims", w.dims},
         {"states", std::move(states)}};
  j["channel"] = w.channel ? to_json(*w.channel) : json(nullptr);
  j["gap"] = number(w.gap);
  j["seed"] = json{{"master_seed", w.master_seed},
                   {"stream_index", w.stream_index},
                   {"trial", w.trial},
                   {"origin", w.origin}};
  return j;
}

inline ViolationWitness witness_from_json(const json& j) {
  ViolationWitness w;
  w.check = j.at("check").get<std::string>();
  w.relation = j.at("relation").get<std::string>();
  w.spec = spec_from_json(j.at("spec"));
  w.dims = j.value("dims", std::vector<int>{});
  for (const auto& [name, m] : j.at("states").items()) w.states.emplace_back(name, density_from_json(m));
  if (j.contains("channel") && !j.at("channel").is_null()) w.channel = channel_from_json(j.at("channel"));
  w.gap = read_number(j.at("gap"));
  const json& seed = j.at("seed");
  w.master_seed = seed.at("master_seed").get<std::uint64_t>();
  w.stream_index = seed.at("stream_index").get<std::uint64_t>();
  w.trial = seed.at("trial").get<int>();
  w.origin = seed.value("origin", std::string("random"));
  return w;
}

inline json to_json(const CheckReport& r) {
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = number(v);
  json witnesses = json::array();
  for (const ViolationWitness& w : r.witnesses) witnesses.push_back(to_json(w));
  return json{{"check_name", r.check_name},
              {"kind", r.kind},
              {"trials_run", r.trials_run},
              {"tolerance", number(r.tolerance)},
              {"max_violation", number(r.max_violation)},
              {"metrics", std::move(metrics)},
              {"witness_count", r.witness_count},
              {"witnesses", std::move(witnesses)},
              {"counts_toward_suite", r.counts_toward_suite},
              {"passed", r.passed}};
}

inline json to_json(const SuiteReport& s) {
  json checks = json::array();
  for (const CheckReport& r : s.checks) checks.push_back(to_json(r));
  return json{{"config", to_json(s.config)}, {"passed", s.passed}, {"checks", std::move(checks)}};
}

/// Long-format table: check_name,trial,violation.
inline std::string to_csv(const SuiteReport& s) {
  std::ostringstream os;
  os.precision(17);
  os << "check_name,trial,violation\n";
  for (const CheckReport& r : s.checks)
    for (std::size_t t = 0; t < r.trial_values.size(); ++t) {
      const double v = r.trial_values[t];
      os << r.check_name << ',' << t << ',';
      if (std::isinf(v))
        os << (v > 0 ? "inf" : "-inf");
      else
        os << v;
      os << '\n';
    }
  return os.str();
}

inline json to_json(const LasReport& r) {
  json steps = json::array();
  for (const LasStep& s : r.steps)
    steps.push_back(json{{"n", s.n},
                         {"d_n", number(s.d_n)},
                         {"bound", number(s.bound)},
                         {"max_marginal_distance", number(s.max_marginal_distance)},
                         {"holds", s.holds}});
  return json{{"noise", r.noise}, {"steps", std::move(steps)}, {"max_violation", number(r.max_violation)},
              {"passed", r.passed}};
}

// ---------------------------------------------------------------------------
// Files

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace athermality::io
