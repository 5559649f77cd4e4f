#pragma once

// Existence of a Gibbs-preserving channel realizing (ρ, H) → (σ, K).
//
// Three deciders, cheapest first:
//   monotone_screen            ΔF must not increase; a positive gap is a proof of infeasibility.
//   classical_gp_feasibility   exact LP when all four operators commute.
//   solve_choi_feasibility     convex projections on the Choi matrix. Failing to
//                              converge is NOT an infeasibility certificate.

#include <optional>
#include <string>
#include <vector>

#include "lp.hpp"
#include "thermo.hpp"

namespace athermality {

inline constexpr int kMaxFeasibilityDim = 4;
inline constexpr double kMonotoneGapTol = 1e-9;
inline constexpr double kWitnessTol = 1e-6;

struct FeasibilityOptions {
  int max_iter = 5000;
  double residual_tol = 1e-7;
  int stall_window = 200;
  bool record_trace = false;
  // Project onto each affine set separately instead of their stacked intersection.
  bool split_affine = false;
};

struct FeasibilityProblem {
  DensityMatrix rho;
  DensityMatrix sigma;
  HermitianOperator h;
  HermitianOperator k;
  double beta = 1.0;
  FeasibilityOptions options;

  void validate() const {
    if (rho.dim() != h.dim()) throw DimensionMismatch("rho and H dimensions differ");
    if (sigma.dim() != k.dim()) throw DimensionMismatch("sigma and K dimensions differ");
    if (rho.dim() > kMaxFeasibilityDim || sigma.dim() > kMaxFeasibilityDim) {
      throw DimensionTooLarge("feasibility is limited to dim <= 4 per side");
    }
    check_beta(beta);
    if (options.max_iter < 1 || options.stall_window < 1 || !(options.residual_tol > 0)) {
      throw ConfigError("invalid feasibility options");
    }
  }
};

enum class Verdict { Feasible, InfeasibleByMonotone, InfeasibleByLP, NotFoundWithinBudget };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return "Feasible";
    case Verdict::InfeasibleByMonotone: return "InfeasibleByMonotone";
    case Verdict::InfeasibleByLP: return "InfeasibleByLP";
    case Verdict::NotFoundWithinBudget: return "NotFoundWithinBudget";
  }
  return "unknown";
}

struct FeasibilityReport {
  Verdict verdict = Verdict::NotFoundWithinBudget;
  std::string solver;
  double residual = 0.0;
  int iterations = 0;
  std::optional<QuantumChannel> witness;
  double monotone_gap = 0.0;
  std::vector<double> residual_trace;
  int drift_jumps = 0;
  std::string note;
};

/// ΔF_β(σ, K) − ΔF_β(ρ, H). Positive means the transition would create athermality.
inline double monotone_screen(const FeasibilityProblem& p) {
  return delta_f(ThermoObject(p.sigma, p.k), p.beta) - delta_f(ThermoObject(p.rho, p.h), p.beta);
}

struct WitnessCheck {
  double completeness = 0.0;
  double choi_min_eigenvalue = 0.0;
  double state_residual = 0.0;  // ‖T(ρ) − σ‖₁
  double gibbs_residual = 0.0;  // ‖T(ω_H) − ω_K‖₁
  bool ok(double tol = kWitnessTol) const {
    return completeness <= tol && choi_min_eigenvalue >= -tol && state_residual <= tol && gibbs_residual <= tol;
  }
};

/// Re-checks a witness through the Kraus action, independently of how it was found.
inline WitnessCheck verify_witness(const FeasibilityProblem& p, const QuantumChannel& t) {
  WitnessCheck c;
  c.completeness = t.completeness_residual();
  c.choi_min_eigenvalue = eig_hermitian(HermitianOperator(kraus_to_choi(t))).eigenvalues.minCoeff();
  c.state_residual = trace_norm(t.apply(p.rho.matrix()) - p.sigma.matrix());
  c.gibbs_residual =
      trace_norm(t.apply(gibbs_state(p.beta, p.h).matrix()) - gibbs_state(p.beta, p.k).matrix());
  return c;
}

// ---------------------------------------------------------------------------
// Classical fast path

namespace detail {

inline bool commutes(const CMatrix& a, const CMatrix& b, double tol = 1e-10) {
  return max_abs(a * b - b * a) <= tol;
}

/// Unitary diagonalizing two commuting Hermitian matrices.
inline std::optional<CMatrix> joint_eigenbasis(const CMatrix& a, const CMatrix& b) {
  for (double t : {0.6180339887498949, 1.4142135623730951, 2.718281828459045, 0.1234567891}) {
    const Spectrum s = eig_hermitian(HermitianOperator(CMatrix(a + t * b), 1e-8));
    const CMatrix v = s.eigenvectors;
    const CMatrix da = v.adjoint() * a * v;
    const CMatrix db = v.adjoint() * b * v;
    const double off_a = max_abs(da - CMatrix(da.diagonal().asDiagonal()));
    const double off_b = max_abs(db - CMatrix(db.diagonal().asDiagonal()));
    if (off_a <= 1e-9 && off_b <= 1e-9) return v;
  }
  return std::nullopt;
}

inline RVector diagonal_in(const CMatrix& basis, const CMatrix& m) {
  return (basis.adjoint() * m * basis).diagonal().real();
}

}  // namespace detail

inline bool is_commuting_instance(const FeasibilityProblem& p) {
  return detail::commutes(p.rho.matrix(), p.h.matrix()) && detail::commutes(p.sigma.matrix(), p.k.matrix());
}

/// Column-stochastic M with M q = q', M p = p' in the shared eigenbases.
inline FeasibilityReport classical_gp_feasibility(const FeasibilityProblem& p) {
  p.validate();
  if (!is_commuting_instance(p)) throw NotCommuting("classical fast path needs [rho,H] = [sigma,K] = 0");
  const auto vin = detail::joint_eigenbasis(p.rho.matrix(), p.h.matrix());
  const auto vout = detail::joint_eigenbasis(p.sigma.matrix(), p.k.matrix());
  if (!vin || !vout) throw NotCommuting("could not find a shared eigenbasis");

  const int din = p.rho.dim();
  const int dout = p.sigma.dim();
  const RVector pin = detail::diagonal_in(*vin, p.rho.matrix());
  const RVector qin = detail::diagonal_in(*vin, gibbs_state(p.beta, p.h).matrix());
  const RVector pout = detail::diagonal_in(*vout, p.sigma.matrix());
  const RVector qout = detail::diagonal_in(*vout, gibbs_state(p.beta, p.k).matrix());

  // variable M(j, i) at index j*din + i
  const int nv = din * dout;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(din + 2 * dout, nv);
  Eigen::VectorXd b(din + 2 * dout);
  for (int i = 0; i < din; ++i) {
    for (int j = 0; j < dout; ++j) a(i, j * din + i) = 1.0;
    b[i] = 1.0;
  }
  for (int j = 0; j < dout; ++j) {
    for (int i = 0; i < din; ++i) {
      a(din + j, j * din + i) = qin[i];
      a(din + dout + j, j * din + i) = pin[i];
    }
    b[din + j] = qout[j];
    b[din + dout + j] = pout[j];
  }
  const lp::FeasibilityResult sol = lp::find_feasible_point(a, b);

  FeasibilityReport rep;
  rep.solver = "classical_lp";
  rep.iterations = sol.pivots;
  rep.monotone_gap = monotone_screen(p);
  rep.residual = sol.infeasibility;
  if (!sol.feasible) {
    rep.verdict = Verdict::InfeasibleByLP;
    rep.note = "no column-stochastic matrix maps the Gibbs and state spectra as required";
    return rep;
  }
  std::vector<CMatrix> kraus;
  for (int j = 0; j < dout; ++j)
    for (int i = 0; i < din; ++i) {
      const double m = sol.x[j * din + i];
      if (m <= 0.0) continue;
      kraus.push_back(std::sqrt(m) * vout->col(j) * vin->col(i).adjoint());
    }
  rep.witness = restore_trace_preservation(din, dout, std::move(kraus));
  rep.residual = (a * sol.x - b).cwiseAbs().maxCoeff();
  const WitnessCheck check = verify_witness(p, *rep.witness);
  rep.verdict = check.ok() ? Verdict::Feasible : Verdict::NotFoundWithinBudget;
  if (!check.ok()) rep.note = "LP solution failed independent witness verification";
  return rep;
}

/// Extracts the stochastic matrix M(j, i) = ⟨j|T(|i⟩⟨i|)|j⟩ of a channel in the computational basis.
inline Eigen::MatrixXd transition_matrix(const QuantumChannel& t) {
  Eigen::MatrixXd m(t.dim_out(), t.dim_in());
  for (int i = 0; i < t.dim_in(); ++i) {
    CMatrix e = CMatrix::Zero(t.dim_in(), t.dim_in());
    e(i, i) = 1.0;
    m.col(i) = t.apply(e).diagonal().real();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Choi-space projections

/// {J : L(J) = B} for a linear map L on N×N matrices, projected in the
/// Frobenius metric through a precomputed pseudo-inverse.
class AffineConstraint {
 public:
  template <class Map>
  AffineConstraint(std::string name, int n, Map&& map, const CMatrix& target) : name_(std::move(name)), n_(n) {
    const CMatrix probe = map(CMatrix::Zero(n, n));
    out_rows_ = static_cast<int>(probe.rows());
    out_cols_ = static_cast<int>(probe.cols());
    const int m = out_rows_ * out_cols_;
    CMatrix a(m, n * n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) {
        CMatrix e = CMatrix::Zero(n, n);
        e(r, c) = 1.0;
        const CMatrix img = map(e);
        a.col(c * n + r) = Eigen::Map<const CVector>(img.data(), m);
      }
    a_ = std::move(a);
    b_ = Eigen::Map<const CVector>(target.data(), m);
    pinv_ = a_.completeOrthogonalDecomposition().pseudoInverse();
  }

  /// Intersection of several constraint sets as one stacked system.
  static AffineConstraint stack(std::string name, const std::vector<AffineConstraint>& parts) {
    AffineConstraint out;
    out.name_ = std::move(name);
    out.n_ = parts.at(0).n_;
    Eigen::Index rows = 0;
    for (const AffineConstraint& c : parts) rows += c.a_.rows();
    out.a_.resize(rows, out.n_ * out.n_);
    out.b_.resize(rows);
    Eigen::Index at = 0;
    for (const AffineConstraint& c : parts) {
      out.a_.middleRows(at, c.a_.rows()) = c.a_;
      out.b_.segment(at, c.b_.size()) = c.b_;
      at += c.a_.rows();
    }
    out.out_rows_ = static_cast<int>(rows);
    out.out_cols_ = 1;
    out.pinv_ = out.a_.completeOrthogonalDecomposition().pseudoInverse();
    return out;
  }

  const std::string& name() const { return name_; }

  CMatrix project(const CMatrix& j) const {
    const Eigen::Map<const CVector> x(j.data(), j.size());
    const CVector corr = pinv_ * (a_ * x - b_);
    CMatrix out = j - Eigen::Map<const CMatrix>(corr.data(), n_, n_);
    return hermitian_part(out);
  }

  /// L(J) − B as a matrix.
  CMatrix violation(const CMatrix& j) const {
    const Eigen::Map<const CVector> x(j.data(), j.size());
    const CVector v = a_ * x - b_;
    return Eigen::Map<const CMatrix>(v.data(), out_rows_, out_cols_);
  }

 private:
  AffineConstraint() = default;

  std::string name_;
  int n_ = 0;
  int out_rows_ = 0;
  int out_cols_ = 0;
  CMatrix a_;
  CVector b_;
  CMatrix pinv_;
};

inline CMatrix project_psd(const CMatrix& j) {
  const Spectrum s = eig_hermitian(HermitianOperator(hermitian_part(j), 1e-6));
  return hermitian_part(from_spectrum(s, s.eigenvalues.cwiseMax(0.0)));
}

/// The three affine sets of the GP-channel problem: trace preservation, Gibbs
/// preservation ω_H ↦ ω_K and the state map ρ ↦ σ.
inline std::vector<AffineConstraint> choi_constraints(const FeasibilityProblem& p) {
  const int din = p.rho.dim();
  const int dout = p.sigma.dim();
  const int n = din * dout;
  const CMatrix omega_h = gibbs_state(p.beta, p.h).matrix();
  const CMatrix omega_k = gibbs_state(p.beta, p.k).matrix();
  const CMatrix rho = p.rho.matrix();
  std::vector<AffineConstraint> sets;
  sets.emplace_back(
      "trace_preservation", n,
      [=](const CMatrix& j) {
        const int dims[] = {dout, din};
        const int keep[] = {1};
        return partial_trace(j, dims, keep);
      },
      CMatrix::Identity(din, din));
  sets.emplace_back(
      "gibbs_preservation", n, [=](const CMatrix& j) { return apply_choi(j, din, dout, omega_h); }, omega_k);
  sets.emplace_back(
      "state_map", n, [=](const CMatrix& j) { return apply_choi(j, din, dout, rho); }, p.sigma.matrix());
  return sets;
}

/// Largest trace-norm violation of the affine constraints at J.
inline double affine_residual(const std::vector<AffineConstraint>& sets, const CMatrix& j) {
  double r = 0.0;
  for (const AffineConstraint& c : sets) r = std::max(r, trace_norm(hermitian_part(c.violation(j))));
  return r;
}

enum class ProjectionMethod { DouglasRachford, Dykstra };

inline std::string to_string(ProjectionMethod m) {
  return m == ProjectionMethod::DouglasRachford ? "douglas_rachford" : "dykstra";
}

namespace detail {

inline constexpr double kMaxDriftJump = 1073741824.0;  // 2^30

/// Douglas–Rachford can drift with (nearly) constant velocity while its PSD
/// shadow barely moves. Returns the largest power-of-two multiple t of the
/// step such that the shadow of x + t·step has affine residual within 0.1% of
/// `residual` (0 if none), or kMaxDriftJump when the drift is unbounded.
template <class Residual>
double drift_jump(const CMatrix& x, const CMatrix& step, double residual, Residual&& residual_of) {
  const double limit = residual * (1.0 + 1e-3) + 1e-15;
  double good = 0.0;
  for (double t = 1.0; t <= kMaxDriftJump; t *= 2.0) {
    if (residual_of(project_psd(x + t * step)) > limit) break;
    good = t;
  }
  return good;
}

inline QuantumChannel channel_from_psd_choi(const CMatrix& j, int din, int dout) {
  const Spectrum s = eig_hermitian(HermitianOperator(j, 1e-6));
  const double lmax = s.eigenvalues.maxCoeff();
  std::vector<CMatrix> kraus;
  for (Eigen::Index a = s.eigenvalues.size() - 1; a >= 0; --a) {
    const double lam = s.eigenvalues[a];
    if (lam <= 1e-12 * lmax) continue;
    CMatrix k(dout, din);
    for (int o = 0; o < dout; ++o)
      for (int i = 0; i < din; ++i) k(o, i) = std::sqrt(lam) * s.eigenvectors(o * din + i, a);
    kraus.push_back(std::move(k));
  }
  return restore_trace_preservation(din, dout, std::move(kraus));
}

}  // namespace detail

/// Projection solver on the Choi matrix J: find J ⪰ 0 with Tr_out J = I,
/// J(ω_H) = ω_K and J(ρ) = σ. Starts from the Gibbs replacer ω_K ⊗ I_in.
///
/// Douglas–Rachford (default) reflects between the stacked affine set and the
/// PSD cone; the residual is measured at the PSD shadow P_psd(x). Dykstra
/// cycles through the affine sets (stacked, or each in turn with
/// split_affine) and the cone, PSD last. In both cases the candidate is an
/// exact CP map and the residual is its largest affine violation in trace norm.
/// When Douglas–Rachford drifts with a constant step and a frozen shadow, the
/// iterate is advanced along the step as far as the shadow stays unchanged;
/// a drift that never changes the shadow counts as a stall.
/// The run stops as NotFoundWithinBudget when the progress measure improves by
/// less than 0.1% over stall_window iterations: the fixed-point step
/// ‖x_{k+1} − x_k‖ for Douglas–Rachford (nonincreasing, tends to the gap of an
/// infeasible problem), the residual itself for Dykstra.
inline FeasibilityReport solve_choi_feasibility(const FeasibilityProblem& p,
                                                ProjectionMethod method = ProjectionMethod::DouglasRachford) {
  p.validate();
  const int din = p.rho.dim();
  const int dout = p.sigma.dim();
  const int n = din * dout;
  const FeasibilityOptions& opt = p.options;
  const std::vector<AffineConstraint> sets = choi_constraints(p);
  std::vector<AffineConstraint> projections = sets;
  if (!opt.split_affine || method == ProjectionMethod::DouglasRachford) {
    projections = {AffineConstraint::stack("affine", sets)};
  }

  FeasibilityReport rep;
  rep.solver = "choi_" + to_string(method);
  rep.monotone_gap = monotone_screen(p);

  CMatrix x = tensor(gibbs_state(p.beta, p.k).matrix(), CMatrix::Identity(din, din));
  CMatrix candidate = project_psd(x);
  std::vector<CMatrix> increments(projections.size() + 1, CMatrix::Zero(n, n));
  std::vector<double> progress_history;
  progress_history.reserve(opt.max_iter);
  CMatrix previous_step;
  bool drift_locked = false;
  // relative improvement of the progress measure below 0.1% over the window
  auto window_stalled = [&](double progress) {
    const std::size_t w = static_cast<std::size_t>(opt.stall_window);
    return progress_history.size() >= w && progress > (1.0 - 1e-3) * progress_history[progress_history.size() - w];
  };

  double residual = affine_residual(sets, candidate);
  double best = residual;
  CMatrix best_candidate = candidate;
  int iter = 0;
  bool stalled = false;
  while (best > opt.residual_tol && iter < opt.max_iter) {
    ++iter;
    double progress = 0.0;
    if (method == ProjectionMethod::DouglasRachford) {
      const CMatrix reflected = projections[0].project(2.0 * candidate - x);
      const CMatrix step = reflected - candidate;
      x += step;
      candidate = project_psd(x);
      progress = step.norm();
      const bool constant_step =
          previous_step.size() > 0 && progress > 0.0 && (step - previous_step).norm() <= 1e-6 * progress;
      if (constant_step || window_stalled(progress)) {
        const double current = affine_residual(sets, candidate);
        const double jump = detail::drift_jump(x, step, current,
                                               [&](const CMatrix& c) { return affine_residual(sets, c); });
        if (jump >= detail::kMaxDriftJump) {
          drift_locked = true;
        } else if (jump > 0.0) {
          x += jump * step;
          candidate = project_psd(x);
          progress_history.clear();
          ++rep.drift_jumps;
        }
      }
      previous_step = step;
    } else {
      for (std::size_t s = 0; s <= projections.size(); ++s) {
        const CMatrix z = x + increments[s];
        x = s < projections.size() ? projections[s].project(z) : project_psd(z);
        increments[s] = z - x;
      }
      candidate = x;
    }
    residual = affine_residual(sets, candidate);
    if (method == ProjectionMethod::Dykstra) progress = residual;
    if (opt.record_trace) rep.residual_trace.push_back(residual);
    if (residual < best) {
      best = residual;
      best_candidate = candidate;
    }
    if (drift_locked) {
      stalled = true;
      break;
    }
    if (best > opt.residual_tol && window_stalled(progress)) {
      stalled = true;
      break;
    }
    progress_history.push_back(progress);
  }
  rep.iterations = iter;
  rep.residual = best;

  if (best <= opt.residual_tol) {
    QuantumChannel witness = detail::channel_from_psd_choi(best_candidate, din, dout);
    const WitnessCheck check = verify_witness(p, witness);
    if (check.ok()) {
      rep.verdict = Verdict::Feasible;
      rep.witness = std::move(witness);
      return rep;
    }
    rep.note = "converged iterate failed independent witness verification; ";
  }
  rep.verdict = Verdict::NotFoundWithinBudget;
  rep.note += stalled ? "residual stalled" : "iteration budget exhausted";
  rep.note += "; this is not a certificate of infeasibility";
  return rep;
}

/// Screen, then the LP when everything commutes, else the Choi solver.
inline FeasibilityReport decide_feasibility(const FeasibilityProblem& p) {
  p.validate();
  const double gap = monotone_screen(p);
  if (gap > kMonotoneGapTol) {
    FeasibilityReport rep;
    rep.verdict = Verdict::InfeasibleByMonotone;
    rep.solver = "monotone_screen";
    rep.monotone_gap = gap;
    rep.note = "the target has larger free-energy difference than the source";
    return rep;
  }
  if (is_commuting_instance(p)) return classical_gp_feasibility(p);
  return solve_choi_feasibility(p);
}

}  // namespace athermality
