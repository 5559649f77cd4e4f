#pragma once

// Entropies and divergences, natural logarithms throughout. 0·ln 0 := 0.

#include <compare>
#include <limits>
#include <string>

#include "linalg.hpp"

namespace athermality {

/// Real number or +∞. +∞ only ever comes from a support violation.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  static constexpr ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static constexpr ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  /// Finite value; +inf as a double otherwise.
  constexpr double value() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
    return a.value_ <=> b.value_;
  }
  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return finite(a.value_ + b.value_);
  }
  friend ExtendedReal operator*(double s, const ExtendedReal& a) {
    if (a.infinite_) return infinity();
    return finite(s * a.value_);
  }

 private:
  constexpr ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_ = 0.0;
  bool infinite_ = false;
};

enum class DivergenceFamily { RelativeEntropy, RenyiPetz, RenyiSandwiched };

inline std::string to_string(DivergenceFamily f) {
  switch (f) {
    case DivergenceFamily::RelativeEntropy: return "relative_entropy";
    case DivergenceFamily::RenyiPetz: return "renyi_petz";
    case DivergenceFamily::RenyiSandwiched: return "renyi_sandwiched";
  }
  return "unknown";
}

inline DivergenceFamily family_from_string(const std::string& s) {
  if (s == "relative_entropy" || s == "relent") return DivergenceFamily::RelativeEntropy;
  if (s == "renyi_petz" || s == "petz") return DivergenceFamily::RenyiPetz;
  if (s == "renyi_sandwiched" || s == "sandwiched") return DivergenceFamily::RenyiSandwiched;
  throw ConfigError("unknown divergence family '" + s + "'");
}

struct DivergenceSpec {
  DivergenceFamily family = DivergenceFamily::RelativeEntropy;
  double alpha = 1.0;  // ignored for RelativeEntropy

  static DivergenceSpec relative_entropy() { return {}; }
  static DivergenceSpec petz(double alpha) { return {DivergenceFamily::RenyiPetz, alpha}; }
  static DivergenceSpec sandwiched(double alpha) { return {DivergenceFamily::RenyiSandwiched, alpha}; }

  /// Petz: α ∈ (0,1)∪(1,2]; sandwiched: α ∈ [1/2,1)∪(1,∞). These are the
  /// ranges where data processing holds.
  bool valid() const {
    switch (family) {
      case DivergenceFamily::RelativeEntropy: return true;
      case DivergenceFamily::RenyiPetz: return alpha > 0.0 && alpha != 1.0 && alpha <= 2.0;
      case DivergenceFamily::RenyiSandwiched: return alpha >= 0.5 && alpha != 1.0 && std::isfinite(alpha);
    }
    return false;
  }

  void validate() const {
    if (!valid()) {
      throw AlphaOutOfRange("alpha = " + std::to_string(alpha) + " outside the valid range of " + to_string(family));
    }
  }

  std::string label() const {
    if (family == DivergenceFamily::RelativeEntropy) return to_string(family);
    std::ostringstream os;
    os << to_string(family) << "(alpha=" << alpha << ")";
    return os.str();
  }
};

inline constexpr double kSupportLeakTol = 1e-10;

namespace detail {

inline void check_pair(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("divergence arguments have different dimensions");
}

/// Weight of rho outside supp(sigma).
inline double support_leak(const DensityMatrix& rho, const Spectrum& sigma_spec, double tau) {
  const double cutoff = tau * sigma_spec.eigenvalues.maxCoeff();
  double leak = 0.0;
  for (Eigen::Index j = 0; j < sigma_spec.eigenvalues.size(); ++j) {
    if (sigma_spec.eigenvalues[j] > cutoff) continue;
    const CVector v = sigma_spec.eigenvectors.col(j);
    leak += (v.adjoint() * rho.matrix() * v)(0, 0).real();
  }
  return leak;
}

}  // namespace detail

inline double von_neumann_entropy(const DensityMatrix& rho, double tau = kSupportTol) {
  const RVector ev = eig_hermitian(rho.as_operator()).eigenvalues;
  const double cutoff = tau * ev.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cutoff) s -= ev[i] * std::log(ev[i]);
  return s;
}

/// S(ρ‖σ) = Tr ρ ln ρ − Tr ρ ln σ on supp(σ); +∞ if supp(ρ) ⊄ supp(σ).
inline ExtendedReal relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                                     double tau = kSupportTol) {
  detail::check_pair(rho, sigma);
  const Spectrum ss = eig_hermitian(sigma.as_operator());
  if (detail::support_leak(rho, ss, tau) > kSupportLeakTol) return ExtendedReal::infinity();

  const double neg_entropy = -von_neumann_entropy(rho, tau);
  const double cutoff = tau * ss.eigenvalues.maxCoeff();
  double cross = 0.0;  // Tr ρ ln σ
  for (Eigen::Index j = 0; j < ss.eigenvalues.size(); ++j) {
    if (ss.eigenvalues[j] <= cutoff) continue;
    const CVector v = ss.eigenvectors.col(j);
    cross += std::log(ss.eigenvalues[j]) * (v.adjoint() * rho.matrix() * v)(0, 0).real();
  }
  return ExtendedReal::finite(neg_entropy - cross);
}

namespace detail {

inline HermitianOperator power_on_support(const DensityMatrix& a, double p, double tau) {
  return matrix_fn_on_support(a.as_operator(), [p](double x) { return std::pow(x, p); }, tau);
}

}  // namespace detail

/// Petz: (α−1)⁻¹ ln Tr ρ^α σ^{1−α}.
/// Sandwiched: (α−1)⁻¹ ln Tr (σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α.
/// Non-integer and negative powers act on the support only.
inline ExtendedReal renyi_divergence(const DivergenceSpec& spec, const DensityMatrix& rho,
                                     const DensityMatrix& sigma, double tau = kSupportTol) {
  spec.validate();
  if (spec.family == DivergenceFamily::RelativeEntropy) return relative_entropy(rho, sigma, tau);
  detail::check_pair(rho, sigma);
  const double alpha = spec.alpha;
  const Spectrum ss = eig_hermitian(sigma.as_operator());
  const bool leaks = detail::support_leak(rho, ss, tau) > kSupportLeakTol;
  if (leaks && alpha > 1.0) return ExtendedReal::infinity();

  double q = 0.0;
  if (spec.family == DivergenceFamily::RenyiPetz) {
    const CMatrix ra = detail::power_on_support(rho, alpha, tau).matrix();
    const CMatrix sb = detail::power_on_support(sigma, 1.0 - alpha, tau).matrix();
    q = trace_product(ra, sb);
  } else {
    const double e = (1.0 - alpha) / (2.0 * alpha);
    const CMatrix s = detail::power_on_support(sigma, e, tau).matrix();
    const CMatrix inner = hermitian_part(s * rho.matrix() * s);
    const RVector ev = eig_hermitian(inner).eigenvalues;
    const double cutoff = tau * std::max(0.0, ev.maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev[i] > cutoff) q += std::pow(ev[i], alpha);
  }
  if (!(q > 0.0)) return ExtendedReal::infinity();
  return ExtendedReal::finite(std::log(q) / (alpha - 1.0));
}

inline ExtendedReal divergence(const DivergenceSpec& spec, const DensityMatrix& rho, const DensityMatrix& sigma,
                               double tau = kSupportTol) {
  if (spec.family == DivergenceFamily::RelativeEntropy) return relative_entropy(rho, sigma, tau);
  return renyi_divergence(spec, rho, sigma, tau);
}

/// I(1:2) = S(ρ1) + S(ρ2) − S(ρ12) for a bipartite state with factor dims {d1, d2}.
inline double mutual_information(const DensityMatrix& rho12, std::span<const int> dims) {
  if (dims.size() != 2) throw DimensionMismatch("mutual_information expects two factor dims");
  const int k0[] = {0};
  const int k1[] = {1};
  const DensityMatrix r1 = partial_trace(rho12, dims, k0);
  const DensityMatrix r2 = partial_trace(rho12, dims, k1);
  return von_neumann_entropy(r1) + von_neumann_entropy(r2) - von_neumann_entropy(rho12);
}

inline double mutual_information(const DensityMatrix& rho12, std::initializer_list<int> dims) {
  return mutual_information(rho12, std::span<const int>(dims.begin(), dims.size()));
}

}  // namespace athermality
