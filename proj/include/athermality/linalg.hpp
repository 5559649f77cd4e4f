#pragma once

// Dense complex Hermitian linear algebra for small (dim <= 64) systems.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace athermality {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdFloor = 1e-10;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kSupportTol = 1e-12;
inline constexpr int kMaxDim = 64;

inline double max_abs(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& a, double tol = kHermitianTol) {
  return a.rows() == a.cols() && max_abs(a - a.adjoint()) <= tol;
}

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline double real_trace(const CMatrix& a) { return a.trace().real(); }

/// Re Tr(a b) without forming the product.
inline double trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum().real();
}

inline std::string describe_dim(Eigen::Index r, Eigen::Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

/// Hermitian matrix; the stored entries are exactly Hermitian (symmetrized on
/// construction after the tolerance check).
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(const CMatrix& m, double tol = kHermitianTol) {
    if (m.rows() != m.cols()) {
      throw DimensionMismatch("Hermitian operator must be square, got " + describe_dim(m.rows(), m.cols()));
    }
    if (m.rows() == 0) throw DimensionMismatch("Hermitian operator must have positive dimension");
    if (!is_hermitian(m, tol)) {
      throw NonHermitianInput("matrix is not Hermitian within tolerance");
    }
    m_ = hermitian_part(m);
  }

  static HermitianOperator identity(int dim) { return HermitianOperator(CMatrix::Identity(dim, dim)); }
  static HermitianOperator zero(int dim) { return HermitianOperator(CMatrix::Zero(dim, dim)); }
  static HermitianOperator diagonal(const RVector& d) {
    return HermitianOperator(CMatrix(d.cast<cplx>().asDiagonal()));
  }
  static HermitianOperator diagonal(std::initializer_list<double> d) {
    RVector v(static_cast<Eigen::Index>(d.size()));
    std::copy(d.begin(), d.end(), v.data());
    return diagonal(v);
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    check_same_dim(a, b);
    return HermitianOperator(CMatrix(a.m_ + b.m_));
  }
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    check_same_dim(a, b);
    return HermitianOperator(CMatrix(a.m_ - b.m_));
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) {
    return HermitianOperator(CMatrix(s * a.m_));
  }

  /// H + c·I.
  HermitianOperator shifted(double c) const {
    return HermitianOperator(CMatrix(m_ + c * CMatrix::Identity(dim(), dim())));
  }

 private:
  static void check_same_dim(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("operator dimensions differ");
  }

  CMatrix m_;
};

struct Spectrum {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns

  CMatrix reconstruct() const {
    return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
  }
};

inline Spectrum eig_hermitian(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) throw DomainError("Hermitian eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Spectrum eig_hermitian(const CMatrix& a) { return eig_hermitian(HermitianOperator(a)); }

/// V diag(values) V†, symmetrized so that the result is exactly Hermitian.
inline CMatrix from_spectrum(const Spectrum& s, const RVector& values) {
  return hermitian_part(s.eigenvectors * values.cast<cplx>().asDiagonal() * s.eigenvectors.adjoint());
}

/// Applies a real scalar function to the spectrum: V fn(Λ) V†. Throws
/// DomainError when fn yields a non-finite value on any eigenvalue.
template <class Fn>
HermitianOperator matrix_fn(const HermitianOperator& a, Fn&& fn) {
  const Spectrum s = eig_hermitian(a);
  RVector values(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    values[i] = fn(s.eigenvalues[i]);
    if (!std::isfinite(values[i])) {
      std::ostringstream os;
      os << "function undefined at eigenvalue " << s.eigenvalues[i];
      throw DomainError(os.str());
    }
  }
  return HermitianOperator(from_spectrum(s, values));
}

inline HermitianOperator matrix_exp(const HermitianOperator& a) {
  return matrix_fn(a, [](double x) { return std::exp(x); });
}

/// Natural logarithm; every eigenvalue must exceed tau.
inline HermitianOperator matrix_log(const HermitianOperator& a, double tau = kSupportTol) {
  return matrix_fn(a, [tau](double x) {
    if (x <= tau) {
      std::ostringstream os;
      os << "log of eigenvalue " << x << " <= " << tau;
      throw DomainError(os.str());
    }
    return std::log(x);
  });
}

/// Applies fn on the support (eigenvalues > tau·λ_max) and 0 elsewhere.
template <class Fn>
HermitianOperator matrix_fn_on_support(const HermitianOperator& a, Fn&& fn, double tau = kSupportTol) {
  const Spectrum s = eig_hermitian(a);
  const double cutoff = tau * std::max(s.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  RVector values = RVector::Zero(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (s.eigenvalues[i] > cutoff) values[i] = fn(s.eigenvalues[i]);
  }
  return HermitianOperator(from_spectrum(s, values));
}

/// Unit-trace positive semidefinite Hermitian matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  explicit DensityMatrix(const CMatrix& m, double trace_tol = kTraceTol) : op_(m) {
    validate(trace_tol);
  }

  /// Symmetrizes and rescales to unit trace; still rejects matrices with
  /// eigenvalues below -kPsdFloor after rescaling.
  static DensityMatrix normalized(const CMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("density matrix must be square");
    CMatrix h = hermitian_part(m);
    const double t = real_trace(h);
    if (!(t > 0.0)) throw InvalidState("cannot normalize matrix with non-positive trace");
    return DensityMatrix(CMatrix(h / t), 1e-9);
  }

  static DensityMatrix pure(const CVector& psi) {
    const CVector v = psi / psi.norm();
    return normalized(v * v.adjoint());
  }
  static DensityMatrix maximally_mixed(int dim) {
    return DensityMatrix(CMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim)));
  }
  static DensityMatrix diagonal(const RVector& p) {
    return DensityMatrix(CMatrix(p.cast<cplx>().asDiagonal()));
  }
  static DensityMatrix diagonal(std::initializer_list<double> p) {
    RVector v(static_cast<Eigen::Index>(p.size()));
    std::copy(p.begin(), p.end(), v.data());
    return diagonal(v);
  }

  int dim() const { return op_.dim(); }
  const CMatrix& matrix() const { return op_.matrix(); }
  const HermitianOperator& as_operator() const { return op_; }

 private:
  void validate(double trace_tol) {
    const double t = real_trace(op_.matrix());
    if (std::abs(t - 1.0) > trace_tol) {
      std::ostringstream os;
      os.precision(17);
      os << "density matrix trace " << t << " differs from 1";
      throw InvalidState(os.str());
    }
    const double lmin = eig_hermitian(op_).eigenvalues.minCoeff();
    if (lmin < -kPsdFloor) {
      std::ostringstream os;
      os << "density matrix has negative eigenvalue " << lmin;
      throw InvalidState(os.str());
    }
  }

  HermitianOperator op_;
};

// ---------------------------------------------------------------------------
// Tensor products and partial traces

inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(tensor(a.matrix(), b.matrix()));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::normalized(tensor(a.matrix(), b.matrix()));
}

template <class Range>
auto tensor_all(const Range& factors) {
  auto it = std::begin(factors);
  auto acc = *it;
  for (++it; it != std::end(factors); ++it) acc = tensor(acc, *it);
  return acc;
}

/// H ⊗ I + I ⊗ R for the composite of two systems.
inline HermitianOperator hamiltonian_sum(const HermitianOperator& h, const HermitianOperator& r) {
  return HermitianOperator(CMatrix(tensor(h.matrix(), CMatrix::Identity(r.dim(), r.dim())) +
                                   tensor(CMatrix::Identity(h.dim(), h.dim()), r.matrix())));
}

inline int product_of(std::span<const int> dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

/// Partial trace keeping the factors listed in `keep` (0-based, any order;
/// the output keeps the original factor order).
inline CMatrix partial_trace(const CMatrix& a, std::span<const int> dims, std::span<const int> keep) {
  const int total = product_of(dims);
  if (a.rows() != total || a.cols() != total) {
    throw DimensionMismatch("partial_trace: product of factor dims " + std::to_string(total) +
                            " != operator dim " + describe_dim(a.rows(), a.cols()));
  }
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw DimensionMismatch("partial_trace: keep index out of range");
    kept[k] = true;
  }
  std::vector<int> kept_dims, traced_dims, kept_idx, traced_idx;
  for (int i = 0; i < n; ++i) {
    if (dims[i] <= 0) throw DimensionMismatch("partial_trace: factor dims must be positive");
    (kept[i] ? kept_dims : traced_dims).push_back(dims[i]);
    (kept[i] ? kept_idx : traced_idx).push_back(i);
  }
  const int dk = product_of(kept_dims);
  const int dt = product_of(traced_dims);

  // strides of each factor in the full row-major multi-index
  std::vector<int> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  auto offsets = [&](const std::vector<int>& sub_dims, const std::vector<int>& sub_idx) {
    const int count = product_of(sub_dims);
    std::vector<int> off(count, 0);
    for (int m = 0; m < count; ++m) {
      int rem = m;
      int o = 0;
      for (int f = static_cast<int>(sub_dims.size()) - 1; f >= 0; --f) {
        o += (rem % sub_dims[f]) * stride[sub_idx[f]];
        rem /= sub_dims[f];
      }
      off[m] = o;
    }
    return off;
  };
  const std::vector<int> koff = offsets(kept_dims, kept_idx);
  const std::vector<int> toff = offsets(traced_dims, traced_idx);

  CMatrix out = CMatrix::Zero(dk, dk);
  for (int r = 0; r < dk; ++r) {
    for (int c = 0; c < dk; ++c) {
      cplx s = 0.0;
      for (int t = 0; t < dt; ++t) s += a(koff[r] + toff[t], koff[c] + toff[t]);
      out(r, c) = s;
    }
  }
  return out;
}

inline CMatrix partial_trace(const CMatrix& a, std::initializer_list<int> dims, std::initializer_list<int> keep) {
  return partial_trace(a, std::span<const int>(dims.begin(), dims.size()),
                       std::span<const int>(keep.begin(), keep.size()));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims, std::span<const int> keep) {
  return DensityMatrix::normalized(partial_trace(rho.matrix(), dims, keep));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> dims,
                                   std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(dims.begin(), dims.size()),
                       std::span<const int>(keep.begin(), keep.size()));
}

// ---------------------------------------------------------------------------
// Norms and supports

/// Sum of absolute eigenvalues of a Hermitian matrix.
inline double trace_norm(const CMatrix& a) {
  return eig_hermitian(HermitianOperator(a, 1e-8)).eigenvalues.cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("trace_distance: dimensions differ");
  return trace_norm(a.matrix() - b.matrix());
}

/// Projector onto eigenvectors with eigenvalue > tau·λ_max.
inline HermitianOperator support_projector(const CMatrix& a, double tau = kSupportTol) {
  const Spectrum s = eig_hermitian(a);
  const double cutoff = tau * s.eigenvalues.maxCoeff();
  RVector mask(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask[i] = s.eigenvalues[i] > cutoff ? 1.0 : 0.0;
  return HermitianOperator(from_spectrum(s, mask));
}

inline HermitianOperator support_projector(const DensityMatrix& a, double tau = kSupportTol) {
  return support_projector(a.matrix(), tau);
}

inline int support_rank(const DensityMatrix& a, double tau = kSupportTol) {
  const RVector ev = eig_hermitian(a.as_operator()).eigenvalues;
  const double cutoff = tau * ev.maxCoeff();
  return static_cast<int>((ev.array() > cutoff).count());
}

inline double min_eigenvalue(const DensityMatrix& a) {
  return eig_hermitian(a.as_operator()).eigenvalues.minCoeff();
}

// ---------------------------------------------------------------------------
// Random sampling

inline CMatrix ginibre(int rows, int cols, RngStream& rng) {
  CMatrix g(rows, cols);
  // fill row by row so the draw order does not depend on Eigen's storage order
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
  return g;
}

/// Ginibre-induced state G G† / Tr(G G†) with G of shape dim×rank.
inline DensityMatrix random_density(int dim, int rank, RngStream& rng) {
  if (dim < 1 || rank < 1 || rank > dim) throw InvalidDims("random_density requires 1 <= rank <= dim");
  const CMatrix g = ginibre(dim, rank, rng);
  return DensityMatrix::normalized(g * g.adjoint());
}

inline DensityMatrix random_density(int dim, RngStream& rng) { return random_density(dim, dim, rng); }

inline HermitianOperator random_hermitian(int dim, double scale, RngStream& rng) {
  const CMatrix g = ginibre(dim, dim, rng);
  return HermitianOperator(CMatrix(scale * hermitian_part(g)));
}

/// Isometry (rows >= cols) by Gram-Schmidt of a Ginibre matrix with phase fix,
/// so square outputs are Haar unitaries.
inline CMatrix random_isometry(int rows, int cols, RngStream& rng) {
  if (rows < cols) throw InvalidDims("random_isometry requires rows >= cols");
  const CMatrix g = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(rows, cols);
  const CMatrix r = qr.matrixQR();
  for (int j = 0; j < cols; ++j) {
    const cplx d = r(j, j);
    const double ad = std::abs(d);
    if (ad > 0) q.col(j) *= d / ad;
  }
  return q;
}

inline CMatrix random_unitary(int dim, RngStream& rng) { return random_isometry(dim, dim, rng); }

/// Mixes with I/d so that the smallest eigenvalue is at least floor.
inline DensityMatrix enforce_min_eigenvalue(const DensityMatrix& rho, double floor) {
  const int d = rho.dim();
  const double lmin = min_eigenvalue(rho);
  if (lmin >= floor) return rho;
  // (1-e)·lmin + e/d = floor
  const double eps = (floor - lmin) / (1.0 / d - lmin);
  return DensityMatrix::normalized((1.0 - eps) * rho.matrix() + eps * CMatrix::Identity(d, d) / double(d));
}

/// Convex mixture (1-t)·a + t·b.
inline DensityMatrix mix(const DensityMatrix& a, const DensityMatrix& b, double t) {
  if (a.dim() != b.dim()) throw DimensionMismatch("mix: dimensions differ");
  return DensityMatrix::normalized((1.0 - t) * a.matrix() + t * b.matrix());
}

/// Moves rho toward `direction` by trace-norm distance delta (clamped to the
/// segment endpoint). Always returns a valid state.
inline DensityMatrix perturb_toward(const DensityMatrix& rho, const DensityMatrix& direction, double delta) {
  const double dist = trace_distance(rho, direction);
  if (dist <= 0.0 || delta <= 0.0) return rho;
  return mix(rho, direction, std::min(1.0, delta / dist));
}

/// Nearest density matrix in Frobenius norm: eigenvalues projected onto the
/// probability simplex.
inline DensityMatrix project_to_states(const CMatrix& a) {
  const Spectrum s = eig_hermitian(HermitianOperator(hermitian_part(a)));
  RVector u = s.eigenvalues;
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  const RVector p = (s.eigenvalues.array() - theta).max(0.0);
  return DensityMatrix::normalized(from_spectrum(s, p));
}

/// ρ + δ·D/‖D‖₁ for the traceless part D of a random Hermitian direction,
/// projected back onto the states.
inline DensityMatrix perturb_hermitian(const DensityMatrix& rho, double delta, RngStream& rng) {
  const int d = rho.dim();
  if (delta <= 0.0 || d < 2) return rho;
  CMatrix dir = random_hermitian(d, 1.0, rng).matrix();
  dir -= (real_trace(dir) / d) * CMatrix::Identity(d, d);
  const double norm = trace_norm(dir);
  if (!(norm > 0.0)) return rho;
  return project_to_states(rho.matrix() + (delta / norm) * dir);
}

}  // namespace athermality
