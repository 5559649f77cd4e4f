#pragma once

// CPTP maps in Kraus form with Choi conversion.
//
// Choi convention: J(T) = Σ_ij T(|i⟩⟨j|) ⊗ |i⟩⟨j|, output factor first. It is
// unnormalized (Tr J = dim_in) and trace preservation reads Tr_out J = I_in.

#include <limits>
#include <vector>

#include "linalg.hpp"

namespace athermality {

inline constexpr double kChannelTol = 1e-9;

class QuantumChannel {
 public:
  QuantumChannel() = default;

  QuantumChannel(int dim_in, int dim_out, std::vector<CMatrix> kraus, double tol = kChannelTol)
      : dim_in_(dim_in), dim_out_(dim_out), kraus_(std::move(kraus)) {
    if (dim_in < 1 || dim_out < 1) throw InvalidDims("channel dimensions must be positive");
    if (kraus_.empty()) throw NotCPTP("channel needs at least one Kraus operator");
    for (const CMatrix& k : kraus_) {
      if (k.rows() != dim_out || k.cols() != dim_in) {
        throw DimensionMismatch("Kraus operator has shape " + describe_dim(k.rows(), k.cols()) + ", expected " +
                                describe_dim(dim_out, dim_in));
      }
    }
    const double res = completeness_residual();
    if (res > tol) {
      std::ostringstream os;
      os << "Kraus completeness residual " << res << " exceeds " << tol;
      throw NotCPTP(os.str());
    }
  }

  static QuantumChannel identity(int dim) { return QuantumChannel(dim, dim, {CMatrix::Identity(dim, dim)}); }

  static QuantumChannel unitary(const CMatrix& u) {
    return QuantumChannel(static_cast<int>(u.cols()), static_cast<int>(u.rows()), {u});
  }

  /// Replaces every input by `state`.
  static QuantumChannel replacer(const DensityMatrix& state, int dim_in) {
    const Spectrum s = eig_hermitian(state.as_operator());
    std::vector<CMatrix> kraus;
    for (Eigen::Index a = 0; a < s.eigenvalues.size(); ++a) {
      const double p = s.eigenvalues[a];
      if (p <= kSupportTol * s.eigenvalues.maxCoeff()) continue;
      for (int i = 0; i < dim_in; ++i) {
        CMatrix k = CMatrix::Zero(state.dim(), dim_in);
        k.col(i) = std::sqrt(p) * s.eigenvectors.col(a);
        kraus.push_back(std::move(k));
      }
    }
    return QuantumChannel(dim_in, state.dim(), std::move(kraus));
  }

  /// Completely depolarizing channel X ↦ Tr(X)·I/dim_out.
  static QuantumChannel depolarizing(int dim_in, int dim_out) {
    return replacer(DensityMatrix::maximally_mixed(dim_out), dim_in);
  }

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  const std::vector<CMatrix>& kraus() const { return kraus_; }

  double completeness_residual() const {
    CMatrix s = CMatrix::Zero(dim_in_, dim_in_);
    for (const CMatrix& k : kraus_) s += k.adjoint() * k;
    return max_abs(s - CMatrix::Identity(dim_in_, dim_in_));
  }

  /// Linear action on an arbitrary dim_in×dim_in operator.
  CMatrix apply(const CMatrix& x) const {
    if (x.rows() != dim_in_ || x.cols() != dim_in_) {
      throw DimensionMismatch("channel input " + describe_dim(x.rows(), x.cols()) + " but dim_in = " +
                              std::to_string(dim_in_));
    }
    CMatrix out = CMatrix::Zero(dim_out_, dim_out_);
    for (const CMatrix& k : kraus_) out.noalias() += k * x * k.adjoint();
    return out;
  }

  DensityMatrix apply(const DensityMatrix& rho) const { return DensityMatrix::normalized(apply(rho.matrix())); }

 private:
  int dim_in_ = 0;
  int dim_out_ = 0;
  std::vector<CMatrix> kraus_;
};

inline DensityMatrix apply(const QuantumChannel& t, const DensityMatrix& rho) { return t.apply(rho); }

inline CMatrix kraus_to_choi(const QuantumChannel& t) {
  const int din = t.dim_in();
  const int dout = t.dim_out();
  const int n = din * dout;
  CMatrix j = CMatrix::Zero(n, n);
  for (const CMatrix& k : t.kraus()) {
    // vec index (o, i) -> o*din + i
    CVector v(n);
    for (int o = 0; o < dout; ++o)
      for (int i = 0; i < din; ++i) v[o * din + i] = k(o, i);
    j.noalias() += v * v.adjoint();
  }
  return j;
}

/// Applies the map encoded by a Choi matrix: T(X) = Tr_in[(I ⊗ Xᵀ) J].
inline CMatrix apply_choi(const CMatrix& j, int dim_in, int dim_out, const CMatrix& x) {
  if (j.rows() != dim_in * dim_out) throw DimensionMismatch("apply_choi: Choi dimension mismatch");
  if (x.rows() != dim_in || x.cols() != dim_in) throw DimensionMismatch("apply_choi: input dimension mismatch");
  CMatrix out = CMatrix::Zero(dim_out, dim_out);
  for (int o = 0; o < dim_out; ++o)
    for (int p = 0; p < dim_out; ++p) {
      cplx s = 0.0;
      for (int i = 0; i < dim_in; ++i)
        for (int k = 0; k < dim_in; ++k) s += x(i, k) * j(o * dim_in + i, p * dim_in + k);
      out(o, p) = s;
    }
  return out;
}

/// Kraus operators from the eigendecomposition of J, dropping eigenvalues
/// below 1e-12·λ_max. Throws NotCPTP if J is not PSD or not trace preserving
/// within tol.
inline std::vector<CMatrix> choi_to_kraus(const CMatrix& j, int dim_in, int dim_out, double tol = kChannelTol) {
  const int n = dim_in * dim_out;
  if (j.rows() != n || j.cols() != n) throw DimensionMismatch("choi_to_kraus: Choi dimension mismatch");
  const Spectrum s = eig_hermitian(HermitianOperator(j, tol));
  const double lmax = std::max(s.eigenvalues.maxCoeff(), 0.0);
  if (s.eigenvalues.minCoeff() < -tol) {
    std::ostringstream os;
    os << "Choi matrix has negative eigenvalue " << s.eigenvalues.minCoeff();
    throw NotCPTP(os.str());
  }
  const int dims[] = {dim_out, dim_in};
  const int keep_in[] = {1};
  const double tp = max_abs(partial_trace(j, dims, keep_in) - CMatrix::Identity(dim_in, dim_in));
  if (tp > tol) {
    std::ostringstream os;
    os << "Choi partial trace deviates from identity by " << tp;
    throw NotCPTP(os.str());
  }
  std::vector<CMatrix> kraus;
  for (Eigen::Index a = s.eigenvalues.size() - 1; a >= 0; --a) {
    const double lam = s.eigenvalues[a];
    if (lam <= 1e-12 * lmax) continue;
    CMatrix k(dim_out, dim_in);
    for (int o = 0; o < dim_out; ++o)
      for (int i = 0; i < dim_in; ++i) k(o, i) = std::sqrt(lam) * s.eigenvectors(o * dim_in + i, a);
    kraus.push_back(std::move(k));
  }
  return kraus;
}

inline QuantumChannel channel_from_choi(const CMatrix& j, int dim_in, int dim_out, double tol = kChannelTol) {
  return QuantumChannel(dim_in, dim_out, choi_to_kraus(j, dim_in, dim_out, tol), tol);
}

/// Stinespring sampler: V is a random isometry C^{dim_in} → C^{dim_out}⊗C^{env_dim},
/// the environment is traced out.
inline QuantumChannel random_channel(int dim_in, int dim_out, int env_dim, RngStream& rng) {
  if (dim_in < 1 || dim_out < 1 || env_dim < 1 || env_dim * dim_out < dim_in) {
    throw InvalidDims("random_channel requires env_dim·dim_out >= dim_in");
  }
  const CMatrix v = random_isometry(dim_out * env_dim, dim_in, rng);
  std::vector<CMatrix> kraus;
  kraus.reserve(env_dim);
  for (int e = 0; e < env_dim; ++e) {
    CMatrix k(dim_out, dim_in);
    for (int o = 0; o < dim_out; ++o) k.row(o) = v.row(o * env_dim + e);
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(dim_in, dim_out, std::move(kraus));
}

/// Re-expresses a channel with at most dim_in·dim_out Kraus operators.
inline QuantumChannel compact(const QuantumChannel& t) {
  if (static_cast<int>(t.kraus().size()) <= t.dim_in() * t.dim_out()) return t;
  return channel_from_choi(kraus_to_choi(t), t.dim_in(), t.dim_out());
}

/// t2 ∘ t1.
inline QuantumChannel compose(const QuantumChannel& t2, const QuantumChannel& t1) {
  if (t1.dim_out() != t2.dim_in()) throw DimensionMismatch("compose: inner output dim != outer input dim");
  std::vector<CMatrix> kraus;
  for (const CMatrix& b : t2.kraus())
    for (const CMatrix& a : t1.kraus()) {
      CMatrix k = b * a;
      if (max_abs(k) > 0.0) kraus.push_back(std::move(k));
    }
  return compact(QuantumChannel(t1.dim_in(), t2.dim_out(), std::move(kraus)));
}

inline QuantumChannel tensor_channel(const QuantumChannel& t1, const QuantumChannel& t2) {
  std::vector<CMatrix> kraus;
  for (const CMatrix& a : t1.kraus())
    for (const CMatrix& b : t2.kraus()) kraus.push_back(tensor(a, b));
  return compact(QuantumChannel(t1.dim_in() * t2.dim_in(), t1.dim_out() * t2.dim_out(), std::move(kraus)));
}

/// Unitary |a⟩|b⟩ ↦ |b⟩|a⟩ from C^{dim_a}⊗C^{dim_b} to C^{dim_b}⊗C^{dim_a}.
inline CMatrix swap_operator(int dim_a, int dim_b) {
  CMatrix p = CMatrix::Zero(dim_a * dim_b, dim_a * dim_b);
  for (int a = 0; a < dim_a; ++a)
    for (int b = 0; b < dim_b; ++b) p(b * dim_a + a, a * dim_b + b) = 1.0;
  return p;
}

inline QuantumChannel swap_channel(int dim_a, int dim_b) { return QuantumChannel::unitary(swap_operator(dim_a, dim_b)); }

/// Channel Tr over the factors not listed in keep.
inline QuantumChannel partial_trace_channel(std::span<const int> dims, std::span<const int> keep) {
  const int total = product_of(dims);
  // Kraus operators ⟨t| on the traced factors: K_t = Σ_r |r⟩⟨r, t| (with original ordering)
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) kept.at(k) = true;
  int dk = 1, dt = 1;
  for (int i = 0; i < n; ++i) (kept[i] ? dk : dt) *= dims[i];
  std::vector<CMatrix> kraus(dt, CMatrix::Zero(dk, total));
  for (int full = 0; full < total; ++full) {
    int rem = full;
    int kidx = 0, tidx = 0, kmul = 1, tmul = 1;
    for (int f = n - 1; f >= 0; --f) {
      const int digit = rem % dims[f];
      rem /= dims[f];
      if (kept[f]) {
        kidx += digit * kmul;
        kmul *= dims[f];
      } else {
        tidx += digit * tmul;
        tmul *= dims[f];
      }
    }
    kraus[tidx](kidx, full) = 1.0;
  }
  return QuantumChannel(total, dk, std::move(kraus));
}

/// Convex combination Σ w_i T_i (weights normalized internally).
inline QuantumChannel mixture(const std::vector<QuantumChannel>& channels, const std::vector<double>& weights) {
  if (channels.empty() || channels.size() != weights.size()) throw InvalidDims("mixture: size mismatch");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<CMatrix> kraus;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].dim_in() != channels[0].dim_in() || channels[c].dim_out() != channels[0].dim_out()) {
      throw DimensionMismatch("mixture: channel dimensions differ");
    }
    if (weights[c] < 0) throw InvalidDims("mixture: negative weight");
    if (weights[c] == 0) continue;
    const double s = std::sqrt(weights[c] / total);
    for (const CMatrix& k : channels[c].kraus()) kraus.push_back(s * k);
  }
  return compact(QuantumChannel(channels[0].dim_in(), channels[0].dim_out(), std::move(kraus)));
}

/// Rescales Kraus operators by (Σ K†K)^{-1/2} so that completeness holds to
/// round-off. Used to polish nearly trace-preserving solver output.
inline QuantumChannel restore_trace_preservation(int dim_in, int dim_out, std::vector<CMatrix> kraus) {
  CMatrix s = CMatrix::Zero(dim_in, dim_in);
  for (const CMatrix& k : kraus) s += k.adjoint() * k;
  const HermitianOperator inv_sqrt = matrix_fn(HermitianOperator(hermitian_part(s), 1e-6), [](double x) {
    if (x <= 0) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 / std::sqrt(x);
  });
  for (CMatrix& k : kraus) k = k * inv_sqrt.matrix();
  return QuantumChannel(dim_in, dim_out, std::move(kraus));
}

// ---------------------------------------------------------------------------
// Support containment for rank-decreasing channels

struct SupportContainmentReport {
  HermitianOperator projector;  // support of T(σ)
  int projector_rank = 0;
  int basis_inputs = 0;
  int random_inputs = 0;
  double basis_max_violation = 0.0;
  double random_max_violation = 0.0;
  double max_violation = 0.0;
  bool passed = false;
};

/// Checks that every output T(ρ) lives inside P = supp(T(σ)) for full-rank σ.
/// The basis sweep over |i⟩⟨i| and (|i⟩+|j⟩)(⟨i|+⟨j|), (|i⟩+i|j⟩)(…)† spans all
/// operators, so a clean sweep is conclusive by linearity.
inline SupportContainmentReport check_support_containment(const QuantumChannel& t, const DensityMatrix& sigma,
                                                          int samples, RngStream& rng, double tol = 1e-9) {
  if (sigma.dim() != t.dim_in()) throw DimensionMismatch("check_support_containment: sigma dimension");
  const double lmin = min_eigenvalue(sigma);
  if (lmin <= kSupportTol) throw SigmaNotFullRank("check_support_containment requires full-rank sigma");

  SupportContainmentReport rep;
  const DensityMatrix image = t.apply(sigma);
  rep.projector = support_projector(image);
  rep.projector_rank = support_rank(image);
  const int dout = t.dim_out();
  const CMatrix p = rep.projector.matrix();
  const CMatrix q = CMatrix::Identity(dout, dout) - p;

  auto violation = [&](const CMatrix& out) {
    const double scale = std::max(1.0, max_abs(out));
    return std::max(max_abs(q * out * q), max_abs(q * out * p)) / scale;
  };

  const int d = t.dim_in();
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      std::vector<CVector> vecs;
      CVector ei = CVector::Unit(d, i);
      if (i == j) {
        vecs.push_back(ei);
      } else {
        CVector ej = CVector::Unit(d, j);
        vecs.push_back(ei + ej);
        vecs.push_back(ei + cplx(0, 1) * ej);
      }
      for (const CVector& v : vecs) {
        rep.basis_max_violation = std::max(rep.basis_max_violation, violation(t.apply(CMatrix(v * v.adjoint()))));
        ++rep.basis_inputs;
      }
    }
  }
  for (int s = 0; s < samples; ++s) {
    const DensityMatrix rho = random_density(d, rng.uniform_int(1, d), rng);
    rep.random_max_violation = std::max(rep.random_max_violation, violation(t.apply(rho.matrix())));
    ++rep.random_inputs;
  }
  rep.max_violation = std::max(rep.basis_max_violation, rep.random_max_violation);
  rep.passed = rep.max_violation <= tol;
  return rep;
}

/// Channel whose outputs are confined to the span of the first `rank` columns of
/// `basis`: X ↦ Q X Q + Σ (leaked weight) placed on basis column 0, where Q
/// projects onto that span.
inline QuantumChannel confine_to_subspace(int dim, const CMatrix& basis, int rank) {
  if (rank < 1 || rank > dim) throw InvalidDims("confine_to_subspace: bad rank");
  const CMatrix b = basis.leftCols(rank);
  const CMatrix qproj = b * b.adjoint();
  std::vector<CMatrix> kraus{qproj};
  for (int c = rank; c < dim; ++c) kraus.push_back(b.col(0) * basis.col(c).adjoint());
  return QuantumChannel(dim, dim, std::move(kraus));
}

}  // namespace athermality
