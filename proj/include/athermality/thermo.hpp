#pragma once

// Objects (ρ, H), Gibbs states, free energies and Gibbs-preserving
// transitions, including catalytic variants.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "channels.hpp"
#include "divergences.hpp"

namespace athermality {

inline constexpr double kTransitionTol = 1e-8;

/// A state together with its Hamiltonian.
class ThermoObject {
 public:
  ThermoObject(DensityMatrix state, HermitianOperator hamiltonian)
      : state_(std::move(state)), hamiltonian_(std::move(hamiltonian)) {
    if (state_.dim() != hamiltonian_.dim()) throw DimensionMismatch("object state and Hamiltonian dims differ");
  }

  const DensityMatrix& state() const { return state_; }
  const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  int dim() const { return state_.dim(); }

  /// (ρ⊗γ, H⊗I + I⊗R)
  friend ThermoObject compose(const ThermoObject& a, const ThermoObject& b) {
    return {tensor(a.state_, b.state_), hamiltonian_sum(a.hamiltonian_, b.hamiltonian_)};
  }

 private:
  DensityMatrix state_;
  HermitianOperator hamiltonian_;
};

inline void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("inverse temperature must be positive and finite");
}

/// e^{−βH}/Tr e^{−βH}, evaluated after shifting the spectrum to start at 0.
inline DensityMatrix gibbs_state(double beta, const HermitianOperator& h) {
  check_beta(beta);
  const Spectrum s = eig_hermitian(h);
  const double lmin = s.eigenvalues.minCoeff();
  RVector w = (-beta * (s.eigenvalues.array() - lmin)).exp();
  w /= w.sum();
  return DensityMatrix::normalized(from_spectrum(s, w));
}

/// −β⁻¹ ln σ + C·I; its Gibbs state at β is σ.
inline HermitianOperator modular_hamiltonian(const DensityMatrix& sigma, double beta, double shift = 0.0) {
  check_beta(beta);
  if (min_eigenvalue(sigma) <= kSupportTol) throw SigmaNotFullRank("modular Hamiltonian needs a full-rank state");
  return ((-1.0 / beta) * matrix_log(sigma.as_operator())).shifted(shift);
}

/// F_β(ρ, H) = Tr(ρH) − β⁻¹ S(ρ).
inline double free_energy(const ThermoObject& obj, double beta) {
  check_beta(beta);
  return trace_product(obj.state().matrix(), obj.hamiltonian().matrix()) - von_neumann_entropy(obj.state()) / beta;
}

/// ΔF_β(ρ, H) = β⁻¹ S(ρ ‖ ω_{β,H}).
inline ExtendedReal athermality(const ThermoObject& obj, double beta) {
  return (1.0 / beta) * relative_entropy(obj.state(), gibbs_state(beta, obj.hamiltonian()));
}

/// Finite ΔF; the Gibbs state is full rank so this never overflows.
inline double delta_f(const ThermoObject& obj, double beta) { return athermality(obj, beta).value(); }

struct GibbsPreservation {
  bool preserved = false;
  double residual = 0.0;
};

inline GibbsPreservation is_gibbs_preserving(const QuantumChannel& channel, const HermitianOperator& h_in,
                                             const HermitianOperator& h_out, double beta,
                                             double tol = kTransitionTol) {
  if (channel.dim_in() != h_in.dim() || channel.dim_out() != h_out.dim()) {
    throw DimensionMismatch("is_gibbs_preserving: channel and Hamiltonian dims differ");
  }
  const double residual = trace_norm(channel.apply(gibbs_state(beta, h_in).matrix()) - gibbs_state(beta, h_out).matrix());
  return {residual <= tol, residual};
}

/// A GP map: state channel plus the Hamiltonian it outputs.
struct GPMapSpec {
  QuantumChannel channel;
  HermitianOperator ham_out;
  double beta = 1.0;
  double gp_residual = 0.0;
};

enum class KeptSubsystem { System, Ancilla };

/// Induced map on S from a GP channel on S⊗A fed with a Gibbs ancilla:
/// ρ ↦ Tr_A(G(ρ ⊗ ω_{β,K})) with Hamiltonian H_S (KeptSubsystem::System), or
/// ρ ↦ Tr_S(G(ρ ⊗ ω_{β,K})) with Hamiltonian K (KeptSubsystem::Ancilla).
inline GPMapSpec implement_gp_map(const QuantumChannel& joint, const HermitianOperator& h_s,
                                  const HermitianOperator& k_a, double beta,
                                  KeptSubsystem keep = KeptSubsystem::System, double tol = kTransitionTol) {
  const HermitianOperator h_joint = hamiltonian_sum(h_s, k_a);
  if (joint.dim_in() != h_joint.dim() || joint.dim_out() != h_joint.dim()) {
    throw DimensionMismatch("implement_gp_map: joint channel must act on S⊗A");
  }
  const GibbsPreservation gp = is_gibbs_preserving(joint, h_joint, h_joint, beta, tol);
  if (!gp.preserved) {
    throw JointNotGP("joint channel is not Gibbs preserving (residual " + std::to_string(gp.residual) + ")");
  }
  const DensityMatrix anc = gibbs_state(beta, k_a);
  const int ds = h_s.dim();
  const int da = k_a.dim();
  // append the ancilla: ρ ↦ ρ ⊗ ω_K
  std::vector<CMatrix> prep;
  const Spectrum s = eig_hermitian(anc.as_operator());
  for (Eigen::Index a = 0; a < s.eigenvalues.size(); ++a) {
    prep.push_back(tensor(CMatrix::Identity(ds, ds), CMatrix(std::sqrt(s.eigenvalues[a]) * s.eigenvectors.col(a))));
  }
  const QuantumChannel append(ds, ds * da, std::move(prep));
  const int dims[] = {ds, da};
  const int keep_idx[] = {keep == KeptSubsystem::System ? 0 : 1};
  const QuantumChannel trace_out = partial_trace_channel(dims, keep_idx);
  QuantumChannel induced = compose(trace_out, compose(joint, append));
  HermitianOperator ham_out = keep == KeptSubsystem::System ? h_s : k_a;
  const GibbsPreservation check = is_gibbs_preserving(induced, h_s, ham_out, beta, tol);
  return {std::move(induced), std::move(ham_out), beta, check.residual};
}

// ---------------------------------------------------------------------------
// GP channel generators

/// Petz recovery of `t` with respect to the full-rank reference state: maps
/// t(reference) back to reference.
inline QuantumChannel petz_recovery(const QuantumChannel& t, const DensityMatrix& reference) {
  const DensityMatrix image = t.apply(reference);
  const HermitianOperator ref_half = matrix_fn(reference.as_operator(), [](double x) { return std::sqrt(x); });
  const HermitianOperator img_inv_half = matrix_fn_on_support(image.as_operator(), [](double x) { return 1.0 / std::sqrt(x); });
  std::vector<CMatrix> kraus;
  for (const CMatrix& k : t.kraus()) kraus.push_back(ref_half.matrix() * k.adjoint() * img_inv_half.matrix());
  return restore_trace_preservation(t.dim_out(), t.dim_in(), std::move(kraus));
}

/// Random GP channel for (H, β): convex mixture of the identity, the Gibbs
/// replacer and a Petz-recovered random channel.
inline QuantumChannel random_gp_channel(const HermitianOperator& h, double beta, RngStream& rng) {
  const int d = h.dim();
  const DensityMatrix omega = gibbs_state(beta, h);
  const int dout = rng.uniform_int(1, 4);
  // env·dout >= d keeps V an isometry; d·env >= dout keeps t(ω) full rank
  const int env_min = std::max({1, (d + dout - 1) / dout, (dout + d - 1) / d});
  const int env = rng.uniform_int(env_min, env_min + d);
  const QuantumChannel t = random_channel(d, dout, env, rng);
  const QuantumChannel recovered = compose(petz_recovery(t, omega), t);
  const std::vector<double> w{rng.uniform(), rng.uniform(), rng.uniform() + 0.5};
  return mixture({QuantumChannel::identity(d), QuantumChannel::replacer(omega, d), recovered}, w);
}

// ---------------------------------------------------------------------------
// Transitions

enum class TransitionMode { Plain, Catalytic, MarginalCatalytic, CorrelatedCatalytic };

inline std::string to_string(TransitionMode m) {
  switch (m) {
    case TransitionMode::Plain: return "plain";
    case TransitionMode::Catalytic: return "catalytic";
    case TransitionMode::MarginalCatalytic: return "marginal_catalytic";
    case TransitionMode::CorrelatedCatalytic: return "correlated_catalytic";
  }
  return "unknown";
}

inline TransitionMode transition_mode_from_string(const std::string& s) {
  for (auto m : {TransitionMode::Plain, TransitionMode::Catalytic, TransitionMode::MarginalCatalytic,
                 TransitionMode::CorrelatedCatalytic})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown transition mode '" + s + "'");
}

/// Source/target objects, the catalysts A_1…A_k and the witness channel acting
/// on S⊗A_1⊗…⊗A_k.
struct TransitionInstance {
  ThermoObject source;
  ThermoObject target;
  double beta = 1.0;
  TransitionMode mode = TransitionMode::Plain;
  std::vector<ThermoObject> catalysts;
  std::optional<QuantumChannel> witness_channel;
  std::optional<DensityMatrix> joint_output;
};

struct TransitionReport {
  TransitionMode mode = TransitionMode::Plain;
  double gp_residual = 0.0;
  std::vector<std::pair<std::string, double>> residuals;
  double max_residual = 0.0;
  bool passed = false;
  DensityMatrix output;
};

inline TransitionReport check_transition(const TransitionInstance& t, double tol = kTransitionTol) {
  if (!t.witness_channel) throw MissingWitness("transition instance has no witness channel");
  const bool plain = t.mode == TransitionMode::Plain;
  if (!plain && t.catalysts.empty()) throw MissingWitness("catalytic modes need at least one catalyst");
  const QuantumChannel& w = *t.witness_channel;

  std::vector<int> dims{t.source.dim()};
  std::vector<int> cat_dims;
  HermitianOperator h_in = t.source.hamiltonian();
  HermitianOperator h_out = t.target.hamiltonian();
  DensityMatrix input = t.source.state();
  if (!plain) {
    for (const ThermoObject& c : t.catalysts) {
      h_in = hamiltonian_sum(h_in, c.hamiltonian());
      h_out = hamiltonian_sum(h_out, c.hamiltonian());
      input = tensor(input, c.state());
      cat_dims.push_back(c.dim());
    }
  }
  if (w.dim_in() != h_in.dim() || w.dim_out() != h_out.dim()) {
    throw DimensionMismatch("witness channel dims do not match the transition");
  }
  TransitionReport rep;
  rep.mode = t.mode;
  const GibbsPreservation gp = is_gibbs_preserving(w, h_in, h_out, t.beta, tol);
  rep.gp_residual = gp.residual;
  if (!gp.preserved) {
    throw WitnessNotGP("witness channel is not Gibbs preserving (residual " + std::to_string(gp.residual) + ")");
  }
  rep.output = w.apply(input);
  const DensityMatrix& out = rep.output;
  auto add = [&rep](std::string name, double r) { rep.residuals.emplace_back(std::move(name), r); };

  if (t.joint_output) add("joint_output", trace_distance(*t.joint_output, out));

  std::vector<int> out_dims{t.target.dim()};
  out_dims.insert(out_dims.end(), cat_dims.begin(), cat_dims.end());
  const int k = static_cast<int>(cat_dims.size());

  switch (t.mode) {
    case TransitionMode::Plain:
      add("system", trace_distance(out, t.target.state()));
      break;
    case TransitionMode::Catalytic: {
      std::vector<DensityMatrix> parts{t.target.state()};
      for (const ThermoObject& c : t.catalysts) parts.push_back(c.state());
      add("product_output", trace_distance(out, tensor_all(parts)));
      break;
    }
    case TransitionMode::MarginalCatalytic: {
      const int ks[] = {0};
      add("system", trace_distance(partial_trace(out, out_dims, ks), t.target.state()));
      for (int i = 0; i < k; ++i) {
        const int ki[] = {i + 1};
        add("catalyst_" + std::to_string(i), trace_distance(partial_trace(out, out_dims, ki), t.catalysts[i].state()));
      }
      break;
    }
    case TransitionMode::CorrelatedCatalytic: {
      const int ks[] = {0};
      std::vector<int> ka(k);
      std::iota(ka.begin(), ka.end(), 1);
      std::vector<DensityMatrix> cats;
      for (const ThermoObject& c : t.catalysts) cats.push_back(c.state());
      add("system", trace_distance(partial_trace(out, out_dims, ks), t.target.state()));
      add("catalyst", trace_distance(partial_trace(out, out_dims, ka), tensor_all(cats)));
      break;
    }
  }
  for (const auto& [name, r] : rep.residuals) rep.max_residual = std::max(rep.max_residual, r);
  rep.passed = rep.max_residual <= tol;
  return rep;
}

namespace detail {

inline std::pair<DensityMatrix, DensityMatrix> marginals(const DensityMatrix& rho12, int d1, int d2) {
  if (rho12.dim() != d1 * d2) throw DimensionMismatch("bipartite state dim != d1·d2");
  const int dims[] = {d1, d2};
  const int k0[] = {0};
  const int k1[] = {1};
  return {partial_trace(rho12, dims, k0), partial_trace(rho12, dims, k1)};
}

}  // namespace detail

/// (ρ12, H1+H2) → (ρ1⊗ρ2, H1+H2) with the two marginal catalysts (ρ1,H1),
/// (ρ2,H2): the witness swaps the system with the catalyst pair.
inline TransitionInstance construct_mc_swap(const DensityMatrix& rho12, const HermitianOperator& h1,
                                            const HermitianOperator& h2, double beta) {
  const int d1 = h1.dim();
  const int d2 = h2.dim();
  auto [r1, r2] = detail::marginals(rho12, d1, d2);
  const HermitianOperator h12 = hamiltonian_sum(h1, h2);
  const DensityMatrix product = tensor(r1, r2);
  TransitionInstance t{ThermoObject(rho12, h12), ThermoObject(product, h12), beta, TransitionMode::MarginalCatalytic,
                       {ThermoObject(r1, h1), ThermoObject(r2, h2)}, swap_channel(d1 * d2, d1 * d2),
                       tensor(product, rho12)};
  return t;
}

/// (ρ12, H1+H2) → (ρ1⊗ρ2, H1+H2) with catalyst (ρ2, H2): the witness swaps
/// system 2 with the catalyst, leaving the catalyst correlated with system 1.
inline TransitionInstance construct_cc_swap(const DensityMatrix& rho12, const HermitianOperator& h1,
                                            const HermitianOperator& h2, double beta) {
  const int d1 = h1.dim();
  const int d2 = h2.dim();
  auto [r1, r2] = detail::marginals(rho12, d1, d2);
  const HermitianOperator h12 = hamiltonian_sum(h1, h2);
  const QuantumChannel witness = tensor_channel(QuantumChannel::identity(d1), swap_channel(d2, d2));
  const DensityMatrix joint = witness.apply(tensor(rho12, r2));
  TransitionInstance t{ThermoObject(rho12, h12), ThermoObject(tensor(r1, r2), h12), beta,
                       TransitionMode::CorrelatedCatalytic, {ThermoObject(r2, h2)}, witness, joint};
  return t;
}

}  // namespace athermality
