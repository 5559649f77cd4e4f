#include <gtest/gtest.h>

#include "athermality/channels.hpp"

using namespace athermality;

namespace {

double choi_min_eig(const QuantumChannel& t) {
  return eig_hermitian(HermitianOperator(kraus_to_choi(t))).eigenvalues.minCoeff();
}

}  // namespace

TEST(QuantumChannel, RejectsIncompleteKraus) {
  EXPECT_THROW(QuantumChannel(2, 2, {CMatrix(0.5 * CMatrix::Identity(2, 2))}), NotCPTP);
}

TEST(QuantumChannel, RejectsShapeMismatch) {
  EXPECT_THROW(QuantumChannel(2, 2, {CMatrix(CMatrix::Identity(3, 3))}), DimensionMismatch);
}

TEST(Apply, IdentityLeavesStateUnchanged) {
  RngStream rng(1, 0);
  const DensityMatrix rho = random_density(3, rng);
  EXPECT_LE(max_abs(QuantumChannel::identity(3).apply(rho).matrix() - rho.matrix()), 1e-15);
}

TEST(Apply, DepolarizingGivesMaximallyMixed) {
  RngStream rng(2, 0);
  const QuantumChannel dep = QuantumChannel::depolarizing(3, 2);
  for (int t = 0; t < 5; ++t) {
    const DensityMatrix out = dep.apply(random_density(3, rng));
    EXPECT_LE(max_abs(out.matrix() - DensityMatrix::maximally_mixed(2).matrix()), 1e-14);
  }
}

TEST(Apply, UnitaryPreservesSpectrum) {
  RngStream rng(3, 0);
  const DensityMatrix rho = random_density(4, rng);
  const DensityMatrix out = QuantumChannel::unitary(random_unitary(4, rng)).apply(rho);
  const RVector a = eig_hermitian(rho.as_operator()).eigenvalues;
  const RVector b = eig_hermitian(out.as_operator()).eigenvalues;
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Choi, IdentityIsUnnormalizedMaximallyEntangled) {
  const CMatrix j = kraus_to_choi(QuantumChannel::identity(2));
  CVector phi = CVector::Zero(4);
  phi[0] = phi[3] = 1.0;  // Σ|ii⟩
  EXPECT_LE(max_abs(j - phi * phi.adjoint()), 1e-15);
  EXPECT_NEAR(real_trace(j), 2.0, 1e-15);
}

TEST(Choi, DepolarizingIsScaledIdentity) {
  const CMatrix j = kraus_to_choi(QuantumChannel::depolarizing(2, 3));
  EXPECT_LE(max_abs(j - CMatrix::Identity(6, 6) / 3.0), 1e-15);
}

TEST(Choi, TracingOutputGivesIdentity) {
  RngStream rng(4, 0);
  const QuantumChannel t = random_channel(3, 2, 2, rng);
  EXPECT_LE(max_abs(partial_trace(kraus_to_choi(t), {2, 3}, {1}) - CMatrix::Identity(3, 3)), 1e-12);
}

TEST(Choi, RoundTripActionAgrees) {
  RngStream rng(5, 0);
  for (int s = 0; s < 10; ++s) {
    const QuantumChannel t = random_channel(3, 2, 3, rng);
    const CMatrix j = kraus_to_choi(t);
    const QuantumChannel back = channel_from_choi(j, 3, 2);
    const DensityMatrix rho = random_density(3, rng);
    EXPECT_LE(max_abs(back.apply(rho).matrix() - t.apply(rho).matrix()), 1e-8);
    EXPECT_LE(max_abs(apply_choi(j, 3, 2, rho.matrix()) - t.apply(rho.matrix())), 1e-9);
  }
}

TEST(Choi, RejectsNonTracePreserving) {
  EXPECT_THROW(choi_to_kraus(CMatrix(2.0 * CMatrix::Identity(4, 4)), 2, 2), NotCPTP);
}

TEST(RandomChannel, SquareEnvOneIsUnitary) {
  RngStream rng(6, 0);
  const QuantumChannel t = random_channel(3, 3, 1, rng);
  ASSERT_EQ(t.kraus().size(), 1u);
  EXPECT_LE(max_abs(t.kraus()[0].adjoint() * t.kraus()[0] - CMatrix::Identity(3, 3)), 1e-12);
}

TEST(RandomChannel, CompletenessOverManySamples) {
  RngStream rng(7, 0);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const int din = rng.uniform_int(1, 4);
    const int dout = rng.uniform_int(1, 4);
    const int env = rng.uniform_int((din + dout - 1) / dout, 4);
    const QuantumChannel t = random_channel(din, dout, std::max(env, 1), rng);
    worst = std::max(worst, t.completeness_residual());
    EXPECT_GE(choi_min_eig(t), -1e-9);
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(RandomChannel, FixedSeedReproduces) {
  RngStream a(8, 3);
  RngStream b(8, 3);
  const QuantumChannel ta = random_channel(2, 3, 2, a);
  const QuantumChannel tb = random_channel(2, 3, 2, b);
  ASSERT_EQ(ta.kraus().size(), tb.kraus().size());
  for (std::size_t k = 0; k < ta.kraus().size(); ++k) EXPECT_EQ(ta.kraus()[k], tb.kraus()[k]);
}

TEST(RandomChannel, RejectsTooSmallEnvironment) {
  RngStream rng(9, 0);
  EXPECT_THROW(random_channel(4, 1, 2, rng), InvalidDims);
}

TEST(Compose, SwapTwiceIsIdentity) {
  RngStream rng(10, 0);
  const QuantumChannel s = swap_channel(2, 3);
  const QuantumChannel back = swap_channel(3, 2);
  const DensityMatrix rho = random_density(6, rng);
  EXPECT_LE(max_abs(compose(back, s).apply(rho).matrix() - rho.matrix()), 1e-12);
}

TEST(Compose, SwapExchangesFactors) {
  RngStream rng(11, 0);
  const DensityMatrix a = random_density(2, rng);
  const DensityMatrix b = random_density(3, rng);
  EXPECT_LE(max_abs(swap_channel(2, 3).apply(tensor(a, b)).matrix() - tensor(b, a).matrix()), 1e-14);
}

TEST(Compose, TensorWithDepolarizing) {
  RngStream rng(12, 0);
  const DensityMatrix rho = random_density(2, rng);
  const DensityMatrix gamma = random_density(3, rng);
  const QuantumChannel t = tensor_channel(QuantumChannel::identity(2), QuantumChannel::depolarizing(3, 3));
  const DensityMatrix out = t.apply(tensor(rho, gamma));
  EXPECT_LE(max_abs(out.matrix() - tensor(rho, DensityMatrix::maximally_mixed(3)).matrix()), 1e-14);
}

TEST(Compose, MatchesSequentialApplication) {
  RngStream rng(13, 0);
  const QuantumChannel t1 = random_channel(2, 3, 2, rng);
  const QuantumChannel t2 = random_channel(3, 2, 2, rng);
  const DensityMatrix rho = random_density(2, rng);
  EXPECT_LE(max_abs(compose(t2, t1).apply(rho).matrix() - t2.apply(t1.apply(rho)).matrix()), 1e-10);
}

TEST(Compose, RejectsDimensionMismatch) {
  EXPECT_THROW(compose(QuantumChannel::identity(2), QuantumChannel::identity(3)), DimensionMismatch);
}

TEST(PartialTraceChannel, MatchesPartialTrace) {
  RngStream rng(14, 0);
  const DensityMatrix rho = random_density(6, rng);
  const int dims[] = {2, 3};
  const int keep[] = {1};
  const QuantumChannel t = partial_trace_channel(dims, keep);
  EXPECT_LE(max_abs(t.apply(rho).matrix() - partial_trace(rho, {2, 3}, {1}).matrix()), 1e-14);
}

TEST(Mixture, IsConvexCombination) {
  RngStream rng(15, 0);
  const QuantumChannel a = random_channel(2, 2, 2, rng);
  const QuantumChannel b = QuantumChannel::depolarizing(2, 2);
  const DensityMatrix rho = random_density(2, rng);
  const QuantumChannel m = mixture({a, b}, {1.0, 3.0});
  const CMatrix expected = 0.25 * a.apply(rho.matrix()) + 0.75 * b.apply(rho.matrix());
  EXPECT_LE(max_abs(m.apply(rho.matrix()) - expected), 1e-14);
}

TEST(SupportContainment, ConstantOutputChannel) {
  RngStream rng(16, 0);
  const QuantumChannel t = QuantumChannel::replacer(DensityMatrix::diagonal({1.0, 0.0}), 2);
  const DensityMatrix sigma = enforce_min_eigenvalue(random_density(2, rng), 1e-2);
  const SupportContainmentReport r = check_support_containment(t, sigma, 50, rng);
  EXPECT_EQ(r.projector_rank, 1);
  EXPECT_LE(max_abs(r.projector.matrix() - HermitianOperator::diagonal({1.0, 0.0}).matrix()), 1e-14);
  EXPECT_EQ(r.max_violation, 0.0);
  EXPECT_TRUE(r.passed);
}

TEST(SupportContainment, UnitaryIsVacuous) {
  RngStream rng(17, 0);
  const QuantumChannel t = QuantumChannel::unitary(random_unitary(3, rng));
  const SupportContainmentReport r = check_support_containment(t, DensityMatrix::maximally_mixed(3), 20, rng);
  EXPECT_EQ(r.projector_rank, 3);
  EXPECT_LE(r.max_violation, 1e-14);
}

TEST(SupportContainment, ProjectedRandomChannel) {
  RngStream rng(18, 0);
  const QuantumChannel base = random_channel(3, 4, 2, rng);
  const QuantumChannel t = compose(confine_to_subspace(4, random_unitary(4, rng), 2), base);
  const DensityMatrix sigma = enforce_min_eigenvalue(random_density(3, rng), 1e-3);
  const SupportContainmentReport r = check_support_containment(t, sigma, 200, rng);
  EXPECT_EQ(r.projector_rank, 2);
  EXPECT_EQ(r.random_inputs, 200);
  EXPECT_EQ(r.basis_inputs, 9);
  EXPECT_LE(r.max_violation, 1e-9);
  EXPECT_TRUE(r.passed);
}

TEST(SupportContainment, RejectsRankDeficientSigma) {
  RngStream rng(19, 0);
  EXPECT_THROW(check_support_containment(QuantumChannel::identity(2), DensityMatrix::diagonal({1.0, 0.0}), 5, rng),
               SigmaNotFullRank);
}

TEST(SupportContainment, BasisSweepCoversOperatorSpace) {
  RngStream rng(20, 0);
  const SupportContainmentReport r =
      check_support_containment(QuantumChannel::identity(4), DensityMatrix::maximally_mixed(4), 0, rng);
  EXPECT_EQ(r.basis_inputs, 16);
  EXPECT_EQ(r.random_inputs, 0);
  EXPECT_TRUE(r.passed);
}
