#include <gtest/gtest.h>

#include <cmath>

#include "athermality/feasibility.hpp"

using namespace athermality;

namespace {

HermitianOperator qubit_h() { return HermitianOperator::diagonal({0.0, 1.0}); }

FeasibilityProblem qubit_problem(double p, double q) {
  return {DensityMatrix::diagonal({p, 1.0 - p}), DensityMatrix::diagonal({q, 1.0 - q}), qubit_h(), qubit_h(), 1.0, {}};
}

// Instance with a planted GP witness: σ = G(ρ) for a random GP channel G.
FeasibilityProblem planted_problem(int d, RngStream& rng) {
  const HermitianOperator h = random_hermitian(d, 1.0, rng);
  const QuantumChannel g = random_gp_channel(h, 1.0, rng);
  const DensityMatrix rho = random_density(d, rng);
  return {rho, g.apply(rho), h, h, 1.0, {}};
}

}  // namespace

TEST(ClassicalLP, QubitWitnessIsUnique) {
  // Column-stochastic T = [[a, b], [1−a, 1−b]] with T p = q and T ω = ω has a
  // unique solution; solve the 2×2 system directly.
  const double w = 1.0 / (1.0 + std::exp(-1.0));
  const double a_oracle = (9.0 * w - 8.0) / (10.0 * w - 9.0);
  const double b_oracle = 8.0 - 9.0 * a_oracle;
  const double a_frozen = 0.8408078852485841;
  const double b_frozen = 0.43272903276274377;
  EXPECT_NEAR(a_oracle, a_frozen, 1e-13);
  EXPECT_NEAR(b_oracle, b_frozen, 1e-12);

  const FeasibilityReport r = classical_gp_feasibility(qubit_problem(0.9, 0.8));
  ASSERT_EQ(r.verdict, Verdict::Feasible);
  ASSERT_TRUE(r.witness.has_value());
  const Eigen::MatrixXd t = transition_matrix(*r.witness);
  EXPECT_NEAR(t(0, 0), a_frozen, 1e-9);
  EXPECT_NEAR(t(0, 1), b_frozen, 1e-9);
  EXPECT_NEAR(t(1, 0), 1.0 - a_frozen, 1e-9);
  EXPECT_NEAR(t(1, 1), 1.0 - b_frozen, 1e-9);
}

TEST(ClassicalLP, InfeasibleBeyondGibbs) {
  // moving away from ω toward |0⟩ raises ΔF, so the LP has no solution
  const FeasibilityReport r = classical_gp_feasibility(qubit_problem(0.8, 0.9));
  EXPECT_EQ(r.verdict, Verdict::InfeasibleByLP);
  EXPECT_FALSE(r.witness.has_value());
}

TEST(ClassicalLP, RejectsNonCommuting) {
  FeasibilityProblem p = qubit_problem(0.9, 0.8);
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  p.rho = DensityMatrix::pure(plus);
  EXPECT_THROW(classical_gp_feasibility(p), NotCommuting);
}

TEST(SimplexLP, FindsPointAndDetectsInfeasibility) {
  Eigen::MatrixXd a(1, 2);
  a << 1, 1;
  Eigen::VectorXd b(1);
  b << 1;
  const lp::FeasibilityResult ok = lp::find_feasible_point(a, b);
  ASSERT_TRUE(ok.feasible);
  EXPECT_NEAR(ok.x.sum(), 1.0, 1e-12);
  EXPECT_GE(ok.x.minCoeff(), 0.0);
  b << -1;
  const lp::FeasibilityResult bad = lp::find_feasible_point(a, b);
  EXPECT_FALSE(bad.feasible);
  EXPECT_NEAR(bad.infeasibility, 1.0, 1e-12);
}

TEST(Decide, MonotoneScreenRejects) {
  const FeasibilityReport r = decide_feasibility(qubit_problem(0.8, 0.9));
  EXPECT_EQ(r.verdict, Verdict::InfeasibleByMonotone);
  EXPECT_GT(r.monotone_gap, 0.0);
  EXPECT_NEAR(r.monotone_gap, monotone_screen(qubit_problem(0.8, 0.9)), 0.0);
}

TEST(Decide, AnythingToGibbs) {
  RngStream rng(1, 0);
  const HermitianOperator h = random_hermitian(3, 1.0, rng);
  const FeasibilityProblem p{random_density(3, rng), gibbs_state(1.0, h), h, h, 1.0, {}};
  const FeasibilityReport r = decide_feasibility(p);
  ASSERT_EQ(r.verdict, Verdict::Feasible);
  EXPECT_TRUE(verify_witness(p, *r.witness).ok());
}

TEST(Decide, PlantedWitnessIsRecovered) {
  RngStream rng(2, 0);
  for (int t = 0; t < 5; ++t) {
    const FeasibilityProblem p = planted_problem(2 + t % 2, rng);
    const FeasibilityReport r = decide_feasibility(p);
    ASSERT_EQ(r.verdict, Verdict::Feasible) << "instance " << t << " residual " << r.residual;
    const WitnessCheck c = verify_witness(p, *r.witness);
    EXPECT_LE(c.state_residual, kWitnessTol);
    EXPECT_LE(c.gibbs_residual, kWitnessTol);
    EXPECT_GE(c.choi_min_eigenvalue, -kWitnessTol);
    EXPECT_LE(monotone_screen(p), 1e-9);
  }
}

TEST(Decide, DykstraAlsoRecoversPlantedWitness) {
  RngStream rng(3, 0);
  const FeasibilityProblem p = planted_problem(2, rng);
  const FeasibilityReport r = solve_choi_feasibility(p, ProjectionMethod::Dykstra);
  ASSERT_EQ(r.verdict, Verdict::Feasible) << r.residual;
  EXPECT_TRUE(verify_witness(p, *r.witness).ok());
}

TEST(Decide, ChoiAgreesWithLPOnCommutingInstances) {
  RngStream rng(4, 0);
  int feasible = 0;
  for (int t = 0; t < 20; ++t) {
    const int d = rng.uniform_int(2, 3);
    RVector e(d), pv(d), qv(d);
    for (int i = 0; i < d; ++i) e[i] = rng.uniform(0.0, 2.0);
    const HermitianOperator h = HermitianOperator::diagonal(e);
    const DensityMatrix omega = gibbs_state(1.0, h);
    for (int i = 0; i < d; ++i) pv[i] = rng.uniform();
    // targets close to ω keep roughly half the instances feasible
    for (int i = 0; i < d; ++i) qv[i] = std::max(0.01, omega.matrix()(i, i).real() + 0.2 * (rng.uniform() - 0.5));
    pv /= pv.sum();
    qv /= qv.sum();
    const FeasibilityProblem p{DensityMatrix::diagonal(pv), DensityMatrix::diagonal(qv), h, h, 1.0, {}};
    const FeasibilityReport lp_rep = classical_gp_feasibility(p);
    const FeasibilityReport choi = solve_choi_feasibility(p);
    const bool lp_ok = lp_rep.verdict == Verdict::Feasible;
    feasible += lp_ok;
    EXPECT_EQ(lp_ok, choi.verdict == Verdict::Feasible) << "instance " << t;
  }
  EXPECT_GT(feasible, 0);
  EXPECT_LT(feasible, 20);
}

TEST(Decide, TraceIsRecordedOnRequest) {
  RngStream rng(5, 0);
  FeasibilityProblem p = planted_problem(2, rng);
  p.options.record_trace = true;
  const FeasibilityReport r = solve_choi_feasibility(p);
  EXPECT_EQ(static_cast<int>(r.residual_trace.size()), r.iterations);
}

TEST(Decide, RejectsLargeDimensions) {
  const FeasibilityProblem p{DensityMatrix::maximally_mixed(5), DensityMatrix::maximally_mixed(2),
                             HermitianOperator::identity(5), qubit_h(), 1.0, {}};
  EXPECT_THROW(decide_feasibility(p), DimensionTooLarge);
}

TEST(Decide, RejectsMismatchedHamiltonian) {
  FeasibilityProblem p = qubit_problem(0.9, 0.8);
  p.h = HermitianOperator::identity(3);
  EXPECT_THROW(decide_feasibility(p), DimensionMismatch);
}

TEST(Decide, RejectsBadOptions) {
  FeasibilityProblem p = qubit_problem(0.9, 0.8);
  p.options.max_iter = 0;
  EXPECT_THROW(decide_feasibility(p), ConfigError);
}

TEST(Projections, PsdIsIdempotentAndPositive) {
  RngStream rng(6, 0);
  const CMatrix x = random_hermitian(6, 1.0, rng).matrix();
  const CMatrix p1 = project_psd(x);
  EXPECT_GE(eig_hermitian(HermitianOperator(p1)).eigenvalues.minCoeff(), -1e-12);
  EXPECT_LE(max_abs(project_psd(p1) - p1), 1e-12);
}

TEST(Projections, AffineProjectionsAreExact) {
  RngStream rng(7, 0);
  const FeasibilityProblem p = planted_problem(3, rng);
  const std::vector<AffineConstraint> sets = choi_constraints(p);
  ASSERT_FALSE(sets.empty());
  const CMatrix j = random_hermitian(9, 1.0, rng).matrix();
  for (const AffineConstraint& c : sets) {
    const CMatrix pj = c.project(j);
    EXPECT_LE(max_abs(c.violation(pj)), 1e-10) << c.name();
    EXPECT_LE(max_abs(c.project(pj) - pj), 1e-10) << c.name();
  }
}

TEST(Witness, VerifyFlagsWrongChannel) {
  const FeasibilityProblem p = qubit_problem(0.9, 0.8);
  const WitnessCheck c = verify_witness(p, QuantumChannel::identity(2));
  EXPECT_NEAR(c.state_residual, 0.2, 1e-14);
  EXPECT_EQ(c.gibbs_residual, 0.0);
  EXPECT_FALSE(c.ok());
}

TEST(Verdict, Names) {
  EXPECT_EQ(to_string(Verdict::Feasible), "Feasible");
  EXPECT_EQ(to_string(Verdict::InfeasibleByMonotone), "InfeasibleByMonotone");
}
