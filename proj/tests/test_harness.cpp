#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "athermality/harness.hpp"

using namespace athermality;

namespace {

HarnessConfig small_config() {
  HarnessConfig cfg;
  cfg.master_seed = 7;
  cfg.trials = 20;
  cfg.search_trials = 400;
  cfg.hill_climb_steps = 30;
  cfg.support_channels = 5;
  cfg.support_inputs = 20;
  cfg.las_instances = 3;
  return cfg;
}

class ThreadsGuard {
 public:
  explicit ThreadsGuard(const char* value) {
    if (const char* old = std::getenv("ATHERMALITY_THREADS")) old_ = old;
    setenv("ATHERMALITY_THREADS", value, 1);
  }
  ~ThreadsGuard() {
    if (old_.empty())
      unsetenv("ATHERMALITY_THREADS");
    else
      setenv("ATHERMALITY_THREADS", old_.c_str(), 1);
  }

 private:
  std::string old_;
};

}  // namespace

TEST(Harness, SmallSuitePasses) {
  const SuiteReport s = run_suite(small_config());
  for (const CheckReport& r : s.checks)
    if (r.counts_toward_suite) EXPECT_TRUE(r.passed) << r.check_name << " max_violation " << r.max_violation;
  EXPECT_TRUE(s.passed);
}

TEST(Harness, SingleTrialSmoke) {
  HarnessConfig cfg = small_config();
  cfg.trials = 1;
  cfg.search_trials = 1;
  cfg.hill_climb_steps = 0;
  cfg.las_instances = 0;
  cfg.support_channels = 1;
  const SuiteReport s = run_suite(cfg);
  ASSERT_NE(find_check(s, "dpi/relative_entropy"), nullptr);
  EXPECT_EQ(find_check(s, "dpi/relative_entropy")->trials_run, 1);
}

TEST(Harness, DepolarizingPoolNeverIncreasesDivergence) {
  HarnessConfig cfg = small_config();
  cfg.channel_pool = ChannelPool::Depolarizing;
  const CheckReport r = check_dpi(cfg, DivergenceSpec::relative_entropy());
  ASSERT_EQ(static_cast<int>(r.trial_values.size()), cfg.trials);
  for (double v : r.trial_values) EXPECT_LE(v, 1e-12);
}

TEST(Harness, RenyiDpiAndAdditivity) {
  const HarnessConfig cfg = small_config();
  for (const DivergenceSpec& s : renyi_specs(cfg)) {
    EXPECT_TRUE(check_dpi(cfg, s).passed) << s.label();
    EXPECT_TRUE(check_additivity(cfg, s).passed) << s.label();
  }
}

TEST(Harness, ContinuityLadderShrinks) {
  const CheckReport r = check_continuity(small_config(), DivergenceSpec::relative_entropy());
  EXPECT_EQ(r.kind, "ladder");
  EXPECT_TRUE(r.passed);
}

TEST(Harness, ProductStatesHaveZeroSuperadditivityGap) {
  RngStream rng(3, 0);
  const int dims[] = {2, 3};
  for (const DivergenceSpec& spec :
       {DivergenceSpec::relative_entropy(), DivergenceSpec::petz(0.5), DivergenceSpec::sandwiched(2.0)}) {
    const detail::SearchCandidate c{tensor(random_density(2, rng), random_density(3, rng)),
                                    enforce_min_eigenvalue(random_density(2, rng), 1e-3),
                                    enforce_min_eigenvalue(random_density(3, rng), 1e-3)};
    EXPECT_NEAR(detail::superadditivity_gap(spec, c, dims), 0.0, 1e-10) << spec.label();
  }
}

TEST(Harness, RelativeEntropySearchFindsNothing) {
  const CheckReport r = search_superadditivity_violation(small_config(), DivergenceFamily::RelativeEntropy, 1.0, 200);
  EXPECT_EQ(r.kind, "sanity");
  EXPECT_EQ(r.witness_count, 0);
  EXPECT_LE(r.max_violation, 1e-9);
  EXPECT_TRUE(r.passed);
}

TEST(Harness, RenyiSearchRejectsAlphaOne) {
  EXPECT_THROW(search_superadditivity_violation(small_config(), DivergenceFamily::RenyiPetz, 1.0), AlphaOutOfRange);
}

TEST(Harness, SearchWitnessesReplayExactly) {
  const std::vector<CheckReport> reports = search_family(small_config(), DivergenceFamily::RenyiSandwiched);
  ASSERT_FALSE(reports.empty());
  EXPECT_EQ(reports[0].check_name, "superadditivity_search/renyi_sandwiched");
  EXPECT_TRUE(reports[0].passed);
  int replayed = 0;
  for (const CheckReport& r : reports)
    for (const ViolationWitness& w : r.witnesses) {
      EXPECT_GT(w.gap, small_config().witness_threshold);
      EXPECT_EQ(replay(w), w.gap);
      ++replayed;
    }
  EXPECT_GT(replayed, 0);
}

TEST(Harness, WitnessStorageIsCapped) {
  HarnessConfig cfg = small_config();
  cfg.max_witnesses = 2;
  const CheckReport r = search_superadditivity_violation(cfg, DivergenceFamily::RenyiPetz, 0.5, 400);
  EXPECT_LE(static_cast<int>(r.witnesses.size()), 2);
  EXPECT_GE(r.witness_count, static_cast<int>(r.witnesses.size()));
}

TEST(Harness, ResultsIndependentOfThreadCount) {
  const HarnessConfig cfg = small_config();
  std::vector<double> one, many;
  {
    ThreadsGuard g("1");
    one = check_dpi(cfg, DivergenceSpec::petz(1.5)).trial_values;
  }
  {
    ThreadsGuard g("4");
    many = check_dpi(cfg, DivergenceSpec::petz(1.5)).trial_values;
  }
  EXPECT_EQ(one, many);
}

TEST(Harness, SameSeedSameReport) {
  const HarnessConfig cfg = small_config();
  EXPECT_EQ(check_additivity(cfg, DivergenceSpec::relative_entropy()).trial_values,
            check_additivity(cfg, DivergenceSpec::relative_entropy()).trial_values);
  HarnessConfig other = cfg;
  other.master_seed = 8;
  EXPECT_NE(check_monotone_plain(cfg).trial_values, check_monotone_plain(other).trial_values);
}

TEST(Harness, DeltaFChecksPass) {
  const HarnessConfig cfg = small_config();
  EXPECT_TRUE(check_deltaf_consistency(cfg).passed);
  EXPECT_TRUE(check_deltaf_additivity(cfg).passed);
  EXPECT_TRUE(check_deltaf_gauge(cfg).passed);
  EXPECT_TRUE(check_deltaf_superadditivity(cfg).passed);
  EXPECT_TRUE(check_modular_round_trip(cfg).passed);
  EXPECT_TRUE(check_monotone_plain(cfg).passed);
}

TEST(Harness, BellGapIsTwoLogTwo) {
  const CheckReport r = check_cc_swap_bell(small_config());
  EXPECT_TRUE(r.passed);
  bool found = false;
  for (const auto& [name, v] : r.metrics)
    if (name == "gap") {
      found = true;
      EXPECT_NEAR(v, 2.0 * std::log(2.0), 1e-12);
    }
  EXPECT_TRUE(found);
}

TEST(Las, NoNoiseGivesZero) {
  RngStream rng(4, 0);
  const auto [rho, sigma] = las_canned_instance();
  const LasReport r = las_finite_n_demo(rho, sigma, 3, 0.0, rng);
  ASSERT_EQ(r.steps.size(), 3u);
  for (const LasStep& s : r.steps) {
    EXPECT_NEAR(s.d_n, 0.0, 1e-14);
    EXPECT_NEAR(s.bound, 0.0, 1e-14);
  }
  EXPECT_TRUE(r.passed);
}

TEST(Las, NoisyCannedInstanceHolds) {
  RngStream rng(5, 0);
  const auto [rho, sigma] = las_canned_instance();
  const LasReport r = las_finite_n_demo(rho, sigma, 3, 0.01, rng);
  EXPECT_TRUE(r.passed);
  for (const LasStep& s : r.steps) EXPECT_LE(s.max_marginal_distance, 0.01 / s.n + 1e-12);
}

TEST(Las, RejectsLargeInstances) {
  RngStream rng(6, 0);
  const DensityMatrix m = DensityMatrix::maximally_mixed(2);
  EXPECT_THROW(las_finite_n_demo(m, m, 4, 0.01, rng), DimensionTooLarge);
  const DensityMatrix big = DensityMatrix::maximally_mixed(5);
  EXPECT_THROW(las_finite_n_demo(big, big, 3, 0.01, rng), DimensionTooLarge);
}

TEST(Config, ValidationRejectsBadValues) {
  auto expect_bad = [](auto edit) {
    HarnessConfig cfg;
    edit(cfg);
    EXPECT_THROW(cfg.validate(), ConfigError);
  };
  expect_bad([](HarnessConfig& c) { c.trials = 0; });
  expect_bad([](HarnessConfig& c) { c.dims = {1}; });
  expect_bad([](HarnessConfig& c) { c.dims = {9}; });
  expect_bad([](HarnessConfig& c) { c.dims.clear(); });
  expect_bad([](HarnessConfig& c) { c.alpha_grid = {1.0}; });
  expect_bad([](HarnessConfig& c) { c.sigma_min_eig = 0.0; });
  expect_bad([](HarnessConfig& c) { c.beta = -1.0; });
  expect_bad([](HarnessConfig& c) { c.search_dims = {2, 40}; });
  EXPECT_NO_THROW(HarnessConfig{}.validate());
}

TEST(Config, ChannelPoolNames) {
  for (auto p : {ChannelPool::Stinespring, ChannelPool::Depolarizing, ChannelPool::Unitary, ChannelPool::Mixed})
    EXPECT_EQ(channel_pool_from_string(to_string(p)), p);
  EXPECT_THROW(channel_pool_from_string("kraus"), ConfigError);
}
