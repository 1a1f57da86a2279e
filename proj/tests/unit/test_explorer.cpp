#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "safemdp/errors.hpp"
#include "safemdp/explorer.hpp"

using namespace safemdp;

namespace {

struct LineWorld {
  GridWorld grid;
  std::vector<double> r;
};

// 1 x 12 strip sloping down at 0.15 per cell; unsafe from column 7 on.
LineWorld line_world() {
  const std::vector<std::uint8_t> valid(12, 1);
  LineWorld w{masked_grid(1, 12, 1.0, valid), std::vector<double>(12)};
  for (std::size_t c = 0; c < 12; ++c) w.r[c] = 1.0 - 0.15 * double(c);
  return w;
}

ExplorerConfig line_config() {
  ExplorerConfig cfg;
  cfg.seed_set = StateSet(12, {0, 1});
  cfg.mode = LipschitzRule{0.2};
  cfg.lipschitz_for_expanders = 0.2;
  cfg.epsilon = 0.1;
  cfg.max_iterations = 80;
  return cfg;
}

CovarianceFn line_covariance() {
  return metric_covariance(Kernel::matern52(3.0, 1.0),
                           [](PointId a, PointId b) { return std::abs(double(a) - double(b)); });
}

ExplorationTrace run_line(Strategy strategy, std::uint64_t seed) {
  const LineWorld w = line_world();
  Environment env(w.r, 0.0, 0.01, seed);
  GpSafetyModel model(line_covariance(), 0.01, std::vector<std::optional<double>>(12));
  return run_strategy(strategy, w.grid.mdp, env, line_config(), model);
}

}  // namespace

TEST(Environment, SeededNoise) {
  Environment a({0.0, 1.0}, 0.5, 0.1, 3);
  Environment b({0.0, 1.0}, 0.5, 0.1, 3);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(a.observe(1), b.observe(1));
  EXPECT_TRUE(a.is_safe(1));
  EXPECT_TRUE(a.is_failure(0));
  EXPECT_THROW(a.set_failure_threshold(0.7), DomainError);
  a.set_failure_threshold(-1.0);
  EXPECT_FALSE(a.is_failure(0));
  Environment exact({2.0}, 0.0, 0.0, 1);
  EXPECT_EQ(exact.observe(0), 2.0);
}

TEST(Strategy, NamesRoundTrip) {
  for (Strategy s : {Strategy::kSafeMdp, Strategy::kNoExpanders, Strategy::kNonErgodic,
                     Strategy::kUnsafe, Strategy::kRandom}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_FALSE(parse_strategy("greedy").has_value());
}

TEST(ValidateConfig, RejectsBadSeeds) {
  const Mdp m = grid_mdp(2, 2, 1.0);
  ExplorerConfig cfg;
  cfg.seed_set = StateSet(4);
  EXPECT_THROW(validate_config(m, cfg), ConfigError);
  cfg.seed_set = StateSet(4, {0, 3});
  // Diagonal cells cannot reach each other inside the seed.
  EXPECT_THROW(validate_config(m, cfg), ConfigError);
  cfg.seed_set = StateSet(4, {0, 1});
  EXPECT_NO_THROW(validate_config(m, cfg));
  cfg.start_state = 2;
  EXPECT_THROW(validate_config(m, cfg), ConfigError);
  cfg.start_state.reset();
  cfg.epsilon = 0.0;
  EXPECT_THROW(validate_config(m, cfg), ConfigError);
}

TEST(RunSafeMdp, StaysSafeAndCoversSafeRegion) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ExplorationTrace tr = run_line(Strategy::kSafeMdp, seed);
    EXPECT_EQ(tr.unsafe_visits, 0u);
    EXPECT_FALSE(tr.violation_step.has_value());
    EXPECT_NE(tr.terminal_reason, TerminalReason::kViolation);
    EXPECT_GE(tr.final_sets.ergodic.count(), 5u);
    EXPECT_FALSE(tr.final_sets.safe.intersects(StateSet(12, {7, 8, 9, 10, 11})));
  }
}

TEST(RunSafeMdp, InvariantsHoldEveryIteration) {
  const ExplorationTrace tr = run_line(Strategy::kSafeMdp, 1);
  StateSet prev(12, {0, 1});
  for (const auto& rec : tr.records) {
    EXPECT_TRUE(rec.sets.ergodic.is_subset_of(rec.sets.safe));
    EXPECT_TRUE(prev.is_subset_of(rec.sets.ergodic));
    EXPECT_TRUE(rec.sets.expanders.is_subset_of(rec.sets.ergodic));
    EXPECT_TRUE(rec.sets.expanders.contains(rec.target));
    for (StateId s : rec.path.states) EXPECT_TRUE(rec.sets.safe.contains(s));
    prev = rec.sets.ergodic;
  }
}

TEST(RunSafeMdp, Deterministic) {
  const ExplorationTrace a = run_line(Strategy::kSafeMdp, 4);
  const ExplorationTrace b = run_line(Strategy::kSafeMdp, 4);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].target, b.records[i].target);
    EXPECT_EQ(a.records[i].observation, b.records[i].observation);
    EXPECT_EQ(a.records[i].bands_digest, b.records[i].bands_digest);
  }
}

TEST(RunBaseline, UnsafeLeavesTheSafeRegion) {
  const ExplorationTrace tr = run_line(Strategy::kUnsafe, 0);
  EXPECT_EQ(tr.terminal_reason, TerminalReason::kViolation);
  EXPECT_TRUE(tr.violation_step.has_value());
  EXPECT_GT(tr.unsafe_visits, 0u);
}

TEST(RunBaseline, RandomRespectsBudget) {
  const LineWorld w = line_world();
  Environment env(w.r, 0.0, 0.01, 2);
  ExplorerConfig cfg = line_config();
  cfg.max_iterations = 15;
  cfg.policy_seed = 9;
  const ExplorationTrace tr = run_baseline(Strategy::kRandom, w.grid.mdp, env, cfg, Kernel::matern52(3.0, 1.0));
  EXPECT_LE(tr.iterations, 15u);
  for (std::size_t i = 0; i < tr.records.size(); ++i) EXPECT_EQ(tr.records[i].path.hops(), 1u);
}

TEST(RunBaseline, NonErgodicFallsThroughTrapdoor) {
  const auto w = fixtures::trapdoor_world();
  std::size_t stuck = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Environment env(w.r, w.h, 0.05, seed);
    ExplorerConfig cfg;
    cfg.seed_set = w.seed;
    cfg.mode = LipschitzRule{0.1};
    cfg.lipschitz_for_expanders = 0.1;
    cfg.epsilon = 0.1;
    cfg.max_iterations = 60;
    GpSafetyModel m1(w.covariance, 0.05, std::vector<std::optional<double>>(w.r.size()));
    const auto ne = run_baseline(Strategy::kNonErgodic, w.mdp, env, cfg, m1);
    if (ne.terminal_reason == TerminalReason::kStuck) ++stuck;
    Environment env2(w.r, w.h, 0.05, seed);
    GpSafetyModel m2(w.covariance, 0.05, std::vector<std::optional<double>>(w.r.size()));
    const auto safe = run_safemdp(w.mdp, env2, cfg, m2);
    EXPECT_NE(safe.terminal_reason, TerminalReason::kStuck);
    EXPECT_FALSE(safe.final_sets.ergodic.contains(2));
  }
  EXPECT_GE(stuck, 4u);
}

TEST(GpSafetyModel, PinnedStatesHaveZeroVariance) {
  std::vector<std::optional<double>> pinned(12);
  pinned[3] = 5.0;
  GpSafetyModel model(line_covariance(), 0.01, pinned);
  const Moments m = model.moments();
  EXPECT_EQ(m.mean[3], 5.0);
  EXPECT_EQ(m.variance[3], 0.0);
  EXPECT_NEAR(m.variance[0], 1.0, 1e-12);
  Environment env(std::vector<double>(12, 0.5), 0.0, 0.0, 0);
  EXPECT_EQ(model.measure(0, env), 0.5);
  EXPECT_EQ(model.gp().size(), 1u);
  auto copy = model.clone();
  EXPECT_EQ(copy->moments().mean, model.moments().mean);
}

TEST(BandsDigest, ChangesWithBounds) {
  ConfidenceBands b = ConfidenceBands::prior(3, StateSet(3, {0}), 0.0);
  const auto d0 = bands_digest(b);
  b.upper[2] = 1.0;
  EXPECT_NE(bands_digest(b), d0);
}
