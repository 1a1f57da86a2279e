#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "safemdp/errors.hpp"
#include "safemdp/reach.hpp"

using namespace safemdp;

namespace {

// 0 -> 1 -> 2 -> 0 cycle plus a sink 3 reachable from 2.
Mdp cycle_with_sink() {
  return Mdp({{{0, 1}}, {{0, 2}}, {{0, 0}, {1, 3}}, {{0, 3}}},
             [](StateId a, StateId b) { return a == b ? 0.0 : 1.0; });
}

}  // namespace

TEST(Reach, OneStepReachability) {
  const Mdp m = cycle_with_sink();
  EXPECT_EQ(r_reach(m, StateSet(4, {2})), StateSet(4, {0, 2, 3}));
  EXPECT_EQ(r_reach(m, StateSet(4)), StateSet(4));
}

TEST(Reach, ReturnabilityOneStepAndFixpoint) {
  const Mdp m = cycle_with_sink();
  const StateSet all = StateSet::full(4);
  EXPECT_EQ(r_ret_one(m, all, StateSet(4, {0})), StateSet(4, {0, 2}));
  EXPECT_EQ(r_ret_fixpoint(m, all, StateSet(4, {0})), StateSet(4, {0, 1, 2}));
  // Paths may not leave `through`.
  EXPECT_EQ(r_ret_fixpoint(m, StateSet(4, {1}), StateSet(4, {0})), StateSet(4, {0}));
  const auto traced = r_ret_fixpoint_traced(m, all, StateSet(4, {0}));
  EXPECT_EQ(traced.iterations, 3u);
}

TEST(Reach, SafeRules) {
  const Mdp m = Mdp({{{0, 0}}, {{0, 1}}, {{0, 2}}}, [](StateId a, StateId b) {
    return std::abs(double(a) - double(b));
  });
  const std::vector<double> r{1.0, 0.0, -1.0};
  const StateSet base(3, {0});
  EXPECT_EQ(r_safe_eps(m, base, r, 0.0, 1.0, 0.0), StateSet(3, {0, 1}));
  EXPECT_EQ(r_safe_eps(m, base, r, 0.1, 1.0, 0.0), StateSet(3, {0}));
  EXPECT_EQ(r_safe_eps(m, base, r, 0.0, SafetyRule{DirectRule{}}, -0.5), StateSet(3, {0, 1}));
  // Nothing can be certified from an empty set.
  EXPECT_EQ(r_safe_eps(m, StateSet(3), r, 0.0, SafetyRule{DirectRule{}}, -5.0), StateSet(3));
}

TEST(Reach, RejectsMismatchedSizes) {
  const Mdp m = cycle_with_sink();
  EXPECT_THROW(r_reach(m, StateSet(3)), DomainError);
  const std::vector<double> r(3, 0.0);
  EXPECT_THROW(r_safe_eps(m, StateSet(4), r, 0.0, 1.0, 0.0), DomainError);
}

TEST(Reach, RandomMdpsMatchOracles) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 8 + trial % 10;
    const Mdp m = oracle::random_mdp(rng, n, 3);
    std::vector<double> r(n);
    for (auto& v : r) v = u(rng);
    const StateSet a = oracle::random_set(rng, n, 0.3);
    const StateSet b = oracle::random_set(rng, n, 0.5);
    const auto ba = oracle::to_bits(a);
    const auto bb = oracle::to_bits(b);
    const double eps = 0.1 * (trial % 3);
    const double lip = 0.2 + 0.1 * (trial % 4);
    EXPECT_EQ(oracle::to_bits(r_reach(m, a)), oracle::r_reach(m, ba));
    EXPECT_EQ(oracle::to_bits(r_ret_one(m, b, a)), oracle::r_ret_one(m, bb, ba));
    EXPECT_EQ(oracle::to_bits(r_ret_fixpoint(m, b, a)), oracle::r_ret_bar(m, bb, ba));
    EXPECT_EQ(oracle::to_bits(r_safe_eps(m, a, r, eps, lip, -0.3)),
              oracle::r_safe(m, ba, r, eps, lip, -0.3));
    EXPECT_EQ(oracle::to_bits(r_eps(m, a, r, eps, lip, -0.3)), oracle::r_eps(m, ba, r, eps, lip, -0.3));
    EXPECT_EQ(oracle::to_bits(r_eps_fixpoint(m, a, r, eps, lip, -0.3)),
              oracle::r_eps_bar(m, ba, r, eps, lip, -0.3));
    EXPECT_EQ(oracle::to_bits(r_eps_fixpoint(m, a, r, eps, SafetyRule{DirectRule{}}, -0.3)),
              oracle::r_eps_bar(m, ba, r, eps, std::nullopt, -0.3));
  }
}

TEST(Reach, FixpointIsClosedAndContainsSeed) {
  std::mt19937_64 rng(7);
  const Mdp m = oracle::random_mdp(rng, 20, 3);
  std::vector<double> r(20, 1.0);
  const StateSet seed(20, {0});
  const auto fp = r_eps_fixpoint_traced(m, seed, r, 0.0, SafetyRule{DirectRule{}}, 0.0);
  EXPECT_TRUE(seed.is_subset_of(fp.set));
  EXPECT_EQ(r_eps(m, fp.set, r, 0.0, SafetyRule{DirectRule{}}, 0.0), fp.set);
  EXPECT_LE(fp.iterations, 20u);
}
