#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "safemdp/errors.hpp"
#include "safemdp/mdp.hpp"

using namespace safemdp;
using namespace safemdp::grid_action;

TEST(GridMdp, ShapeAndMoves) {
  const Mdp m = grid_mdp(3, 4, 2.0);
  ASSERT_EQ(m.num_states(), 12u);
  // Corner: down, right, stay.
  EXPECT_EQ(m.actions(0).size(), 3u);
  // Interior: four moves and stay.
  EXPECT_EQ(m.actions(5).size(), 5u);
  EXPECT_EQ(m.step(5, kUp), 1u);
  EXPECT_EQ(m.step(5, kDown), 9u);
  EXPECT_EQ(m.step(5, kLeft), 4u);
  EXPECT_EQ(m.step(5, kRight), 6u);
  EXPECT_EQ(step(m, 5, kStay), 5u);
  EXPECT_THROW(m.step(0, kUp), UnknownActionError);
  EXPECT_FALSE(m.try_step(0, kLeft).has_value());
  EXPECT_DOUBLE_EQ(m.distance(0, 11), (2 + 3) * 2.0);
}

TEST(GridMdp, RejectsEmptyGrid) {
  EXPECT_THROW(grid_mdp(0, 3, 1.0), DomainError);
  EXPECT_THROW(grid_mdp(2, 2, 0.0), DomainError);
}

TEST(Mdp, ActionsSortedAndDuplicatesRejected) {
  Mdp m({{{3, 1}, {0, 0}}, {}}, [](StateId, StateId) { return 1.0; });
  EXPECT_EQ(m.actions(0)[0].action, 0);
  // A state without actions gets a stay self-loop.
  ASSERT_EQ(m.actions(1).size(), 1u);
  EXPECT_EQ(m.actions(1)[0].successor, 1u);
  EXPECT_THROW(Mdp({{{0, 0}, {0, 0}}}, [](StateId, StateId) { return 0.0; }), DomainError);
  EXPECT_THROW(Mdp({{{0, 5}}}, [](StateId, StateId) { return 0.0; }), DomainError);
}

TEST(Mdp, PredecessorsInvertTransitions) {
  std::mt19937_64 rng(3);
  std::vector<std::vector<Transition>> actions(15);
  for (auto& a : actions) {
    for (int i = 0; i < 3; ++i) a.push_back({i, static_cast<StateId>(rng() % 15)});
  }
  const Mdp m(actions, [](StateId, StateId) { return 1.0; });
  for (StateId s = 0; s < 15; ++s) {
    std::set<StateId> expect;
    for (StateId p = 0; p < 15; ++p) {
      for (const auto& t : m.actions(p)) {
        if (t.successor == s) expect.insert(p);
      }
    }
    const auto preds = m.predecessors(s);
    EXPECT_EQ(std::set<StateId>(preds.begin(), preds.end()), expect);
    EXPECT_EQ(preds.size(), expect.size());
  }
}

TEST(MaskedGrid, SkipsInvalidCells) {
  const std::vector<std::uint8_t> valid{1, 0, 1, 1, 1, 1};
  const GridWorld g = masked_grid(2, 3, 1.0, valid);
  EXPECT_EQ(g.mdp.num_states(), 5u);
  EXPECT_FALSE(g.layout.state_of_cell[1].has_value());
  // Cell 0 cannot move right into the hole.
  EXPECT_FALSE(g.mdp.try_step(0, kRight).has_value());
  EXPECT_EQ(g.layout.cell_of_state[1], 2u);
  EXPECT_DOUBLE_EQ(g.layout.euclidean(0, 4), std::hypot(1.0, 2.0));
}

TEST(MaskedGrid, BallQueryCoversManhattanBall) {
  std::vector<std::uint8_t> valid(7 * 6, 1);
  valid[10] = 0;
  const GridWorld g = masked_grid(7, 6, 0.5, valid);
  const auto& ball = g.mdp.ball_query();
  ASSERT_TRUE(ball);
  for (StateId c : {StateId(0), StateId(17), StateId(30)}) {
    for (double radius : {0.0, 0.5, 1.2, 2.0}) {
      std::vector<StateId> got;
      ball(c, radius, got);
      std::set<StateId> expect;
      for (StateId s = 0; s < g.mdp.num_states(); ++s) {
        if (g.mdp.distance(c, s) <= radius) expect.insert(s);
      }
      for (StateId s : expect) EXPECT_NE(std::find(got.begin(), got.end(), s), got.end());
    }
  }
}

TEST(Augment, StructureAndDynamics) {
  const Mdp base = grid_mdp(2, 2, 1.0);
  const AugmentedMdp aug = augment(base);
  std::size_t edges = 0;
  for (StateId s = 0; s < base.num_states(); ++s) edges += base.actions(s).size();
  EXPECT_EQ(aug.num_states(), base.num_states() + edges);
  EXPECT_DOUBLE_EQ(aug.offset(), 0.5);
  const StateId sa = aug.action_state_of(0, kRight);
  EXPECT_TRUE(aug.is_action_state(sa));
  EXPECT_EQ(aug.original_of(sa), (AugmentedState{0, kRight}));
  EXPECT_EQ(aug.mdp().step(0, kRight), sa);
  EXPECT_EQ(aug.mdp().step(sa, kRight), 1u);
  EXPECT_EQ(aug.mdp().actions(sa).size(), 1u);
  EXPECT_FALSE(aug.is_action_state(3));
  EXPECT_THROW(aug.action_state_of(0, kUp), UnknownActionError);
}

TEST(Augment, MetricAddsOffsetPerActionState) {
  const Mdp base = grid_mdp(1, 3, 2.0);
  const AugmentedMdp aug = augment(base, 0.25);
  const StateId a = aug.action_state_of(0, kRight);
  const StateId b = aug.action_state_of(2, kLeft);
  EXPECT_DOUBLE_EQ(aug.mdp().distance(0, 2), 4.0);
  EXPECT_DOUBLE_EQ(aug.mdp().distance(0, a), 0.25);
  EXPECT_DOUBLE_EQ(aug.mdp().distance(a, b), 4.5);
  EXPECT_DOUBLE_EQ(aug.mdp().distance(a, a), 0.0);
  EXPECT_THROW(augment(base, -1.0), DomainError);
}

TEST(Augment, WithMetricKeepsDynamics) {
  const AugmentedMdp aug = augment(grid_mdp(2, 2, 1.0));
  const AugmentedMdp other = aug.with_metric([](StateId, StateId) { return 7.0; });
  EXPECT_DOUBLE_EQ(other.mdp().distance(0, 1), 7.0);
  EXPECT_EQ(other.mdp().step(0, kDown), aug.mdp().step(0, kDown));
}
