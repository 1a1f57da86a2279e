#include <gtest/gtest.h>

#include <bitset>
#include <random>

#include "safemdp/state_set.hpp"

using safemdp::StateId;
using safemdp::StateSet;

TEST(StateSet, InsertEraseContains) {
  StateSet s(130);
  s.insert(0);
  s.insert(64);
  s.insert(129);
  EXPECT_TRUE(s.contains(64));
  EXPECT_FALSE(s.contains(63));
  EXPECT_FALSE(s.contains(500));
  EXPECT_EQ(s.count(), 3u);
  s.erase(64);
  EXPECT_FALSE(s.contains(64));
  EXPECT_EQ(s.members(), (std::vector<StateId>{0, 129}));
}

TEST(StateSet, InsertOutsideUniverseThrows) {
  StateSet s(4);
  EXPECT_ANY_THROW(s.insert(4));
}

TEST(StateSet, AlgebraMatchesStdBitset) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::bitset<100> a;
    std::bitset<100> b;
    StateSet sa(100);
    StateSet sb(100);
    for (StateId i = 0; i < 100; ++i) {
      if (rng() % 3 == 0) {
        a.set(i);
        sa.insert(i);
      }
      if (rng() % 2 == 0) {
        b.set(i);
        sb.insert(i);
      }
    }
    auto check = [](const StateSet& s, const std::bitset<100>& bits) {
      EXPECT_EQ(s.count(), bits.count());
      for (StateId i = 0; i < 100; ++i) EXPECT_EQ(s.contains(i), bits.test(i));
    };
    check(sa | sb, a | b);
    check(sa & sb, a & b);
    check(sa - sb, a & ~b);
    check(sa.complement(), ~a);
    EXPECT_EQ(sa.is_subset_of(sb), (a & ~b).none());
    EXPECT_EQ(sa.intersects(sb), (a & b).any());
  }
}

TEST(StateSet, ComplementKeepsUniverse) {
  StateSet s(70, {3});
  const StateSet c = s.complement();
  EXPECT_EQ(c.count(), 69u);
  EXPECT_EQ(c.complement(), s);
  EXPECT_EQ(StateSet::full(70).count(), 70u);
}

TEST(StateSet, BitStringRoundTrip) {
  StateSet s(9, {0, 4, 8});
  EXPECT_EQ(s.to_bits(), "100010001");
  EXPECT_EQ(StateSet::from_bits("100010001"), s);
}

TEST(StateSet, MixedUniversesThrow) {
  StateSet a(5);
  StateSet b(6);
  EXPECT_ANY_THROW(a |= b);
}
