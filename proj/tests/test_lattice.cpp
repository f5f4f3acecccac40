#include <gtest/gtest.h>

#include <set>

#include "multishift/error.hpp"
#include "multishift/lattice.hpp"

using namespace multishift;

namespace {

MultiIndex mi(std::vector<int> v) { return MultiIndex(std::move(v)); }

}  // namespace

TEST(Enumerate, OneDimensional) {
  const auto e = enumerate(1, 3);
  ASSERT_EQ(e.size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(e[static_cast<std::size_t>(k)], mi({k}));
}

TEST(Enumerate, GradedThenLexicographic) {
  const auto e = enumerate(2, 1);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], mi({0, 0}));
  EXPECT_EQ(e[1], mi({0, 1}));
  EXPECT_EQ(e[2], mi({1, 0}));
}

TEST(Enumerate, CountsMatchBinomial) {
  EXPECT_EQ(enumerate(3, 2).size(), 10u);
  for (std::size_t d = 1; d <= 4; ++d)
    for (int n = 0; n <= 6; ++n) EXPECT_EQ(enumerate(d, n).size(), binomial(n + d, d));
}

TEST(Enumerate, DownwardClosedAndPredecessorsEarlier) {
  for (std::size_t d = 1; d <= 3; ++d) {
    const auto e = enumerate(d, 5);
    const Truncation t(d, 5);
    for (std::size_t p = 0; p < e.size(); ++p) {
      for (std::size_t j = 0; j < d; ++j) {
        if (e[p][j] == 0) continue;
        const auto q = t.find(e[p].minus(j));
        ASSERT_TRUE(q.has_value());
        EXPECT_LT(*q, p);
      }
      if (p > 0) EXPECT_TRUE(graded_less(e[p - 1], e[p]));
    }
  }
}

TEST(MultiIndexTest, ShiftsAndDegree) {
  const MultiIndex a = mi({1, 2});
  EXPECT_EQ(a.degree(), 3);
  EXPECT_EQ(a.plus(0), mi({2, 2}));
  EXPECT_EQ(a.minus(1), mi({1, 1}));
  EXPECT_THROW(mi({0, 2}).minus(0), Error);
  EXPECT_THROW(mi({-1}), Error);
  EXPECT_THROW(mi({}), Error);
  EXPECT_EQ(to_string(a), "[1,2]");
}

TEST(Paths, CanonicalExamples) {
  EXPECT_TRUE(monotone_path(mi({0, 0})).empty());
  const auto p20 = monotone_path(mi({2, 0}));
  ASSERT_EQ(p20.size(), 2u);
  EXPECT_EQ(p20[0].direction, 0u);
  EXPECT_EQ(p20[1].direction, 0u);
  const auto p12 = monotone_path(mi({1, 2}));
  ASSERT_EQ(p12.size(), 3u);
  EXPECT_EQ(p12[0], (PathStep{mi({0, 0}), 0}));
  EXPECT_EQ(p12[1], (PathStep{mi({1, 0}), 1}));
  EXPECT_EQ(p12[2], (PathStep{mi({1, 1}), 1}));
}

TEST(Paths, ReverseOrderStartsWithLastCoordinate) {
  const auto r = reverse_monotone_path(mi({1, 2}));
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].direction, 1u);
  EXPECT_EQ(r[1].direction, 1u);
  EXPECT_EQ(r[2], (PathStep{mi({0, 2}), 0}));
}

TEST(Paths, LengthEqualsDegreeAndEndsAtTarget) {
  for (const auto& a : enumerate(3, 4)) {
    for (const auto& path : {monotone_path(a), reverse_monotone_path(a)}) {
      ASSERT_EQ(static_cast<int>(path.size()), a.degree());
      MultiIndex cur = MultiIndex::zero(3);
      for (const auto& step : path) {
        EXPECT_EQ(step.from, cur);
        cur = cur.plus(step.direction);
      }
      EXPECT_EQ(cur, a);
    }
  }
}

TEST(TruncationTest, NeighbourTables) {
  const Truncation t(2, 3);
  EXPECT_EQ(t.size(), 10u);
  for (std::size_t p = 0; p < t.size(); ++p) {
    for (std::size_t j = 0; j < 2; ++j) {
      const auto up = t.up(p, j);
      if (t[p].degree() == 3) {
        EXPECT_EQ(up, -1);
      } else {
        ASSERT_GE(up, 0);
        EXPECT_EQ(t[static_cast<std::size_t>(up)], t[p].plus(j));
      }
      const auto down = t.down(p, j);
      if (t[p][j] == 0) EXPECT_EQ(down, -1);
      else EXPECT_EQ(t[static_cast<std::size_t>(down)], t[p].minus(j));
    }
  }
  EXPECT_EQ(t.count_up_to(0), 1u);
  EXPECT_EQ(t.count_up_to(2), 6u);
  EXPECT_EQ(t.position(mi({1, 1})), 4u);
  EXPECT_THROW(t.position(mi({4, 0})), Error);
  EXPECT_FALSE(t.find(mi({2, 2})).has_value());
}

TEST(Binomial, SmallValues) {
  EXPECT_EQ(binomial(5, 3), 10u);
  EXPECT_EQ(binomial(0, 0), 1u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(binomial(66, 2), 2145u);
}
