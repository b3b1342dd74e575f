#include <gtest/gtest.h>

#include <set>

#include "dyadic/cube.hpp"
#include "dyadic/cube_family.hpp"
#include "dyadic/random.hpp"

using namespace dyadic;

namespace {

Point pt(Rational x) { return Point{x}; }
const Shift kStd{0};
const Shift kThird{1};

}  // namespace

TEST(CubeAt, UnitCellContainsQuarter) {
  const auto q = cube_at(pt(Rational(1, 4)), 0, kStd);
  EXPECT_EQ(q.lower(0), Rational(0));
  EXPECT_EQ(q.upper(0), Rational(1));
}

TEST(CubeAt, ShiftedGridAtLevelZero) {
  const auto q = cube_at(pt(Rational(9, 10)), 0, kThird);
  EXPECT_EQ(q.lower(0), Rational(1, 3));
  EXPECT_EQ(q.upper(0), Rational(4, 3));
}

TEST(CubeAt, NegativePoint) {
  const auto q = cube_at(pt(Rational(-1, 10)), 1, kStd);
  EXPECT_EQ(q.lower(0), Rational(-1, 2));
  EXPECT_EQ(q.upper(0), Rational(0));
}

TEST(CubeAt, HalfOpenBoundary) {
  EXPECT_EQ(cube_at(pt(Rational(1)), 0, kStd).lower(0), Rational(1));
  EXPECT_EQ(cube_at(pt(Rational(1, 3)), 0, kThird).lower(0), Rational(1, 3));
}

TEST(ParentChildren, StandardUnitInterval) {
  const DyadicCube unit(0, {0}, kStd);
  const auto kids = unit.children();
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(kids[0].lower(0), Rational(0));
  EXPECT_EQ(kids[0].upper(0), Rational(1, 2));
  EXPECT_EQ(kids[1].lower(0), Rational(1, 2));
  EXPECT_EQ(kids[1].upper(0), Rational(1));
  EXPECT_EQ(kids[1].parent(), unit);
}

TEST(ParentChildren, ShiftedChildrenPartitionParent) {
  const auto q = cube_at(pt(Rational(1, 2)), 0, kThird);  // [1/3, 4/3)
  const auto kids = q.children();
  EXPECT_EQ(kids[0].lower(0), Rational(1, 3));
  EXPECT_EQ(kids[0].upper(0), Rational(5, 6));
  EXPECT_EQ(kids[1].lower(0), Rational(5, 6));
  EXPECT_EQ(kids[1].upper(0), Rational(4, 3));
  for (const auto& k : kids) {
    EXPECT_EQ(k.parent(), q);
    EXPECT_EQ(k, cube_at(Point{k.lower(0)}, 1, kThird));
  }
}

TEST(ParentChildren, CheckedParentLeavesRoot) {
  const auto sys = RootSystem::unit(1, 4);
  EXPECT_NO_THROW(checked_parent(sys, DyadicCube(1, {1}, kStd)));
  EXPECT_THROW(checked_parent(sys, DyadicCube(0, {0}, kStd)), OutOfSystemError);
}

TEST(GridProperties, PartitionOfBoundedRegion) {
  // For every level and shift, the cubes meeting [-2,2)^2 tile it exactly.
  for (int k = -1; k <= 3; ++k) {
    for (Shift t : Shift::all(2)) {
      std::set<DyadicCube> seen;
      const int per = 4 << (k + 3);
      for (int a = 0; a < per; ++a) {
        for (int b = 0; b < per; ++b) {
          const Point x{Rational(-2) + Rational(2 * a + 1, 2 * per) * 4,
                        Rational(-2) + Rational(2 * b + 1, 2 * per) * 4};
          const auto q = cube_at(x, k, t);
          EXPECT_TRUE(q.contains(x));
          seen.insert(q);
        }
      }
      const std::vector<DyadicCube> cubes(seen.begin(), seen.end());
      for (std::size_t i = 0; i < cubes.size(); ++i) {
        for (std::size_t j = i + 1; j < cubes.size(); ++j) EXPECT_FALSE(cubes[i].intersects(cubes[j]));
      }
    }
  }
}

TEST(GridProperties, NestingTrichotomyRandomPairs) {
  auto rng = case_rng(2024, 0);
  std::uniform_int_distribution<int> lev(-2, 6);
  std::uniform_int_distribution<int> num(-600, 600);
  for (int trial = 0; trial < 2000; ++trial) {
    const Shift t{static_cast<unsigned>(trial % 4)};
    const Point x{Rational(num(rng), 97), Rational(num(rng), 89)};
    const Point y{x[0] + Rational(num(rng) % 50, 193), x[1] + Rational(num(rng) % 50, 211)};
    const auto a = cube_at(x, lev(rng), t);
    const auto b = cube_at(y, lev(rng), t);
    if (a.intersects(b)) {
      EXPECT_TRUE(a.contains(b) || b.contains(a)) << to_string(a) << " vs " << to_string(b);
      EXPECT_TRUE(a.contains_box(b) || b.contains_box(a));
    } else {
      EXPECT_FALSE(a.contains(b) || b.contains(a));
    }
  }
}

TEST(Covering, CenteredInterval) {
  const auto c = covering_cube({pt(Rational(2, 5)), Rational(1, 5)});
  EXPECT_EQ(c.shift, kStd);
  EXPECT_EQ(c.cube.lower(0), Rational(0));
  EXPECT_EQ(c.cube.upper(0), Rational(1));
}

TEST(Covering, StraddlingIntegerNeedsShift) {
  const auto c = covering_cube({pt(Rational(9, 10)), Rational(1, 5)});
  EXPECT_EQ(c.shift, kThird);
  EXPECT_EQ(c.cube.lower(0), Rational(1, 3));
  EXPECT_EQ(c.cube.upper(0), Rational(4, 3));
}

TEST(Covering, DyadicCubeCoversItself) {
  const auto c = covering_cube({pt(Rational(0)), Rational(1)});
  EXPECT_EQ(c.shift, kStd);
  EXPECT_EQ(c.cube, DyadicCube(0, {0}, kStd));
}

TEST(Covering, NonPositiveSideRejected) {
  EXPECT_THROW(covering_cube({pt(Rational(0)), Rational(0)}), DomainError);
}

TEST(RootSystemTest, BoundsAndCenters) {
  const auto sys = RootSystem::from_bounds(1, Rational(-2), Rational(4), 1);
  EXPECT_EQ(sys.root_level(), -1);
  EXPECT_EQ(sys.extent(), 3);
  EXPECT_EQ(sys.cell_count(), 12u);
  EXPECT_EQ(sys.coarsest_level(), -2);
  const DyadicCube q(-2, {0}, kStd);  // [0,4)
  EXPECT_TRUE(sys.contains(q));
  const auto cells = sys.cells_in(q);
  ASSERT_EQ(cells.size(), 8u);
  EXPECT_EQ(cells.front(), 4u);
  EXPECT_THROW(RootSystem::from_bounds(1, Rational(0), Rational(1, 3), 4), ConfigError);
}

TEST(CubeFamilyTest, CountsAndAncestorClosure) {
  const auto sys = RootSystem::unit(1, 3);
  const CubeFamily std_only(sys, 3, {kStd});
  EXPECT_EQ(std_only.size(), 1u + 2u + 4u + 8u);
  const CubeFamily all(sys, 3);
  all.for_each([&](const DyadicCube& q) {
    EXPECT_TRUE(sys.contains(q));
    if (q.level() > sys.coarsest_level() && sys.contains(q.parent())) {
      EXPECT_TRUE(all.holds(q.parent()));
    }
  });
  // Shifted level-1 cube [1/3, 5/6) fits in [0,1); level 0 shifted cubes do not.
  EXPECT_TRUE(all.holds(DyadicCube(1, {1}, kThird)));
  EXPECT_FALSE(all.holds(DyadicCube(0, {0}, kThird)));
}
