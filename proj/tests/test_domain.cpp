#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sarange/domain.hpp"
#include "sarange/error.hpp"

using namespace sarange;

namespace {

// Independent route: mirror repeatedly at whichever face was crossed.
double mirror_oracle(double y, double low, double high) {
  while (y < low || y > high) {
    if (y > high) y = 2.0 * high - y;
    if (y < low) y = 2.0 * low - y;
  }
  return y;
}

}  // namespace

TEST(BoxDomain, RejectsDegenerateBounds) {
  EXPECT_THROW(BoxDomain({}), Error);
  EXPECT_THROW(BoxDomain({{1.0, 1.0}}), Error);
  EXPECT_THROW(BoxDomain({{2.0, 1.0}}), Error);
  EXPECT_THROW(BoxDomain({{0.0, INFINITY}}), Error);
  EXPECT_THROW(BoxDomain({{NAN, 1.0}}), Error);
  const double odd[] = {0.0, 1.0, 2.0};
  EXPECT_THROW(BoxDomain::from_flat(odd), Error);
}

TEST(BoxDomain, FromFlatPairsBounds) {
  const double flat[] = {-4.0, 4.0, -1.0, 2.0};
  const auto d = BoxDomain::from_flat(flat);
  ASSERT_EQ(d.dim(), 2u);
  EXPECT_EQ(d[1], (Interval{-1.0, 2.0}));
  EXPECT_DOUBLE_EQ(d.min_width(), 3.0);
}

TEST(Contains, InteriorBoundaryAndOutside) {
  const auto d = BoxDomain::cube(2, 0.0, 1.0);
  EXPECT_TRUE(contains(d, Point{0.5, 0.5}));
  EXPECT_TRUE(contains(d, Point{0.0, 1.0}));
  EXPECT_FALSE(contains(d, Point{1.2, 0.5}));
  EXPECT_FALSE(contains(d, Point{NAN, 0.5}));
}

TEST(Contains, DimensionMismatchThrows) {
  const auto d = BoxDomain::cube(2, 0.0, 1.0);
  try {
    contains(d, Point{0.5});
    FAIL() << "expected dimension error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
  EXPECT_THROW(reflect(d, Point{0.1, 0.2, 0.3}), Error);
}

TEST(Reflect, TabulatedExamples) {
  const Interval unit{0.0, 1.0};
  EXPECT_EQ(reflect_coordinate(0.7, unit), 0.7);
  EXPECT_NEAR(reflect_coordinate(1.3, unit), 0.7, 1e-15);
  EXPECT_NEAR(reflect_coordinate(-0.4, unit), 0.4, 1e-15);
  EXPECT_NEAR(reflect_coordinate(2.3, unit), mirror_oracle(2.3, 0.0, 1.0), 1e-15);
  EXPECT_NEAR(reflect_coordinate(2.3, unit), 0.3, 1e-15);
}

TEST(Reflect, SeamMapsToUpperFace) {
  // (y - l) mod 2w == w exactly.
  EXPECT_EQ(reflect_coordinate(3.0, {0.0, 1.0}), 1.0);
  EXPECT_EQ(reflect_coordinate(-1.0, {0.0, 1.0}), 1.0);
  EXPECT_EQ(reflect_coordinate(2.0, {0.0, 1.0}), 0.0);
}

TEST(Reflect, IsComponentWise) {
  const auto d = BoxDomain({{0.0, 1.0}, {-2.0, 3.0}});
  const auto r = reflect(d, Point{1.3, 7.5});
  EXPECT_NEAR(r[0], 0.7, 1e-15);
  EXPECT_NEAR(r[1], mirror_oracle(7.5, -2.0, 3.0), 1e-12);
  const auto r2 = reflect(d, Point{1.3, -9.0});
  EXPECT_EQ(r[0], r2[0]);
}

TEST(Reflect, RandomizedAgainstMirrorOracle) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> lo(-10.0, 10.0);
  std::uniform_real_distribution<double> width(0.01, 5.0);
  std::uniform_real_distribution<double> span(-8.0, 8.0);
  for (int i = 0; i < 20000; ++i) {
    const double l = lo(rng);
    const double u = l + width(rng);
    const double y = l + (u - l) * span(rng);
    const double r = reflect_coordinate(y, {l, u});
    ASSERT_GE(r, l);
    ASSERT_LE(r, u);
    ASSERT_NEAR(r, mirror_oracle(y, l, u), 1e-9) << "y=" << y << " l=" << l << " u=" << u;
  }
}

TEST(Reflect, FarAwayPointsStayFeasible) {
  const Interval iv{-5.12, 5.12};
  for (double y : {1e6, -1e6, 1e12, -3.7e15, 123456.789}) {
    const double r = reflect_coordinate(y, iv);
    EXPECT_GE(r, iv.low);
    EXPECT_LE(r, iv.high);
  }
}

TEST(Excursion, ZeroInsidePositiveOutside) {
  const auto d = BoxDomain::cube(2, -1.0, 1.0);
  EXPECT_EQ(excursion(d, Point{0.0, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(excursion(d, Point{0.0, 3.5}), 2.5);
  EXPECT_DOUBLE_EQ(excursion(d, Point{-4.0, 3.5}), 3.0);
}

TEST(SampleUniform, StaysInBoxAndIsSeeded) {
  const auto d = BoxDomain({{-4.0, 4.0}, {0.0, 1e-3}});
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 1000; ++i) {
    const auto p = sample_uniform(d, a);
    ASSERT_TRUE(contains(d, p));
    ASSERT_EQ(p, sample_uniform(d, b));
  }
}
