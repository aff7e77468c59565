#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "crowdnav/geometry.hpp"

using crowdnav::Vec2;

TEST(Geometry, ArithmeticAndNorms) {
  const Vec2 a{3.0, 4.0};
  EXPECT_DOUBLE_EQ(a.norm(), 5.0);
  EXPECT_DOUBLE_EQ(a.squared_norm(), 25.0);
  EXPECT_EQ(a + Vec2(1, 1), Vec2(4, 5));
  EXPECT_EQ(a - Vec2(1, 1), Vec2(2, 3));
  EXPECT_EQ(2.0 * a, Vec2(6, 8));
  EXPECT_DOUBLE_EQ(crowdnav::dot(a, {1, 0}), 3.0);
  EXPECT_DOUBLE_EQ(crowdnav::cross({1, 0}, {0, 1}), 1.0);
}

TEST(Geometry, NormalizedZeroIsZero) {
  EXPECT_EQ(crowdnav::normalized({0, 0}), Vec2(0, 0));
  const Vec2 n = crowdnav::normalized({0, -2});
  EXPECT_DOUBLE_EQ(n.y, -1.0);
}

TEST(Geometry, RotationQuarterTurn) {
  const Vec2 r = crowdnav::rotated({1, 0}, std::numbers::pi / 2);
  EXPECT_NEAR(r.x, 0.0, 1e-15);
  EXPECT_NEAR(r.y, 1.0, 1e-15);
}

TEST(Geometry, ClampNorm) {
  EXPECT_EQ(crowdnav::clamp_norm({0.3, 0.4}, 1.0), Vec2(0.3, 0.4));
  const Vec2 c = crowdnav::clamp_norm({3, 4}, 1.0);
  EXPECT_NEAR(c.norm(), 1.0, 1e-15);
  EXPECT_NEAR(c.x, 0.6, 1e-15);
}

TEST(Geometry, RigidTransformPreservesDistance) {
  const crowdnav::RigidTransform tf{0.7, {2.0, -1.0}};
  const Vec2 a{0.3, 1.2};
  const Vec2 b{-2.0, 0.5};
  EXPECT_NEAR(crowdnav::distance(tf.apply(a), tf.apply(b)), crowdnav::distance(a, b), 1e-12);
}
