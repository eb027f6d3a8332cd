#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kfp/errors.hpp"
#include "kfp/geometry.hpp"

using namespace kfp;

TEST(Domain, SignedDistance) {
  EXPECT_DOUBLE_EQ(Domain::interval(1.0).signed_distance(Vec2(0.3, 0.0)), 0.3);
  EXPECT_DOUBLE_EQ(Domain::interval(1.0).signed_distance(Vec2(0.8, 0.0)), 0.2);
  EXPECT_DOUBLE_EQ(Domain::disk(1.0).signed_distance(Vec2(0.0, 0.0)), 1.0);
  EXPECT_DOUBLE_EQ(Domain::disk(2.0).signed_distance(Vec2(3.0, 0.0)), -1.0);
}

TEST(Domain, OutwardNormal) {
  const auto I = Domain::interval(1.0);
  EXPECT_DOUBLE_EQ(I.outward_normal(Vec2(0.0, 0.0)).x(), -1.0);
  EXPECT_DOUBLE_EQ(I.outward_normal(Vec2(1.0, 0.0)).x(), 1.0);
  const Vec2 n = Domain::disk(1.0).outward_normal(Vec2(0.0, 1.0));
  EXPECT_NEAR(n.x(), 0.0, 1e-15);
  EXPECT_NEAR(n.y(), 1.0, 1e-15);
  EXPECT_THROW(I.outward_normal(Vec2(0.5, 0.0)), PreconditionError);
}

TEST(Domain, NormalFieldIsMinusGradientOfDistance) {
  const auto D = Domain::disk(1.0);
  const double h = 1e-6;
  for (const Vec2 x : {Vec2(0.3, 0.2), Vec2(-0.5, 0.1), Vec2(0.05, -0.7)}) {
    const Vec2 g((D.signed_distance(x + Vec2(h, 0)) - D.signed_distance(x - Vec2(h, 0))) / (2 * h),
                 (D.signed_distance(x + Vec2(0, h)) - D.signed_distance(x - Vec2(0, h))) / (2 * h));
    EXPECT_NEAR((D.normal_field(x) + g).norm(), 0.0, 1e-8);
  }
  EXPECT_EQ(D.normal_field(Vec2::Zero()).norm(), 0.0);
}

TEST(Domain, BoundaryQuadrature) {
  const auto nodes = Domain::interval(1.0).boundary_quadrature(8);
  ASSERT_EQ(nodes.size(), 2u);
  EXPECT_DOUBLE_EQ(nodes[0].weight + nodes[1].weight, 2.0);

  const auto disk = Domain::disk(1.0, Accommodation(0.5)).boundary_quadrature(64);
  ASSERT_EQ(disk.size(), 64u);
  double total = 0.0;
  for (const auto& b : disk) {
    total += b.weight;
    EXPECT_DOUBLE_EQ(b.iota, 0.5);
    EXPECT_NEAR(b.position.norm(), 1.0, 1e-14);
  }
  EXPECT_NEAR(total, 2.0 * std::numbers::pi, 1e-10);
}

TEST(Domain, SectorAccommodation) {
  const auto D = Domain::disk(1.0, Accommodation(std::vector<double>{0.2, 0.8}));
  EXPECT_DOUBLE_EQ(D.iota_at(Vec2(0.0, 1.0)), 0.2);
  EXPECT_DOUBLE_EQ(D.iota_at(Vec2(0.0, -1.0)), 0.8);
  const auto I = Domain::interval(1.0, Accommodation(std::vector<double>{0.3, 0.7}));
  EXPECT_DOUBLE_EQ(I.iota_at(Vec2(0.0, 0.0)), 0.3);
  EXPECT_DOUBLE_EQ(I.iota_at(Vec2(1.0, 0.0)), 0.7);
}

TEST(Domain, RejectsBadParameters) {
  EXPECT_THROW(Domain::interval(0.0), PreconditionError);
  EXPECT_THROW(Domain::disk(-1.0), PreconditionError);
  EXPECT_THROW(Domain::interval(1.0, Accommodation(1.5)), PreconditionError);
}

TEST(Domain, Measures) {
  EXPECT_DOUBLE_EQ(Domain::interval(2.0).measure(), 2.0);
  EXPECT_DOUBLE_EQ(Domain::interval(2.0).boundary_measure(), 2.0);
  EXPECT_NEAR(Domain::disk(2.0).measure(), 4.0 * std::numbers::pi, 1e-12);
  EXPECT_DOUBLE_EQ(Domain::interval(2.0).diameter_bound(), 1.0);
}
