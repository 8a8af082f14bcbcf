#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lhloc/errors.hpp"
#include "lhloc/geometry.hpp"
#include "test_support.hpp"

namespace lhloc {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(SweepAngleForward, OnAxisZeroTilt) {
  EXPECT_DOUBLE_EQ(sweep_angle_forward(Vec3(1, 0, 0), SweepPlane{0.0, Mat3::Identity()}), 0.0);
}

TEST(SweepAngleForward, TiltIgnoredInDrumPlane) {
  EXPECT_NEAR(sweep_angle_forward(Vec3(1, 1, 0), SweepPlane{kPi / 6, Mat3::Identity()}), kPi / 4, 1e-15);
}

TEST(SweepAngleForward, TiltedOffPlanePoint) {
  // 30-digit evaluation of atan2(0.5, 2) + asin(0.3 tan(pi/6) / sqrt(4.25)).
  const double expected = 0.329094626767013343518420474539;
  EXPECT_NEAR(sweep_angle_forward(Vec3(2, 0.5, 0.3), SweepPlane{kPi / 6, Mat3::Identity()}), expected, 1e-15);
}

TEST(SweepAngleForward, DomainErrors) {
  const SweepPlane tilted{kPi / 6, Mat3::Identity()};
  EXPECT_THROW(sweep_angle_forward(Vec3(0, 0, 1), tilted), DomainError);
  EXPECT_THROW(sweep_angle_forward(Vec3(0.1, 0, 1), tilted), DomainError);
  EXPECT_THROW(sweep_angle_forward(Vec3(0, 0, 0), SweepPlane{}), DomainError);
}

TEST(SweepAngleForward, ZeroTiltIsPlainAtan2) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = test::uniform_vec(rng, -3, 3);
    EXPECT_EQ(sweep_angle_forward(p, SweepPlane{}), std::atan2(p.y(), p.x()));
  }
}

TEST(BaseStation, PlaneCharacteristics) {
  const auto lh1 = planes_for(LhVersion::LH1);
  EXPECT_EQ(lh1[0].tilt, 0.0);
  EXPECT_EQ(lh1[1].tilt, 0.0);
  EXPECT_TRUE(lh1[0].drum_rotation.isIdentity());
  Mat3 vertical;
  vertical << 1, 0, 0, 0, 0, 1, 0, -1, 0;
  EXPECT_EQ(lh1[1].drum_rotation, vertical);

  const auto lh2 = planes_for(LhVersion::LH2);
  EXPECT_DOUBLE_EQ(lh2[0].tilt, -kPi / 6);
  EXPECT_DOUBLE_EQ(lh2[1].tilt, kPi / 6);
  EXPECT_TRUE(lh2[0].drum_rotation.isIdentity());
  EXPECT_TRUE(lh2[1].drum_rotation.isIdentity());
}

TEST(BaseStation, RejectsNonRotation) {
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1;
  EXPECT_THROW(BaseStation(0, LhVersion::LH1, reflect, Vec3::Zero()), std::invalid_argument);
  EXPECT_THROW(BaseStation(0, LhVersion::LH1, 1.01 * Mat3::Identity(), Vec3::Zero()), std::invalid_argument);
  EXPECT_THROW(BaseStation(0, LhVersion::LH1, Mat3::Identity(), Vec3::Zero()).plane(3), std::out_of_range);
}

TEST(BaseStation, LookingAtPointsForward) {
  const BaseStation bs = BaseStation::looking_at(0, LhVersion::LH2, Vec3(-2, 1, 2.5), Vec3(0, 0, 1));
  const Vec3 local = bs.to_station(Vec3(0, 0, 1));
  EXPECT_GT(local.x(), 0);
  EXPECT_NEAR(local.y(), 0, 1e-12);
  EXPECT_NEAR(local.z(), 0, 1e-12);
  EXPECT_NEAR((bs.rotation().transpose() * bs.rotation() - Mat3::Identity()).norm(), 0, 1e-12);
  EXPECT_NEAR(bs.rotation().determinant(), 1.0, 1e-12);
}

TEST(SensorDeck, OffsetsAverageToCenter) {
  const SensorDeck deck = SensorDeck::crazyflie();
  Vec3 sum = Vec3::Zero();
  for (const Vec3& o : deck.offsets) {
    sum += o;
  }
  EXPECT_NEAR(sum.norm(), 0.0, 1e-15);
}

TEST(RayFromSweepPair, Lh1ZeroAnglesLookForward) {
  std::mt19937_64 rng(2);
  const Mat3 r = test::random_rotation(rng);
  const BaseStation bs(3, LhVersion::LH1, r, Vec3(1, 2, 3));
  const Ray ray = ray_from_sweep_pair(bs, 0.0, 0.0);
  EXPECT_NEAR((ray.origin - Vec3(1, 2, 3)).norm(), 0, 1e-15);
  EXPECT_NEAR((ray.direction - r.col(0)).norm(), 0, 1e-12);
}

TEST(RayFromSweepPair, Lh2RoundTrip) {
  const BaseStation bs = BaseStation::looking_at(0, LhVersion::LH2, Vec3(-1.3, -1.3, 1.8), Vec3(0, 0, 1));
  const Vec3 p(0.2, -0.3, 0.7);
  const Ray ray = ray_from_sweep_pair(bs, sweep_angle(bs, 1, p), sweep_angle(bs, 2, p));
  EXPECT_LT(distance_to_ray(ray, p), 1e-9);
  EXPECT_GT(bs.to_station(ray.at(1.0)).x(), 0.0);
}

TEST(RayFromSweepPair, IdenticalPlanesAreDegenerate) {
  BaseStation bs(0, LhVersion::LH2, Mat3::Identity(), Vec3::Zero());
  const SweepPlane same{kPi / 6, Mat3::Identity()};
  bs.set_planes({same, same});
  EXPECT_THROW(ray_from_sweep_pair(bs, 0.2, 0.2), DegenerateRay);
}

TEST(RayFromSweepPair, RoundTripProperty) {
  std::mt19937_64 rng(3);
  for (LhVersion v : {LhVersion::LH1, LhVersion::LH2}) {
    for (int i = 0; i < 2000; ++i) {
      const BaseStation bs(0, v, test::random_rotation(rng), test::uniform_vec(rng, -3, 3));
      const Vec3 p = test::random_visible_point(rng, bs);
      const Ray ray = ray_from_sweep_pair(bs, sweep_angle(bs, 1, p), sweep_angle(bs, 2, p));
      ASSERT_LT(distance_to_ray(ray, p), 1e-9);
    }
  }
}

TEST(SweepAngle, FrameInvariance) {
  std::mt19937_64 rng(4);
  for (LhVersion v : {LhVersion::LH1, LhVersion::LH2}) {
    for (int i = 0; i < 1000; ++i) {
      const BaseStation bs(0, v, test::random_rotation(rng), test::uniform_vec(rng, -3, 3));
      const Vec3 p = test::random_visible_point(rng, bs);
      const Mat3 r = test::random_rotation(rng);
      const Vec3 t = test::uniform_vec(rng, -10, 10);
      const BaseStation moved(0, v, r * bs.rotation(), r * bs.translation() + t);
      for (int plane : {1, 2}) {
        ASSERT_NEAR(wrap_to_pi(sweep_angle(moved, plane, r * p + t) - sweep_angle(bs, plane, p)), 0.0, 1e-12);
      }
    }
  }
}

TEST(WrapToPi, RangeIsHalfOpen) {
  EXPECT_DOUBLE_EQ(wrap_to_pi(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_to_pi(-kPi), kPi);
  EXPECT_NEAR(wrap_to_pi(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_to_pi(-7.0), -7.0 + 2 * kPi, 1e-15);
  EXPECT_EQ(wrap_to_pi(0.25), 0.25);
}

TEST(FieldOfView, BehindStationIsOutOfView) {
  const BaseStation bs(0, LhVersion::LH1, Mat3::Identity(), Vec3::Zero());
  EXPECT_TRUE(in_field_of_view(bs, Vec3(2, 0.1, 0.1)));
  EXPECT_FALSE(in_field_of_view(bs, Vec3(-2, 0.1, 0.1)));
  EXPECT_FALSE(in_field_of_view(bs, Vec3(0.1, 2, 0)));
}

TEST(RigidHelpers, RotationFromRpyComposesZyx) {
  const Mat3 r = rotation_from_rpy(0.1, -0.2, 0.3);
  const Mat3 expected = (Eigen::AngleAxisd(0.3, Vec3::UnitZ()) * Eigen::AngleAxisd(-0.2, Vec3::UnitY()) *
                         Eigen::AngleAxisd(0.1, Vec3::UnitX()))
                            .toRotationMatrix();
  EXPECT_NEAR((r - expected).norm(), 0, 1e-15);
  EXPECT_NEAR(rotation_angle_between(r, r * Eigen::AngleAxisd(0.05, Vec3::UnitX()).toRotationMatrix()), 0.05,
              1e-12);
}

TEST(RigidHelpers, DistanceToRayClampsAtOrigin) {
  const Ray ray{Vec3::Zero(), Vec3::UnitX()};
  EXPECT_DOUBLE_EQ(distance_to_ray(ray, Vec3(5, 3, 4)), 5.0);
  EXPECT_DOUBLE_EQ(distance_to_ray(ray, Vec3(-3, 4, 0)), 5.0);
}

}  // namespace
}  // namespace lhloc
