#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "lhloc/ekf.hpp"
#include "lhloc/errors.hpp"
#include "lhloc/pipeline.hpp"
#include "lhloc/simulator.hpp"
#include "test_support.hpp"

namespace lhloc {
namespace {

constexpr double kPi = std::numbers::pi;

SweepMeasurement measurement(const BaseStation& bs, int plane, double angle) {
  SweepMeasurement m;
  m.sweep = {static_cast<std::uint8_t>(bs.id()), 0, static_cast<std::uint8_t>(plane), angle, 0};
  m.station = &bs;
  return m;
}

bool symmetric_positive(const Mat6& p) {
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(p);
  return (p - p.transpose()).norm() < 1e-9 && eig.eigenvalues().minCoeff() > 0.0;
}

TEST(Predict, ZeroStepIsIdentity) {
  EkfState s;
  s.position = Vec3(1, 2, 3);
  s.velocity = Vec3(0.5, 0, 0);
  const EkfState out = predict(s, 0.0, Vec3(1, 1, 1), EkfConfig{});
  EXPECT_EQ(out.position, s.position);
  EXPECT_EQ(out.velocity, s.velocity);
  EXPECT_EQ(out.covariance, s.covariance);
}

TEST(Predict, ConstantVelocityKinematics) {
  EkfState s;
  s.velocity = Vec3(1, 0, 0);
  const EkfState out = predict(s, 0.1, std::nullopt, EkfConfig{});
  EXPECT_NEAR((out.position - Vec3(0.1, 0, 0)).norm(), 0, 1e-15);
  EXPECT_GT(out.covariance.trace(), s.covariance.trace());

  const EkfState accel = predict(s, 0.1, Vec3(0, 0, 2), EkfConfig{});
  EXPECT_NEAR((accel.position - Vec3(0.1, 0, 0.01)).norm(), 0, 1e-15);
  EXPECT_NEAR((accel.velocity - Vec3(1, 0, 0.2)).norm(), 0, 1e-15);
  EXPECT_THROW(predict(s, -0.01, std::nullopt, EkfConfig{}), std::invalid_argument);
}

TEST(Predict, CovarianceTraceGrowsWithProcessNoise) {
  EkfState s;
  s.covariance = 1e-6 * Mat6::Identity();
  double trace = s.covariance.trace();
  for (int i = 0; i < 50; ++i) {
    s = predict(s, 0.01, std::nullopt, EkfConfig{});
    EXPECT_GT(s.covariance.trace(), trace);
    trace = s.covariance.trace();
  }
}

TEST(Jacobian, UntiltedOnAxis) {
  EXPECT_EQ(drum_frame_gradient(Vec3(1, 0, 0), 0.0), Vec3(0, 1, 0));
}

TEST(Jacobian, IdentityPoseMatchesDrumFrame) {
  const BaseStation bs(0, LhVersion::LH2, Mat3::Identity(), Vec3::Zero());
  const Vec3 p(2.0, 0.4, -0.3);
  for (int plane : {1, 2}) {
    const AngleJacobian j = measurement_jacobian(p, bs, plane);
    EXPECT_EQ(j.gradient, drum_frame_gradient(p, bs.plane(plane).tilt));
    EXPECT_EQ(j.predicted, sweep_angle(bs, plane, p));
  }
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(21);
  for (LhVersion v : {LhVersion::LH1, LhVersion::LH2}) {
    for (int i = 0; i < 500; ++i) {
      const BaseStation bs(0, v, test::random_rotation(rng), test::uniform_vec(rng, -3, 3));
      const Vec3 p = test::random_visible_point(rng, bs);
      for (int plane : {1, 2}) {
        const Vec3 g = measurement_jacobian(p, bs, plane).gradient;
        for (int k = 0; k < 3; ++k) {
          Vec3 h = Vec3::Zero();
          h[k] = 1e-6;
          const double fd = wrap_to_pi(sweep_angle(bs, plane, p + h) - sweep_angle(bs, plane, p - h)) / 2e-6;
          ASSERT_LT(std::abs(g[k] - fd), 1e-5 * g.norm());
        }
      }
    }
  }
}

TEST(Update, ZeroInnovationKeepsPosition) {
  const BaseStation bs = BaseStation::looking_at(0, LhVersion::LH2, Vec3(-1.3, -1.3, 1.8), Vec3(0, 0, 1));
  EkfState s;
  s.position = Vec3(0.1, 0.2, 0.9);
  const EkfState out = update(s, measurement(bs, 1, sweep_angle(bs, 1, s.position)), EkfConfig{});
  EXPECT_NEAR((out.position - s.position).norm(), 0, 1e-15);
  EXPECT_LE(out.covariance.trace(), s.covariance.trace());
  EXPECT_TRUE(symmetric_positive(out.covariance));
}

TEST(Update, OutlierRejected) {
  const BaseStation bs = BaseStation::looking_at(0, LhVersion::LH1, Vec3(-1.3, -1.3, 1.8), Vec3(0, 0, 1));
  EkfState s;
  s.position = Vec3(0, 0, 1);
  s.covariance = 1e-4 * Mat6::Identity();
  const double truth = sweep_angle(bs, 2, s.position);
  try {
    update(s, measurement(bs, 2, truth + 1.0), EkfConfig{});
    FAIL() << "expected rejection";
  } catch (const MeasurementRejected& e) {
    EXPECT_NEAR(e.innovation(), 1.0, 1e-12);
    EXPECT_LT(e.gate(), 1.0);
  }
}

TEST(Update, InnovationWrapsAcrossPi) {
  const BaseStation bs(0, LhVersion::LH1, Mat3::Identity(), Vec3::Zero());
  const double eps = 1e-3;
  EkfState s;
  s.position = Vec3(-2.0, -2.0 * std::tan(eps), 0.0);  // predicted angle -pi + eps
  s.covariance = 1e-14 * Mat6::Identity();
  try {
    EkfConfig tight;
    tight.sigma_angle = 1e-4;
    update(s, measurement(bs, 1, kPi - eps), tight);
    FAIL() << "expected rejection with a tight covariance";
  } catch (const MeasurementRejected& e) {
    EXPECT_NEAR(e.innovation(), -2 * eps, 1e-12);
  }
}

TEST(Update, CovarianceStaysPositiveDefinite) {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> noise(0.0, 1e-3);
  const auto stations = ScenarioConfig::default_stations(LhVersion::LH2, Vec3(0, 0, 1));
  EkfState s;
  s.position = Vec3(0.05, -0.05, 1.02);
  for (int i = 0; i < 2000; ++i) {
    const BaseStation& bs = stations[i % 2];
    const int plane = 1 + (i / 2) % 2;
    s = predict(s, 0.004, std::nullopt, EkfConfig{});
    try {
      s = update(s, measurement(bs, plane, sweep_angle(bs, plane, Vec3(0, 0, 1)) + noise(rng)), EkfConfig{});
    } catch (const MeasurementRejected&) {
      // gated: state unchanged
    }
    ASSERT_TRUE(symmetric_positive(s.covariance)) << "after update " << i;
  }
}

TEST(Update, FiveHundredNoiselessSweepsConverge) {
  const std::string text = "scenario = stationary\nduration = 10\nlh_version = 2\nseed = 5\nnoise_sigma = 0\n";
  const ScenarioConfig c = parse_scenario_config(text);
  const Trajectory traj = generate_trajectory(c);
  const SessionBundle session = synthesize_session(c, traj);
  const Vec3 truth = traj.at(0).position;
  const SensorDeck deck = SensorDeck::crazyflie();

  EkfState s;
  s.position = truth + Vec3(0.05, -0.04, 0.03);
  s.covariance.topLeftCorner<3, 3>() *= 0.01;
  s.covariance.bottomRightCorner<3, 3>() *= 0.01;
  int used = 0;
  std::uint64_t last = 0;
  for (const SweepAngle& a : events_of<SweepAngle>(session)) {
    if (used == 500) break;
    if (last != 0) s = predict(s, static_cast<double>(a.timestamp_us - last) * 1e-6, std::nullopt, EkfConfig{});
    last = a.timestamp_us;
    SweepMeasurement m;
    m.sweep = a;
    m.station = &c.stations[a.base_station_id];
    m.sensor_offset = deck.offsets[a.sensor];
    s = update(s, m, EkfConfig{});
    ++used;
  }
  ASSERT_EQ(used, 500);
  EXPECT_LT((s.position - truth).norm(), 1e-3);
}

TEST(ConditionCovariance, SymmetrizesAndFloors) {
  Mat6 p = Mat6::Identity();
  p(0, 1) = 2.0;  // asymmetric and indefinite once symmetrized
  const Mat6 out = condition_covariance(p);
  EXPECT_LT((out - out.transpose()).norm(), 1e-15);
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(out);
  EXPECT_GE(eig.eigenvalues().minCoeff(), 1e-12 - 1e-15);  // roundoff of a unit-scale matrix
}

}  // namespace
}  // namespace lhloc
