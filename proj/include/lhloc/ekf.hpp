#pragma once

#include <optional>

#include <Eigen/Core>

#include "lhloc/geometry.hpp"

namespace lhloc {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Point-mass filter state: position and velocity in the global frame.
struct EkfState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Mat6 covariance = Mat6::Identity();
};

struct EkfConfig {
  double sigma_angle = 1e-3;    // rad
  double process_noise = 0.01;  // velocity random walk, m^2/s^3
  double gate_sigmas = 5.0;
};

/// One sweep angle paired with the station that produced it and the body
/// frame offset of the receiver.
struct SweepMeasurement {
  SweepAngle sweep;
  const BaseStation* station = nullptr;
  Vec3 sensor_offset = Vec3::Zero();
  Eigen::Quaterniond body_orientation = Eigen::Quaterniond::Identity();
};

struct AngleJacobian {
  double predicted = 0.0;
  Vec3 gradient = Vec3::Zero();  // d(angle)/d(global position)
};

/// Gradient of the sweep angle in the plane's drum frame.
Vec3 drum_frame_gradient(const Vec3& sensor_in_plane_frame, double tilt);

/// Predicted angle and its gradient with respect to the global sensor position.
AngleJacobian measurement_jacobian(const Vec3& sensor_global, const BaseStation& bs, int plane_index);

/// Constant-velocity propagation; `accel` (global frame, gravity removed) is
/// used as a known input when provided.
EkfState predict(const EkfState& state, double dt, const std::optional<Vec3>& accel, const EkfConfig& config);

/// Scalar sweep-angle update (Joseph form). Throws MeasurementRejected if the
/// innovation fails the gate.
EkfState update(const EkfState& state, const SweepMeasurement& m, const EkfConfig& config);

/// Symmetrizes and floors eigenvalues at `floor`.
Mat6 condition_covariance(const Mat6& p, double floor = 1e-12);

}  // namespace lhloc
