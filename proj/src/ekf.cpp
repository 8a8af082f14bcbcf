#include "lhloc/ekf.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "lhloc/errors.hpp"

namespace lhloc {

Vec3 drum_frame_gradient(const Vec3& p, double tilt) {
  const double r2 = p.x() * p.x() + p.y() * p.y();
  const double tan_t = std::tan(tilt);
  const double zt = p.z() * tan_t;
  if (r2 == 0.0 || zt * zt >= r2) {
    throw DomainError("sweep angle gradient undefined at this position");
  }
  const double q = tan_t / std::sqrt(r2 - zt * zt);
  return Vec3((-p.y() - p.x() * p.z() * q) / r2, (p.x() - p.y() * p.z() * q) / r2, q);
}

AngleJacobian measurement_jacobian(const Vec3& sensor_global, const BaseStation& bs, int plane_index) {
  const SweepPlane& plane = bs.plane(plane_index);
  const Vec3 local = bs.to_plane_frame(sensor_global, plane_index);
  AngleJacobian out;
  out.predicted = sweep_angle_forward(local, plane);
  // Drum rotations are orthonormal, so the inverse is the transpose.
  out.gradient = bs.rotation() * plane.drum_rotation.transpose() * drum_frame_gradient(local, plane.tilt);
  return out;
}

EkfState predict(const EkfState& state, double dt, const std::optional<Vec3>& accel, const EkfConfig& config) {
  if (dt < 0.0) {
    throw std::invalid_argument("negative prediction interval");
  }
  if (dt == 0.0) {
    return state;
  }
  EkfState next = state;
  next.position += state.velocity * dt;
  if (accel) {
    next.position += 0.5 * *accel * dt * dt;
    next.velocity += *accel * dt;
  }

  Mat6 f = Mat6::Identity();
  f.topRightCorner<3, 3>() = Mat3::Identity() * dt;
  // Discretized white-noise acceleration.
  const double q = config.process_noise;
  Mat6 noise = Mat6::Zero();
  noise.topLeftCorner<3, 3>() = Mat3::Identity() * (q * dt * dt * dt / 3.0);
  noise.topRightCorner<3, 3>() = Mat3::Identity() * (q * dt * dt / 2.0);
  noise.bottomLeftCorner<3, 3>() = Mat3::Identity() * (q * dt * dt / 2.0);
  noise.bottomRightCorner<3, 3>() = Mat3::Identity() * (q * dt);
  next.covariance = f * state.covariance * f.transpose() + noise;
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose()).eval();
  return next;
}

EkfState update(const EkfState& state, const SweepMeasurement& m, const EkfConfig& config) {
  if (m.station == nullptr) {
    throw std::invalid_argument("measurement has no base station");
  }
  const Vec3 sensor = state.position + m.body_orientation * m.sensor_offset;
  const AngleJacobian jac = measurement_jacobian(sensor, *m.station, m.sweep.plane);

  Vec6 h = Vec6::Zero();
  h.head<3>() = jac.gradient;
  const double r = config.sigma_angle * config.sigma_angle;
  const Vec6 ph = state.covariance * h;
  const double s = h.dot(ph) + r;
  const double innovation = wrap_to_pi(m.sweep.angle - jac.predicted);
  const double gate = config.gate_sigmas * std::sqrt(s);
  if (std::abs(innovation) > gate) {
    throw MeasurementRejected(innovation, gate);
  }

  const Vec6 k = ph / s;
  EkfState next = state;
  next.position += k.head<3>() * innovation;
  next.velocity += k.tail<3>() * innovation;
  const Mat6 a = Mat6::Identity() - k * h.transpose();
  next.covariance = a * state.covariance * a.transpose() + r * k * k.transpose();
  next.covariance = condition_covariance(next.covariance);
  return next;
}

Mat6 condition_covariance(const Mat6& p, double floor) {
  const Mat6 sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Mat6> eig(sym);
  if (eig.eigenvalues().minCoeff() >= floor) {
    return sym;
  }
  const Vec6 values = eig.eigenvalues().cwiseMax(floor);
  Mat6 out = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace lhloc
