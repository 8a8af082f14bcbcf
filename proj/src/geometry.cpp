#include "lhloc/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lhloc/errors.hpp"

namespace lhloc {

namespace {

constexpr double kParallelTolerance = 1e-12;

bool is_rotation(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).norm() < 1e-9 && std::abs(r.determinant() - 1.0) < 1e-9;
}

}  // namespace

Mat3 lh1_vertical_drum() {
  Mat3 r;
  r << 1, 0, 0,
       0, 0, 1,
       0, -1, 0;
  return r;
}

std::array<SweepPlane, 2> planes_for(LhVersion version) {
  if (version == LhVersion::LH1) {
    return {SweepPlane{0.0, Mat3::Identity()}, SweepPlane{0.0, lh1_vertical_drum()}};
  }
  constexpr double kTilt = std::numbers::pi / 6.0;
  return {SweepPlane{-kTilt, Mat3::Identity()}, SweepPlane{kTilt, Mat3::Identity()}};
}

BaseStation::BaseStation(int id, LhVersion version, const Mat3& rotation, const Vec3& translation)
    : id_(id), version_(version), rotation_(rotation), translation_(translation), planes_(planes_for(version)) {
  if (!is_rotation(rotation)) {
    throw std::invalid_argument("base station rotation is not orthonormal with determinant +1");
  }
}

BaseStation BaseStation::looking_at(int id, LhVersion version, const Vec3& position, const Vec3& target) {
  const Vec3 forward = (target - position).normalized();
  Vec3 up = Vec3::UnitZ() - forward.dot(Vec3::UnitZ()) * forward;
  if (up.norm() < 1e-9) {
    up = Vec3::UnitY() - forward.dot(Vec3::UnitY()) * forward;
  }
  up.normalize();
  const Vec3 left = up.cross(forward);
  Mat3 r;
  r.col(0) = forward;
  r.col(1) = left;
  r.col(2) = up;
  return BaseStation(id, version, r, position);
}

const SweepPlane& BaseStation::plane(int index) const {
  if (index != 1 && index != 2) {
    throw std::out_of_range("plane index must be 1 or 2");
  }
  return planes_[static_cast<std::size_t>(index - 1)];
}

SensorDeck SensorDeck::crazyflie() {
  SensorDeck deck;
  deck.offsets = {Vec3(-0.015, 0.0075, 0.0), Vec3(-0.015, -0.0075, 0.0), Vec3(0.015, 0.0075, 0.0),
                  Vec3(0.015, -0.0075, 0.0)};
  return deck;
}

double wrap_to_pi(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, kTwoPi);  // [-pi, pi]
  if (wrapped <= -std::numbers::pi) {
    wrapped += kTwoPi;
  }
  return wrapped;
}

double sweep_angle_forward(const Vec3& p, const SweepPlane& plane) {
  const double r = std::hypot(p.x(), p.y());
  if (r == 0.0) {
    throw DomainError("sensor lies on the drum axis");
  }
  const double arg = p.z() * std::tan(plane.tilt) / r;
  if (!(std::abs(arg) <= 1.0)) {
    throw DomainError("tilted plane cannot reach sensor (arcsin argument outside [-1, 1])");
  }
  return wrap_to_pi(std::atan2(p.y(), p.x()) + std::asin(arg));
}

double sweep_angle(const BaseStation& bs, int plane_index, const Vec3& global) {
  return sweep_angle_forward(bs.to_plane_frame(global, plane_index), bs.plane(plane_index));
}

Vec3 sweep_plane_normal(const SweepPlane& plane, double angle) {
  // Zero-angle normal (0, -1, -tan t) rotated about the drum axis by `angle`.
  const Vec3 in_drum = Vec3(std::sin(angle), -std::cos(angle), -std::tan(plane.tilt)).normalized();
  return plane.drum_rotation.transpose() * in_drum;
}

Ray ray_from_sweep_pair(const BaseStation& bs, double angle_1, double angle_2) {
  const Vec3 n1 = sweep_plane_normal(bs.plane(1), angle_1);
  const Vec3 n2 = sweep_plane_normal(bs.plane(2), angle_2);
  Vec3 direction = n1.cross(n2);
  const double norm = direction.norm();
  if (norm <= kParallelTolerance) {
    throw DegenerateRay("sweep plane normals are parallel");
  }
  direction /= norm;
  if (direction.x() < 0.0) {
    direction = -direction;
  }
  return Ray{bs.translation(), bs.rotation() * direction};
}

FieldOfView field_of_view(LhVersion version) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  if (version == LhVersion::LH1) {
    return {60.0 * kDeg, 60.0 * kDeg};
  }
  return {75.0 * kDeg, 55.0 * kDeg};
}

bool in_field_of_view(const BaseStation& bs, const Vec3& global) {
  const Vec3 p = bs.to_station(global);
  if (p.x() <= 0.0) {
    return false;
  }
  const FieldOfView fov = field_of_view(bs.version());
  if (std::abs(std::atan2(p.y(), p.x())) > fov.horizontal ||
      std::abs(std::atan2(p.z(), std::hypot(p.x(), p.y()))) > fov.vertical) {
    return false;
  }
  for (int index = 1; index <= 2; ++index) {
    const Vec3 q = bs.plane(index).drum_rotation * p;
    const double r = std::hypot(q.x(), q.y());
    if (r == 0.0 || std::abs(q.z() * std::tan(bs.plane(index).tilt)) >= r) {
      return false;
    }
  }
  return true;
}

Mat3 rotation_from_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  return Eigen::AngleAxisd(a.transpose() * b).angle();
}

double distance_to_ray(const Ray& ray, const Vec3& point) {
  const double s = std::max(0.0, (point - ray.origin).dot(ray.direction));
  return (ray.at(s) - point).norm();
}

}  // namespace lhloc
