#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lhloc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class LhVersion : std::uint8_t { LH1 = 1, LH2 = 2 };

/// One rotating light plane of a base station.
///
/// A point p given in station coordinates is expressed in the plane's drum
/// frame as `drum_rotation * p`; the drum spins about the +z axis of that frame
/// and the station looks along +x.
struct SweepPlane {
  double tilt = 0.0;
  Mat3 drum_rotation = Mat3::Identity();
};

/// Drum rotation of the second LH1 plane (vertical sweep).
Mat3 lh1_vertical_drum();

/// The two planes of a base station of the given hardware generation.
std::array<SweepPlane, 2> planes_for(LhVersion version);

/// Base station pose and plane characteristics.
///
/// `rotation` and `translation` map station coordinates to the global (LH)
/// frame: p_global = rotation * p_station + translation.
class BaseStation {
 public:
  BaseStation() = default;
  /// Throws std::invalid_argument if `rotation` is not a proper rotation.
  BaseStation(int id, LhVersion version, const Mat3& rotation, const Vec3& translation);

  /// Station at `position` whose forward axis points at `target`, keeping the
  /// station's +z axis as close to global +z as possible.
  static BaseStation looking_at(int id, LhVersion version, const Vec3& position, const Vec3& target);

  int id() const { return id_; }
  LhVersion version() const { return version_; }
  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  const std::array<SweepPlane, 2>& planes() const { return planes_; }
  /// `index` is 1 or 2.
  const SweepPlane& plane(int index) const;

  Vec3 to_station(const Vec3& global) const { return rotation_.transpose() * (global - translation_); }
  Vec3 to_global(const Vec3& station) const { return rotation_ * station + translation_; }
  /// Global point expressed in the rotated drum frame of plane `index`.
  Vec3 to_plane_frame(const Vec3& global, int index) const {
    return plane(index).drum_rotation * to_station(global);
  }

  /// Replaces the plane characteristics; used for synthetic degenerate cases.
  void set_planes(const std::array<SweepPlane, 2>& planes) { planes_ = planes; }

 private:
  int id_ = 0;
  LhVersion version_ = LhVersion::LH1;
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
  std::array<SweepPlane, 2> planes_ = planes_for(LhVersion::LH1);
};

/// Four-receiver deck. Offsets are in the body frame and average to zero.
struct SensorDeck {
  static constexpr int kSensorCount = 4;

  std::array<Vec3, kSensorCount> offsets;
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Vec3 position = Vec3::Zero();

  /// Receiver layout of the Crazyflie Lighthouse deck.
  static SensorDeck crazyflie();

  Vec3 sensor_position(int sensor) const { return position + orientation * offsets.at(sensor); }
};

/// One measured sweep angle.
struct SweepAngle {
  std::uint8_t base_station_id = 0;
  std::uint8_t sensor = 0;
  std::uint8_t plane = 1;  // 1 or 2
  double angle = 0.0;
  std::uint64_t timestamp_us = 0;

  friend bool operator==(const SweepAngle&, const SweepAngle&) = default;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  Vec3 at(double s) const { return origin + s * direction; }
};

/// Wraps an angle to (-pi, pi].
double wrap_to_pi(double angle);

/// Sweep angle of a point given in the plane's drum frame.
/// Throws DomainError when the point lies on the drum axis or outside the
/// arcsin domain of the tilted plane.
double sweep_angle_forward(const Vec3& sensor_in_plane_frame, const SweepPlane& plane);

/// Sweep angle of a global point seen by plane `plane_index` of `bs`.
double sweep_angle(const BaseStation& bs, int plane_index, const Vec3& global);

/// Unit normal, in station coordinates, of the light plane at sweep angle `angle`.
Vec3 sweep_plane_normal(const SweepPlane& plane, double angle);

/// Ray from the station towards the sensor, in the global frame, from the
/// two plane angles the sensor observed. Throws DegenerateRay when the two
/// plane normals are parallel.
Ray ray_from_sweep_pair(const BaseStation& bs, double angle_1, double angle_2);

/// Half-angles (radians) of the nominal field of view of a station.
struct FieldOfView {
  double horizontal;
  double vertical;
};
FieldOfView field_of_view(LhVersion version);

/// True if `global` is in front of the station, within its nominal field of
/// view, and both planes can produce a valid angle for it.
bool in_field_of_view(const BaseStation& bs, const Vec3& global);

/// Rotation + translation: p' = rotation * p + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

/// Rotation from roll/pitch/yaw (applied as Rz(yaw) * Ry(pitch) * Rx(roll)).
Mat3 rotation_from_rpy(double roll, double pitch, double yaw);

/// Angle of the relative rotation a^T b.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Distance from point to ray (closest point clamped to the half-line).
double distance_to_ray(const Ray& ray, const Vec3& point);

}  // namespace lhloc
