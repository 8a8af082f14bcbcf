#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "lhloc/geometry.hpp"

namespace lhloc {

/// Onboard position estimate.
struct CfSample {
  std::uint64_t timestamp_us = 0;
  Vec3 position = Vec3::Zero();
};

/// Body-frame specific force (m/s^2) and angular rate (rad/s).
struct ImuSample {
  std::uint64_t timestamp_us = 0;
  std::array<float, 3> accel{};
  std::array<float, 3> gyro{};
};

/// Active-marker LEDs switched on or off.
struct LedMarker {
  std::uint64_t timestamp_us = 0;
  bool on = false;
};

using CfEvent = std::variant<SweepAngle, CfSample, ImuSample, LedMarker>;

std::uint64_t timestamp_of(const CfEvent& event);

/// Ground-truth sample on the mocap clock (seconds). NaN position = markers lost.
struct MocapSample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

struct MocapStream {
  double rate = 300.0;
  double start_offset = 0.0;
  std::vector<MocapSample> samples;
};

/// Simulator truth, kept for oracle checks only.
struct TruthSample {
  double t = 0.0;  // truth/mocap time base, seconds from LED-on
  std::uint64_t cf_timestamp_us = 0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

struct SessionBundle {
  std::vector<CfEvent> cf_events;
  MocapStream mocap;
  std::vector<TruthSample> truth;
};

template <typename T>
std::vector<T> events_of(const SessionBundle& bundle) {
  std::vector<T> out;
  for (const CfEvent& e : bundle.cf_events) {
    if (const T* v = std::get_if<T>(&e)) {
      out.push_back(*v);
    }
  }
  return out;
}

}  // namespace lhloc
