#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "lhloc/geometry.hpp"

namespace lhloc {

/// Closest points between two half-line rays (parameters clamped to >= 0).
/// Throws ParallelRays when the directions are parallel.
std::pair<Vec3, Vec3> closest_points(const Ray& ray_1, const Ray& ray_2);

struct SensorEstimate {
  bool valid = false;  // all four angles present
  bool used = false;   // contributed to the averaged position
  Vec3 position = Vec3::Zero();
  double delta = 0.0;  // squared distance between the two closest ray points
};

struct CrossingBeamResult {
  Vec3 position = Vec3::Zero();
  std::array<SensorEstimate, SensorDeck::kSensorCount> per_sensor{};
  double max_delta = 0.0;  // over valid sensors
  bool complete = false;   // every sensor had all four angles
  std::uint64_t timestamp_us = 0;

  int sensors_used() const;
};

struct CrossingBeamOptions {
  /// When set, any missing angle raises IncompleteEpoch. Otherwise sensors with
  /// missing angles are skipped and only a fully empty epoch raises.
  bool require_full_epoch = true;
  /// Sensors whose delta exceeds this gate are left out of the average (unless
  /// none pass, in which case all valid sensors are averaged).
  double delta_gate = std::numeric_limits<double>::infinity();
};

/// Triangulates the deck from one epoch of sweep angles seen by two stations.
CrossingBeamResult solve(const BaseStation& bs_1, const BaseStation& bs_2, std::span<const SweepAngle> epoch,
                         const CrossingBeamOptions& options = {});

/// Groups a time-ordered sweep stream into epochs. A new epoch starts when an
/// angle is more than `window_us` after the epoch's first angle, or when the
/// same (station, sensor, plane) reappears.
std::vector<std::vector<SweepAngle>> assemble_epochs(std::span<const SweepAngle> sweeps,
                                                     std::uint64_t window_us = 10'000);

}  // namespace lhloc
