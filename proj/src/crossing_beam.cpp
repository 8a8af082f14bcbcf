#include "lhloc/crossing_beam.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <tuple>

#include "lhloc/errors.hpp"

namespace lhloc {

std::pair<Vec3, Vec3> closest_points(const Ray& ray_1, const Ray& ray_2) {
  const Vec3& u = ray_1.direction;
  const Vec3& v = ray_2.direction;
  if (u.cross(v).norm() <= 1e-12) {
    throw ParallelRays("rays are parallel");
  }
  const Vec3 w = ray_1.origin - ray_2.origin;
  const double a = u.dot(u);
  const double b = u.dot(v);
  const double c = v.dot(v);
  const double d = u.dot(w);
  const double e = v.dot(w);
  const double denom = a * c - b * b;

  double s = (b * e - c * d) / denom;
  double t = (a * e - b * d) / denom;
  if (s < 0.0 || t < 0.0) {
    // Convex objective: the constrained minimum lies on one of the two edges.
    const double t_edge = std::max(0.0, e / c);
    const double s_edge = std::max(0.0, -d / a);
    const double dist_s0 = (ray_1.origin - ray_2.at(t_edge)).squaredNorm();
    const double dist_t0 = (ray_1.at(s_edge) - ray_2.origin).squaredNorm();
    if (dist_s0 <= dist_t0) {
      s = 0.0;
      t = t_edge;
    } else {
      s = s_edge;
      t = 0.0;
    }
  }
  return {ray_1.at(s), ray_2.at(t)};
}

int CrossingBeamResult::sensors_used() const {
  return static_cast<int>(std::count_if(per_sensor.begin(), per_sensor.end(), [](const auto& s) { return s.used; }));
}

CrossingBeamResult solve(const BaseStation& bs_1, const BaseStation& bs_2, std::span<const SweepAngle> epoch,
                         const CrossingBeamOptions& options) {
  // angles[station][sensor][plane]
  std::optional<double> angles[2][SensorDeck::kSensorCount][2];
  std::uint64_t first_timestamp = std::numeric_limits<std::uint64_t>::max();
  for (const SweepAngle& sweep : epoch) {
    int station;
    if (sweep.base_station_id == bs_1.id()) {
      station = 0;
    } else if (sweep.base_station_id == bs_2.id()) {
      station = 1;
    } else {
      continue;
    }
    if (sweep.sensor >= SensorDeck::kSensorCount || (sweep.plane != 1 && sweep.plane != 2)) {
      continue;
    }
    angles[station][sweep.sensor][sweep.plane - 1] = sweep.angle;
    first_timestamp = std::min(first_timestamp, sweep.timestamp_us);
  }

  CrossingBeamResult result;
  result.timestamp_us = epoch.empty() ? 0 : first_timestamp;
  result.complete = true;
  for (int sensor = 0; sensor < SensorDeck::kSensorCount; ++sensor) {
    const auto& a = angles[0][sensor];
    const auto& b = angles[1][sensor];
    if (!(a[0] && a[1] && b[0] && b[1])) {
      result.complete = false;
      if (options.require_full_epoch) {
        throw IncompleteEpoch("sensor " + std::to_string(sensor) + " is missing sweep angles");
      }
      continue;
    }
    const Ray r1 = ray_from_sweep_pair(bs_1, *a[0], *a[1]);
    const Ray r2 = ray_from_sweep_pair(bs_2, *b[0], *b[1]);
    const auto [p1, p2] = closest_points(r1, r2);
    SensorEstimate& est = result.per_sensor[static_cast<std::size_t>(sensor)];
    est.valid = true;
    est.position = 0.5 * (p1 + p2);
    est.delta = (p1 - p2).squaredNorm();
  }

  int valid = 0;
  int passing = 0;
  for (const auto& est : result.per_sensor) {
    if (est.valid) {
      ++valid;
      result.max_delta = std::max(result.max_delta, est.delta);
      if (est.delta <= options.delta_gate) {
        ++passing;
      }
    }
  }
  if (valid == 0) {
    throw IncompleteEpoch("no sensor has all four sweep angles");
  }

  Vec3 sum = Vec3::Zero();
  for (auto& est : result.per_sensor) {
    if (est.valid && (passing == 0 || est.delta <= options.delta_gate)) {
      est.used = true;
      sum += est.position;
    }
  }
  result.position = sum / static_cast<double>(passing == 0 ? valid : passing);
  return result;
}

std::vector<std::vector<SweepAngle>> assemble_epochs(std::span<const SweepAngle> sweeps, std::uint64_t window_us) {
  std::vector<std::vector<SweepAngle>> epochs;
  std::set<std::tuple<int, int, int>> seen;
  std::uint64_t start = 0;
  for (const SweepAngle& sweep : sweeps) {
    const auto key = std::make_tuple(int{sweep.base_station_id}, int{sweep.sensor}, int{sweep.plane});
    if (epochs.empty() || sweep.timestamp_us - start > window_us || seen.contains(key)) {
      epochs.emplace_back();
      seen.clear();
      start = sweep.timestamp_us;
    }
    epochs.back().push_back(sweep);
    seen.insert(key);
  }
  return epochs;
}

}  // namespace lhloc
