#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "lhloc/geometry.hpp"
#include "lhloc/session.hpp"

namespace lhloc {

/// Sync anchors: LED on/off on the CF clock and first/last marker detection
/// on the mocap clock.
struct ClockAnchors {
  std::uint64_t cf_start_us = 0;
  std::uint64_t cf_end_us = 0;
  double mocap_start = 0.0;
  double mocap_end = 0.0;
};

/// Rescaled time, seconds since the start anchor on the mocap time base.
/// Throws InvalidAnchors on non-positive spans.
double rescale_time(std::uint64_t cf_timestamp_us, const ClockAnchors& anchors);
std::vector<double> rescale_clock(std::span<const std::uint64_t> cf_timestamps_us, const ClockAnchors& anchors);

/// Linear interpolation of the mocap stream at absolute mocap time `t`.
/// Returns NaN when a bracketing sample is NaN, no bracket exists, or the
/// bracket spans more than two nominal periods.
Vec3 interpolate_mocap(double t, const MocapStream& mocap);

/// Least-squares rigid transform mapping first -> second of each pair. Pairs
/// with NaN coordinates are ignored. Throws DegenerateGeometry for fewer than
/// three pairs or collinear points.
RigidTransform fit_rigid_transform(std::span<const std::pair<Vec3, Vec3>> pairs);

struct AlignedRecord {
  double t_hat = 0.0;
  std::uint64_t cf_timestamp_us = 0;
  Vec3 cf = Vec3::Zero();  // already mapped into the mocap frame
  Vec3 mc = Vec3::Zero();  // NaN when no ground truth

  bool has_ground_truth() const { return mc.allFinite(); }
};

struct AlignedDataset {
  std::vector<AlignedRecord> records;
  RigidTransform transform;
  double offset_start = 0.0;  // seconds
  double offset_end = 0.0;
  double residual = 0.0;  // mean Euclidean error over the fitted records
};

struct OffsetGrid {
  double range = 0.1;         // offsets searched over [-range, +range]
  double coarse_step = 0.005;
  double fine_step = 0.001;
};

/// Anchors from the LED markers and the first/last non-NaN mocap sample.
/// Throws InvalidAnchors when either is missing.
ClockAnchors find_anchors(const SessionBundle& session);

/// Estimates and anchors after applying start/end offsets, with the given transform.
AlignedDataset align_with_offsets(std::span<const CfSample> estimates, const MocapStream& mocap,
                                  const ClockAnchors& anchors, double offset_start, double offset_end);

/// Full spatiotemporal alignment of the session's position estimates. When the
/// estimates span less than 5 cm RMS the rotation is held at identity and only
/// a translation is fitted.
AlignedDataset align(const SessionBundle& session, const OffsetGrid& grid = {});

}  // namespace lhloc
