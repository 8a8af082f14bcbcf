#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "lhloc/crossing_beam.hpp"
#include "lhloc/ekf.hpp"
#include "lhloc/metrics.hpp"
#include "lhloc/session.hpp"
#include "lhloc/simulator.hpp"

namespace lhloc {

struct EstimateOptions {
  std::uint64_t epoch_window_us = 10'000;
  double delta_gate = 0.1;  // sensors above this delta are left out of the average
  EkfConfig ekf;
  double ekf_output_rate = 100.0;  // Hz
  bool ekf_use_imu = true;
};

struct EstimateRun {
  std::vector<CfSample> estimates;
  std::vector<EpochQuality> epochs;  // crossing beam only
  std::size_t skipped = 0;           // epochs that could not be solved / rejected measurements
};

/// Crossing-beam estimate for every epoch with at least one fully observed sensor.
EstimateRun run_crossing_beam(const std::array<BaseStation, 2>& stations, const SessionBundle& session,
                              const EstimateOptions& options);

/// EKF over the sweep stream, emitting estimates at the configured output rate.
/// Body orientation comes from the session truth when present.
EstimateRun run_ekf(const std::array<BaseStation, 2>& stations, const Vec3& initial_position,
                    const SessionBundle& session, const EstimateOptions& options);

/// Starting point for the EKF: the first crossing-beam fix whose delta passes
/// the gate, or `fallback` when no epoch is seen by both stations.
Vec3 initial_position(const std::array<BaseStation, 2>& stations, const SessionBundle& session,
                      const Vec3& fallback, const EstimateOptions& options);

/// Replaces any position estimates in the CF stream with `estimates`, keeping
/// the stream sorted (estimates follow other events with the same timestamp).
void replace_estimates(SessionBundle& session, const std::vector<CfSample>& estimates);

FilterContext make_filter_context(const std::array<BaseStation, 2>& stations, const SessionBundle& session,
                                  std::vector<EpochQuality> epochs);

}  // namespace lhloc
