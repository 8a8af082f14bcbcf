#include "lhloc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lhloc/errors.hpp"

namespace lhloc {

namespace {

// Gravity as the IMU stores it (float), so a level stationary deck maps to zero acceleration.
const double kGravity = static_cast<double>(static_cast<float>(9.80665));

}  // namespace

EstimateRun run_crossing_beam(const std::array<BaseStation, 2>& stations, const SessionBundle& session,
                              const EstimateOptions& options) {
  const std::vector<SweepAngle> sweeps = events_of<SweepAngle>(session);
  CrossingBeamOptions cb;
  cb.require_full_epoch = false;
  cb.delta_gate = options.delta_gate;

  EstimateRun run;
  for (const auto& epoch : assemble_epochs(sweeps, options.epoch_window_us)) {
    try {
      const CrossingBeamResult r = solve(stations[0], stations[1], epoch, cb);
      run.estimates.push_back({r.timestamp_us, r.position});
      run.epochs.push_back({r.timestamp_us, r.complete, r.sensors_used(), r.max_delta});
    } catch (const IncompleteEpoch&) {
      ++run.skipped;
    } catch (const DegenerateRay&) {
      ++run.skipped;
    } catch (const ParallelRays&) {
      ++run.skipped;
    }
  }
  return run;
}

EstimateRun run_ekf(const std::array<BaseStation, 2>& stations, const Vec3& initial_position,
                    const SessionBundle& session, const EstimateOptions& options) {
  EstimateRun run;
  const auto first_sweep = std::find_if(session.cf_events.begin(), session.cf_events.end(),
                                        [](const CfEvent& e) { return std::holds_alternative<SweepAngle>(e); });
  if (first_sweep == session.cf_events.end()) {
    return run;
  }
  std::uint64_t last_sweep_ts = 0;
  for (const CfEvent& e : session.cf_events) {
    if (const auto* s = std::get_if<SweepAngle>(&e)) {
      last_sweep_ts = s->timestamp_us;
    }
  }

  std::map<int, const BaseStation*> by_id;
  for (const BaseStation& bs : stations) {
    by_id[bs.id()] = &bs;
  }
  const SensorDeck deck = SensorDeck::crazyflie();
  auto orientation_at = [&](std::uint64_t ts) {
    const auto it = std::upper_bound(session.truth.begin(), session.truth.end(), ts,
                                     [](std::uint64_t t, const TruthSample& s) { return t < s.cf_timestamp_us; });
    return it == session.truth.begin() ? Eigen::Quaterniond::Identity() : std::prev(it)->orientation;
  };

  EkfState state;
  state.position = initial_position;
  state.covariance = Mat6::Identity();
  state.covariance.bottomRightCorner<3, 3>() *= 0.01;

  const auto period_us = static_cast<std::uint64_t>(std::llround(1e6 / options.ekf_output_rate));
  std::uint64_t now = timestamp_of(*first_sweep);
  std::uint64_t next_tick = now;
  std::optional<Vec3> accel;

  auto advance = [&](std::uint64_t to) {
    if (to > now) {
      state = predict(state, static_cast<double>(to - now) * 1e-6, accel, options.ekf);
      now = to;
    }
  };
  auto emit_until = [&](std::uint64_t ts) {
    while (next_tick <= ts && next_tick <= last_sweep_ts) {
      advance(next_tick);
      run.estimates.push_back({next_tick, state.position});
      next_tick += period_us;
    }
  };

  for (auto it = first_sweep; it != session.cf_events.end(); ++it) {
    const std::uint64_t ts = timestamp_of(*it);
    emit_until(ts);
    if (const auto* sweep = std::get_if<SweepAngle>(&*it)) {
      const auto bs = by_id.find(sweep->base_station_id);
      if (bs == by_id.end() || sweep->sensor >= SensorDeck::kSensorCount) {
        continue;
      }
      advance(ts);
      SweepMeasurement m;
      m.sweep = *sweep;
      m.station = bs->second;
      m.sensor_offset = deck.offsets[sweep->sensor];
      m.body_orientation = orientation_at(ts);
      try {
        state = update(state, m, options.ekf);
      } catch (const MeasurementRejected&) {
        ++run.skipped;
      } catch (const DomainError&) {
        ++run.skipped;
      }
    } else if (const auto* imu = std::get_if<ImuSample>(&*it); imu != nullptr && options.ekf_use_imu) {
      advance(ts);
      const Vec3 force(imu->accel[0], imu->accel[1], imu->accel[2]);
      accel = orientation_at(ts) * force - Vec3(0.0, 0.0, kGravity);
    }
  }
  emit_until(last_sweep_ts);
  return run;
}

Vec3 initial_position(const std::array<BaseStation, 2>& stations, const SessionBundle& session,
                      const Vec3& fallback, const EstimateOptions& options) {
  const std::vector<SweepAngle> sweeps = events_of<SweepAngle>(session);
  CrossingBeamOptions cb;
  cb.require_full_epoch = false;
  cb.delta_gate = options.delta_gate;
  for (const auto& epoch : assemble_epochs(sweeps, options.epoch_window_us)) {
    try {
      const CrossingBeamResult r = solve(stations[0], stations[1], epoch, cb);
      if (r.max_delta <= options.delta_gate) {
        return r.position;
      }
    } catch (const Error&) {
      // not solvable, try the next epoch
    }
  }
  return fallback;
}

void replace_estimates(SessionBundle& session, const std::vector<CfSample>& estimates) {
  std::vector<CfEvent> merged;
  merged.reserve(session.cf_events.size() + estimates.size());
  auto next = estimates.begin();
  for (const CfEvent& e : session.cf_events) {
    if (std::holds_alternative<CfSample>(e)) {
      continue;
    }
    const std::uint64_t ts = timestamp_of(e);
    while (next != estimates.end() && next->timestamp_us < ts) {
      merged.emplace_back(*next++);
    }
    merged.push_back(e);
  }
  while (next != estimates.end()) {
    merged.emplace_back(*next++);
  }
  session.cf_events = std::move(merged);
}

FilterContext make_filter_context(const std::array<BaseStation, 2>& stations, const SessionBundle& session,
                                  std::vector<EpochQuality> epochs) {
  FilterContext ctx;
  std::sort(epochs.begin(), epochs.end(),
            [](const EpochQuality& a, const EpochQuality& b) { return a.timestamp_us < b.timestamp_us; });
  ctx.epochs = std::move(epochs);
  for (const BaseStation& bs : stations) {
    ctx.station_sweeps[bs.id()];
  }
  for (const CfEvent& e : session.cf_events) {
    if (const auto* s = std::get_if<SweepAngle>(&e)) {
      const auto it = ctx.station_sweeps.find(s->base_station_id);
      if (it != ctx.station_sweeps.end()) {
        it->second.push_back(s->timestamp_us);
      }
    }
  }
  return ctx;
}

}  // namespace lhloc
