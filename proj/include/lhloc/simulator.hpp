#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lhloc/geometry.hpp"
#include "lhloc/session.hpp"

namespace lhloc {

enum class Scenario { Stationary, ExternalMotion, Flight };

std::string_view to_string(Scenario scenario);

struct ClockModel {
  double offset = 1.0;          // CF clock reading at LED-on, seconds (>= 0)
  double drift_ppm = 0.0;       // CF clock rate error
  double mocap_latency = 0.0;   // mocap positions lag the truth by this much, seconds
};

/// Order in which the two planes of a station are reported within an epoch.
inline constexpr std::array<int, 2> kPlaneSweepOrder = {1, 2};

struct ScenarioConfig {
  Scenario scenario = Scenario::Stationary;
  double duration = 10.0;
  LhVersion lh_version = LhVersion::LH1;
  std::array<BaseStation, 2> stations;
  double sigma_angle = 0.0;
  double dropout_rate = 0.0;
  double interference_period = 0.25;  // LH2 only
  double interference_window = 0.1;
  double mocap_rate = 300.0;
  double sweep_rate = 30.0;  // epochs per second
  double imu_rate = 100.0;
  double truth_rate = 200.0;
  ClockModel clock;
  double mocap_start = 0.0;  // mocap clock at LED-on
  std::vector<std::pair<double, double>> mocap_gaps;  // truth-time intervals without markers
  RigidTransform mocap_frame;  // LH frame -> mocap frame
  Vec3 area_center = Vec3(0.0, 0.0, 1.0);
  double area_size = 1.5;
  double flight_speed = 0.5;
  double motion_peak_speed = 2.0;
  std::uint64_t rng_seed = 0;

  /// Default stations for `version`, looking at `area_center`.
  static std::array<BaseStation, 2> default_stations(LhVersion version, const Vec3& area_center);

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

/// Parses the flat key=value format. `scenario`, `duration`, `lh_version` and
/// `seed` are required; unknown keys are rejected.
ScenarioConfig parse_scenario_config(std::string_view text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

struct TrajectoryPoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Vec3 angular_velocity = Vec3::Zero();  // body frame
};

/// Analytic deck trajectory over [0, duration]; evaluation clamps outside.
class Trajectory {
 public:
  struct Segment {
    double start = 0.0;
    double length = 0.0;  // seconds
    Vec3 from = Vec3::Zero();
    Vec3 to = Vec3::Zero();
  };
  struct Sweep {
    Vec3 center = Vec3::Zero();
    Vec3 amplitude = Vec3::Zero();
    Vec3 frequency = Vec3::Zero();  // rad/s
    Vec3 phase = Vec3::Zero();
    Vec3 tilt_amplitude = Vec3::Zero();  // roll, pitch, yaw
    Vec3 tilt_frequency = Vec3::Zero();
  };

  static Trajectory stationary(double duration, const Vec3& position);
  static Trajectory flight(double duration, std::vector<Segment> segments);
  static Trajectory external_motion(double duration, const Sweep& sweep);

  Scenario scenario() const { return scenario_; }
  double duration() const { return duration_; }
  const std::vector<Segment>& segments() const { return segments_; }

  TrajectoryPoint at(double t) const;
  /// Dense samples at `rate` Hz covering [0, duration].
  std::vector<TrajectoryPoint> sample(double rate) const;

 private:
  Vec3 position_at(double t) const;
  Eigen::Quaterniond orientation_at(double t) const;

  Scenario scenario_ = Scenario::Stationary;
  double duration_ = 0.0;
  Vec3 fixed_ = Vec3::Zero();
  std::vector<Segment> segments_;
  Sweep sweep_;
};

Trajectory generate_trajectory(const ScenarioConfig& config);

/// Truth time (seconds from LED-on) -> CF clock (microseconds).
std::uint64_t cf_clock_us(const ClockModel& clock, double t);

/// Truth instants of the sweep epochs, before dropout.
std::vector<double> epoch_times(const ScenarioConfig& config);

/// True if the epoch at `t` falls into an LH2 interference window.
bool in_interference_window(const ScenarioConfig& config, double t);

SessionBundle synthesize_session(const ScenarioConfig& config, const Trajectory& trajectory);

}  // namespace lhloc
