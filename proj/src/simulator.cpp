#include "lhloc/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "lhloc/errors.hpp"

namespace lhloc {

namespace {

constexpr double kGravity = 9.80665;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) {
    parts.push_back(trim(part));
  }
  return parts;
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
  const auto parts = split(value, ',');
  if (parts.size() != 3) {
    throw ConfigError("config key '" + key + "': expected x,y,z");
  }
  return Vec3(parse_number(key, parts[0]), parse_number(key, parts[1]), parse_number(key, parts[2]));
}

Scenario parse_scenario(const std::string& value) {
  if (value == "stationary") return Scenario::Stationary;
  if (value == "external_motion") return Scenario::ExternalMotion;
  if (value == "flight") return Scenario::Flight;
  throw ConfigError("config key 'scenario': unknown scenario '" + value + "'");
}

LhVersion parse_version(const std::string& value) {
  if (value == "1" || value == "LH1" || value == "lh1") return LhVersion::LH1;
  if (value == "2" || value == "LH2" || value == "lh2") return LhVersion::LH2;
  throw ConfigError("config key 'lh_version': unknown version '" + value + "'");
}

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }
double smoothstep_rate(double u) { return 6.0 * u * (1.0 - u); }
double smoothstep_accel(double u) { return 6.0 - 12.0 * u; }

}  // namespace

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::Stationary:
      return "stationary";
    case Scenario::ExternalMotion:
      return "external_motion";
    case Scenario::Flight:
      return "flight";
  }
  return "unknown";
}

std::array<BaseStation, 2> ScenarioConfig::default_stations(LhVersion version, const Vec3& area_center) {
  return {BaseStation::looking_at(0, version, area_center + Vec3(-1.3, -1.3, 0.8), area_center),
          BaseStation::looking_at(1, version, area_center + Vec3(-1.3, 1.3, 0.8), area_center)};
}

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (!(mocap_rate > 0.0 && sweep_rate > 0.0 && imu_rate > 0.0 && truth_rate > 0.0)) {
    throw ConfigError("rates must be > 0");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate <= 1.0)) throw ConfigError("dropout_rate must be in [0, 1]");
  if (!(sigma_angle >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(std::abs(clock.drift_ppm) <= 5000.0)) throw ConfigError("clock_drift_ppm must be within +-5000");
  if (!(clock.offset >= 0.0)) throw ConfigError("clock_offset must be >= 0");
  if (!(interference_period >= 0.0 && interference_window >= 0.0)) {
    throw ConfigError("interference period and window must be >= 0");
  }
  if (!(flight_speed > 0.0 && motion_peak_speed > 0.0 && area_size > 0.0)) {
    throw ConfigError("flight_speed, motion_peak_speed and area_size must be > 0");
  }
  const double last_sample = (std::ceil(duration * mocap_rate - 1e-9) - 1.0) / mocap_rate;
  for (const auto& [from, to] : mocap_gaps) {
    if (!(from < to) || !(from > 0.0) || !(to < last_sample)) {
      throw ConfigError("mocap gaps must be non-empty and lie strictly inside the recording");
    }
  }
  if (stations[0].id() == stations[1].id()) throw ConfigError("base station ids must differ");
}

ScenarioConfig parse_scenario_config(std::string_view text) {
  std::map<std::string, std::string> values;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    values[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }

  static const std::set<std::string> kKnown = {
      "scenario",          "duration",           "lh_version",        "seed",
      "noise_sigma",       "dropout_rate",       "interference_period", "interference_window",
      "mocap_rate",        "sweep_rate",         "imu_rate",          "truth_rate",
      "clock_offset",      "clock_drift_ppm",    "mocap_latency",     "mocap_start",
      "mocap_gaps",        "mocap_rotation_rpy", "mocap_translation", "area_center",
      "area_size",         "flight_speed",       "motion_peak_speed", "bs1_position",
      "bs1_look_at",       "bs2_position",       "bs2_look_at"};
  for (const auto& [key, value] : values) {
    if (!kKnown.contains(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  for (const char* key : {"scenario", "duration", "lh_version", "seed"}) {
    if (!values.contains(key)) {
      throw ConfigError(std::string("missing config key '") + key + "'");
    }
  }

  auto number = [&](const std::string& key, double fallback) {
    const auto it = values.find(key);
    return it == values.end() ? fallback : parse_number(key, it->second);
  };
  auto vec = [&](const std::string& key, const Vec3& fallback) {
    const auto it = values.find(key);
    return it == values.end() ? fallback : parse_vec3(key, it->second);
  };

  ScenarioConfig c;
  c.scenario = parse_scenario(values.at("scenario"));
  c.duration = number("duration", c.duration);
  c.lh_version = parse_version(values.at("lh_version"));
  {
    const std::string& seed = values.at("seed");
    const auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), c.rng_seed);
    if (ec != std::errc() || ptr != seed.data() + seed.size()) {
      throw ConfigError("config key 'seed': expected an unsigned integer");
    }
  }
  c.sigma_angle = number("noise_sigma", c.sigma_angle);
  c.dropout_rate = number("dropout_rate", c.dropout_rate);
  c.interference_period = number("interference_period", c.interference_period);
  c.interference_window = number("interference_window", c.interference_window);
  c.mocap_rate = number("mocap_rate", c.mocap_rate);
  c.sweep_rate = number("sweep_rate", c.sweep_rate);
  c.imu_rate = number("imu_rate", c.imu_rate);
  c.truth_rate = number("truth_rate", c.truth_rate);
  c.clock.offset = number("clock_offset", c.clock.offset);
  c.clock.drift_ppm = number("clock_drift_ppm", c.clock.drift_ppm);
  c.clock.mocap_latency = number("mocap_latency", c.clock.mocap_latency);
  c.mocap_start = number("mocap_start", c.mocap_start);
  c.area_center = vec("area_center", c.area_center);
  c.area_size = number("area_size", c.area_size);
  c.flight_speed = number("flight_speed", c.flight_speed);
  c.motion_peak_speed = number("motion_peak_speed", c.motion_peak_speed);

  if (const auto it = values.find("mocap_gaps"); it != values.end() && !it->second.empty()) {
    for (const std::string& gap : split(it->second, ',')) {
      const auto bounds = split(gap, ':');
      if (bounds.size() != 2) {
        throw ConfigError("config key 'mocap_gaps': expected start:end[,start:end...]");
      }
      c.mocap_gaps.emplace_back(parse_number("mocap_gaps", bounds[0]), parse_number("mocap_gaps", bounds[1]));
    }
  }
  const Vec3 rpy = vec("mocap_rotation_rpy", Vec3::Zero());
  c.mocap_frame.rotation = rotation_from_rpy(rpy.x(), rpy.y(), rpy.z());
  c.mocap_frame.translation = vec("mocap_translation", Vec3::Zero());

  const auto defaults = ScenarioConfig::default_stations(c.lh_version, c.area_center);
  c.stations = {
      BaseStation::looking_at(0, c.lh_version, vec("bs1_position", defaults[0].translation()),
                              vec("bs1_look_at", c.area_center)),
      BaseStation::looking_at(1, c.lh_version, vec("bs2_position", defaults[1].translation()),
                              vec("bs2_look_at", c.area_center))};
  c.validate();
  return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_config(text.str());
}

// --- trajectory -------------------------------------------------------------

Trajectory Trajectory::stationary(double duration, const Vec3& position) {
  Trajectory t;
  t.scenario_ = Scenario::Stationary;
  t.duration_ = duration;
  t.fixed_ = position;
  return t;
}

Trajectory Trajectory::flight(double duration, std::vector<Segment> segments) {
  Trajectory t;
  t.scenario_ = Scenario::Flight;
  t.duration_ = duration;
  t.segments_ = std::move(segments);
  if (!t.segments_.empty()) {
    t.fixed_ = t.segments_.front().from;
  }
  return t;
}

Trajectory Trajectory::external_motion(double duration, const Sweep& sweep) {
  Trajectory t;
  t.scenario_ = Scenario::ExternalMotion;
  t.duration_ = duration;
  t.sweep_ = sweep;
  return t;
}

Vec3 Trajectory::position_at(double t) const {
  switch (scenario_) {
    case Scenario::Stationary:
      return fixed_;
    case Scenario::Flight: {
      if (segments_.empty()) {
        return fixed_;
      }
      auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                 [](double v, const Segment& s) { return v < s.start; });
      if (it == segments_.begin()) {
        return segments_.front().from;
      }
      const Segment& s = *std::prev(it);
      const double u = std::clamp((t - s.start) / s.length, 0.0, 1.0);
      return s.from + smoothstep(u) * (s.to - s.from);
    }
    case Scenario::ExternalMotion:
      return sweep_.center +
             sweep_.amplitude.cwiseProduct((sweep_.frequency * t + sweep_.phase).array().sin().matrix());
  }
  return fixed_;
}

Eigen::Quaterniond Trajectory::orientation_at(double t) const {
  if (scenario_ != Scenario::ExternalMotion) {
    return Eigen::Quaterniond::Identity();
  }
  const Vec3 rpy = sweep_.tilt_amplitude.cwiseProduct((sweep_.tilt_frequency * t).array().sin().matrix());
  return Eigen::Quaterniond(rotation_from_rpy(rpy.x(), rpy.y(), rpy.z()));
}

TrajectoryPoint Trajectory::at(double t) const {
  const double tc = std::clamp(t, 0.0, duration_);
  TrajectoryPoint p;
  p.t = t;
  p.position = position_at(tc);
  p.orientation = orientation_at(tc);
  const bool moving = t >= 0.0 && t <= duration_;
  switch (scenario_) {
    case Scenario::Stationary:
      break;
    case Scenario::Flight: {
      auto it = std::upper_bound(segments_.begin(), segments_.end(), tc,
                                 [](double v, const Segment& s) { return v < s.start; });
      if (moving && it != segments_.begin()) {
        const Segment& s = *std::prev(it);
        const double u = (tc - s.start) / s.length;
        if (u >= 0.0 && u <= 1.0) {
          p.velocity = smoothstep_rate(u) / s.length * (s.to - s.from);
          p.acceleration = smoothstep_accel(u) / (s.length * s.length) * (s.to - s.from);
        }
      }
      break;
    }
    case Scenario::ExternalMotion: {
      if (moving) {
        const Eigen::Array3d arg = (sweep_.frequency * tc + sweep_.phase).array();
        p.velocity = (sweep_.amplitude.array() * sweep_.frequency.array() * arg.cos()).matrix();
        p.acceleration =
            (-sweep_.amplitude.array() * sweep_.frequency.array().square() * arg.sin()).matrix();
        constexpr double h = 1e-4;
        const Eigen::Quaterniond dq = orientation_at(tc - h).conjugate() * orientation_at(tc + h);
        const Eigen::AngleAxisd aa(dq);
        p.angular_velocity = aa.axis() * (aa.angle() / (2.0 * h));
      }
      break;
    }
  }
  return p;
}

std::vector<TrajectoryPoint> Trajectory::sample(double rate) const {
  std::vector<TrajectoryPoint> out;
  const auto count = static_cast<std::size_t>(std::floor(duration_ * rate + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(at(static_cast<double>(i) / rate));
  }
  return out;
}

Trajectory generate_trajectory(const ScenarioConfig& config) {
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  auto random_point = [&] {
    return Vec3(config.area_center + config.area_size * Vec3(unit(rng), unit(rng), unit(rng)));
  };

  switch (config.scenario) {
    case Scenario::Stationary:
      return Trajectory::stationary(config.duration, random_point());
    case Scenario::Flight: {
      std::vector<Trajectory::Segment> segments;
      Vec3 from = random_point();
      double t = 0.0;
      while (t < config.duration) {
        const Vec3 to = random_point();
        const double distance = (to - from).norm();
        if (distance < 1e-3) {
          continue;
        }
        // Smoothstep peaks at 1.5x the average speed.
        const double length = 1.5 * distance / config.flight_speed;
        segments.push_back({t, length, from, to});
        t += length;
        from = to;
      }
      return Trajectory::flight(config.duration, std::move(segments));
    }
    case Scenario::ExternalMotion: {
      std::uniform_real_distribution<double> factor(0.7, 1.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      Trajectory::Sweep sweep;
      sweep.center = config.area_center;
      sweep.amplitude = config.area_size * Vec3(0.8, 4.0 / 3.0, 0.4);
      for (int i = 0; i < 3; ++i) {
        sweep.frequency[i] = config.motion_peak_speed / (sweep.amplitude[i] * std::sqrt(3.0)) * factor(rng);
        sweep.phase[i] = phase(rng);
      }
      sweep.tilt_amplitude = Vec3(0.15, 0.15, 0.3);
      sweep.tilt_frequency = Vec3(1.3, 1.7, 0.5);
      return Trajectory::external_motion(config.duration, sweep);
    }
  }
  return Trajectory::stationary(config.duration, config.area_center);
}

// --- session ----------------------------------------------------------------

std::uint64_t cf_clock_us(const ClockModel& clock, double t) {
  const double seconds = clock.offset + t * (1.0 + clock.drift_ppm * 1e-6);
  return static_cast<std::uint64_t>(std::llround(std::max(0.0, seconds) * 1e6));
}

std::vector<double> epoch_times(const ScenarioConfig& config) {
  std::vector<double> out;
  for (std::size_t e = 0;; ++e) {
    const double t = (static_cast<double>(e) + 0.5) / config.sweep_rate;
    if (t > config.duration) {
      break;
    }
    out.push_back(t);
  }
  return out;
}

bool in_interference_window(const ScenarioConfig& config, double t) {
  return config.lh_version == LhVersion::LH2 && config.interference_period > 0.0 &&
         config.interference_window > 0.0 && std::fmod(t, config.interference_period) < config.interference_window;
}

SessionBundle synthesize_session(const ScenarioConfig& config, const Trajectory& trajectory) {
  config.validate();
  // Separate stream so trajectory generation and measurement noise stay independent.
  std::mt19937_64 rng(config.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, config.sigma_angle > 0.0 ? config.sigma_angle : 1.0);
  const SensorDeck layout = SensorDeck::crazyflie();

  SessionBundle bundle;

  // mocap: reference clock, uniform grid starting at LED-on
  const auto mocap_count = static_cast<std::size_t>(std::ceil(config.duration * config.mocap_rate - 1e-9));
  bundle.mocap.rate = config.mocap_rate;
  bundle.mocap.start_offset = config.mocap_start;
  bundle.mocap.samples.reserve(mocap_count);
  for (std::size_t k = 0; k < mocap_count; ++k) {
    const double tau = static_cast<double>(k) / config.mocap_rate;
    MocapSample s;
    s.t = config.mocap_start + tau;
    const bool hidden = std::any_of(config.mocap_gaps.begin(), config.mocap_gaps.end(),
                                    [&](const auto& gap) { return tau >= gap.first && tau <= gap.second; });
    if (hidden) {
      s.position = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    } else {
      s.position = config.mocap_frame.apply(trajectory.at(tau - config.clock.mocap_latency).position);
    }
    bundle.mocap.samples.push_back(s);
  }
  const double last_visible = mocap_count == 0 ? 0.0 : static_cast<double>(mocap_count - 1) / config.mocap_rate;

  for (const TrajectoryPoint& p : trajectory.sample(config.truth_rate)) {
    bundle.truth.push_back({p.t, cf_clock_us(config.clock, p.t), p.position, p.velocity, p.orientation});
  }

  // priority breaks timestamp ties: sweeps first, then markers, then IMU
  struct Pending {
    std::uint64_t timestamp;
    int priority;
    std::size_t sequence;
    CfEvent event;
  };
  std::vector<Pending> pending;
  auto push = [&](std::uint64_t ts, int priority, CfEvent ev) {
    pending.push_back({ts, priority, pending.size(), std::move(ev)});
  };

  push(cf_clock_us(config.clock, 0.0), 1, LedMarker{cf_clock_us(config.clock, 0.0), true});
  push(cf_clock_us(config.clock, last_visible), 1, LedMarker{cf_clock_us(config.clock, last_visible), false});

  for (double tau : epoch_times(config)) {
    const bool dropped = uniform(rng) < config.dropout_rate;
    if (dropped || in_interference_window(config, tau)) {
      continue;
    }
    const TrajectoryPoint truth = trajectory.at(tau);
    SensorDeck deck = layout;
    deck.position = truth.position;
    deck.orientation = truth.orientation;
    const std::uint64_t epoch_ts = cf_clock_us(config.clock, tau);
    std::uint64_t k = 0;
    for (const BaseStation& bs : config.stations) {
      for (int sensor = 0; sensor < SensorDeck::kSensorCount; ++sensor) {
        const Vec3 pos = deck.sensor_position(sensor);
        if (!in_field_of_view(bs, pos)) {
          continue;
        }
        for (int plane : kPlaneSweepOrder) {
          double angle = sweep_angle(bs, plane, pos);
          if (config.sigma_angle > 0.0) {
            angle = wrap_to_pi(angle + noise(rng));
          }
          SweepAngle sweep{static_cast<std::uint8_t>(bs.id()), static_cast<std::uint8_t>(sensor),
                           static_cast<std::uint8_t>(plane), angle, epoch_ts + k};
          push(sweep.timestamp_us, 0, sweep);
          ++k;
        }
      }
    }
  }

  for (std::size_t i = 0;; ++i) {
    const double tau = (static_cast<double>(i) + 0.5) / config.imu_rate;
    if (tau > config.duration) {
      break;
    }
    const TrajectoryPoint truth = trajectory.at(tau);
    const Vec3 specific_force =
        truth.orientation.conjugate() * (truth.acceleration + Vec3(0.0, 0.0, kGravity));
    ImuSample imu;
    imu.timestamp_us = cf_clock_us(config.clock, tau);
    for (int a = 0; a < 3; ++a) {
      imu.accel[static_cast<std::size_t>(a)] = static_cast<float>(specific_force[a]);
      imu.gyro[static_cast<std::size_t>(a)] = static_cast<float>(truth.angular_velocity[a]);
    }
    push(imu.timestamp_us, 2, imu);
  }

  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.timestamp, a.priority, a.sequence) < std::tie(b.timestamp, b.priority, b.sequence);
  });
  bundle.cf_events.reserve(pending.size());
  std::uint64_t last = 0;
  for (Pending& p : pending) {
    // Keep the stream strictly increasing; only the first angle of an epoch
    // carries its timing and it always sorts ahead of colliding events.
    std::uint64_t ts = p.timestamp;
    if (!bundle.cf_events.empty() && ts <= last) {
      ts = last + 1;
    }
    std::visit([ts](auto& ev) { ev.timestamp_us = ts; }, p.event);
    bundle.cf_events.push_back(std::move(p.event));
    last = ts;
  }
  return bundle;
}

}  // namespace lhloc
