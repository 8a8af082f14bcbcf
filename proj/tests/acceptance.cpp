// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lhloc/alignment.hpp"
#include "lhloc/cli.hpp"
#include "lhloc/crossing_beam.hpp"
#include "lhloc/ekf.hpp"
#include "lhloc/errors.hpp"
#include "lhloc/geometry.hpp"
#include "lhloc/io.hpp"
#include "lhloc/metrics.hpp"
#include "lhloc/pipeline.hpp"
#include "lhloc/simulator.hpp"

namespace fs = std::filesystem;
using namespace lhloc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

Vec3 uniform_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Vec3(u(rng), u(rng), u(rng));
}

BaseStation random_station(std::mt19937_64& rng, LhVersion version) {
  return BaseStation(0, version, random_rotation(rng), uniform_vec(rng, -3.0, 3.0));
}

// Random point inside the station's field of view, at least 0.3 m in front.
Vec3 random_visible_point(std::mt19937_64& rng, const BaseStation& bs) {
  const FieldOfView fov = field_of_view(bs.version());
  std::uniform_real_distribution<double> az(-fov.horizontal, fov.horizontal);
  std::uniform_real_distribution<double> el(-fov.vertical, fov.vertical);
  std::uniform_real_distribution<double> range(0.3, 6.0);
  for (;;) {
    const double a = az(rng);
    const double e = el(rng);
    const double r = range(rng);
    const Vec3 local(r * std::cos(e) * std::cos(a), r * std::cos(e) * std::sin(a), r * std::sin(e));
    const Vec3 p = bs.to_global(local);
    if (local.x() > 0.1 && in_field_of_view(bs, p)) {
      return p;
    }
  }
}

Outcome geometry_round_trip() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int count = 0;
  for (LhVersion v : {LhVersion::LH1, LhVersion::LH2}) {
    for (int i = 0; i < 10000; ++i) {
      const BaseStation bs = random_station(rng, v);
      const Vec3 p = random_visible_point(rng, bs);
      const Ray ray = ray_from_sweep_pair(bs, sweep_angle(bs, 1, p), sweep_angle(bs, 2, p));
      worst = std::max(worst, distance_to_ray(ray, p));
      ++count;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < 1e-9 && secs < 10.0 && count == 20000,
          std::to_string(count) + " poses, max distance " + sci(worst) + " m (< 1e-9), " + sci(secs) + " s (< 10)"};
}

Outcome jacobian_check() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (LhVersion v : {LhVersion::LH1, LhVersion::LH2}) {
    for (int i = 0; i < 1000; ++i) {
      const BaseStation bs = random_station(rng, v);
      const Vec3 p = random_visible_point(rng, bs);
      for (int plane : {1, 2}) {
        const AngleJacobian j = measurement_jacobian(p, bs, plane);
        Vec3 fd;
        const double h = 1e-6;
        for (int k = 0; k < 3; ++k) {
          Vec3 step = Vec3::Zero();
          step[k] = h;
          fd[k] = wrap_to_pi(sweep_angle(bs, plane, p + step) - sweep_angle(bs, plane, p - step)) / (2 * h);
        }
        worst = std::max(worst, (j.gradient - fd).norm() / j.gradient.norm());
      }
    }
  }
  return {worst < 1e-5, "2000 poses x 2 planes, max relative error " + sci(worst) + " (< 1e-5)"};
}

// Squared distance between points at parameters (s, t) of two rays, in extended precision.
long double gap2(const Ray& a, const Ray& b, long double s, long double t) {
  long double sum = 0;
  for (int k = 0; k < 3; ++k) {
    const long double d = a.origin[k] + s * a.direction[k] - b.origin[k] - t * b.direction[k];
    sum += d * d;
  }
  return sum;
}

// Grid search over both ray parameters, then nested ternary refinement of the
// convex objective over the whole parameter box. The refined point must not be
// worse than the best grid node.
std::pair<double, double> brute_force_closest(const Ray& a, const Ray& b) {
  const double sin2 = a.direction.cross(b.direction).squaredNorm();
  const double limit = 2.0 * (a.origin - b.origin).norm() / sin2 + 1.0;
  const int n = 200;
  const double step = limit / n;
  long double grid_best = std::numeric_limits<long double>::infinity();
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      grid_best = std::min(grid_best, gap2(a, b, i * step, j * step));
    }
  }
  auto ternary = [](long double lo, long double hi, const std::function<long double(long double)>& f) {
    for (int it = 0; it < 200; ++it) {
      const long double m1 = lo + (hi - lo) / 3;
      const long double m2 = hi - (hi - lo) / 3;
      if (f(m1) < f(m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    return 0.5 * (lo + hi);
  };
  auto inner_t = [&](long double s) {
    return ternary(0.0L, limit, [&](long double t) { return gap2(a, b, s, t); });
  };
  const long double s = ternary(0.0L, limit, [&](long double s) { return gap2(a, b, s, inner_t(s)); });
  const long double t = inner_t(s);
  if (gap2(a, b, s, t) > grid_best + 1e-12L) {
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }
  return {static_cast<double>(s), static_cast<double>(t)};
}

Outcome crossing_beam_oracle() {
  std::mt19937_64 rng(303);
  double worst_pair = 0.0;
  int pairs = 0;
  while (pairs < 1000) {
    Ray a{uniform_vec(rng, -5, 5), uniform_vec(rng, -1, 1).normalized()};
    Ray b{uniform_vec(rng, -5, 5), uniform_vec(rng, -1, 1).normalized()};
    if (a.direction.cross(b.direction).norm() < 0.2) {
      continue;
    }
    const auto [p1, p2] = closest_points(a, b);
    const auto [s, t] = brute_force_closest(a, b);
    const double dev = std::max((p1 - a.at(s)).norm(), (p2 - b.at(t)).norm());
    worst_pair = std::isnan(dev) ? std::numeric_limits<double>::infinity() : std::max(worst_pair, dev);
    ++pairs;
  }

  double worst_solve = 0.0;
  const SensorDeck layout = SensorDeck::crazyflie();
  for (LhVersion v : {LhVersion::LH1, LhVersion::LH2}) {
    const auto stations = ScenarioConfig::default_stations(v, Vec3(0, 0, 1));
    for (int i = 0; i < 200; ++i) {
      SensorDeck deck = layout;
      deck.position = Vec3(0, 0, 1) + uniform_vec(rng, -0.6, 0.6);
      const Vec3 rpy = uniform_vec(rng, -0.3, 0.3);
      deck.orientation = Eigen::Quaterniond(rotation_from_rpy(rpy.x(), rpy.y(), rpy.z()));
      std::vector<SweepAngle> epoch;
      std::uint64_t ts = 1000;
      for (const BaseStation& bs : stations) {
        for (int s = 0; s < SensorDeck::kSensorCount; ++s) {
          for (int plane : {1, 2}) {
            epoch.push_back({static_cast<std::uint8_t>(bs.id()), static_cast<std::uint8_t>(s),
                             static_cast<std::uint8_t>(plane), sweep_angle(bs, plane, deck.sensor_position(s)), ts++});
          }
        }
      }
      const CrossingBeamResult r = solve(stations[0], stations[1], epoch);
      worst_solve = std::max(worst_solve, (r.position - deck.position).norm());
    }
  }
  return {worst_pair < 1e-6 && worst_solve < 1e-8, "1000 skew pairs, max deviation from oracle " + sci(worst_pair) +
                                                       " m (< 1e-6); noiseless solve max error " + sci(worst_solve) +
                                                       " m (< 1e-8)"};
}

ScenarioConfig stationary_config(LhVersion v, std::uint64_t seed, double duration, double sigma) {
  std::ostringstream text;
  text << "scenario = stationary\nduration = " << duration << "\nlh_version = " << static_cast<int>(v)
       << "\nseed = " << seed << "\nnoise_sigma = " << sigma << '\n';
  return parse_scenario_config(text.str());
}

// Largest EKF position error over estimates at least `settle` seconds after the first one.
double ekf_error_after(const SessionBundle& session, const ScenarioConfig& config, const Vec3& truth,
                       double settle) {
  const EstimateOptions options;
  const Vec3 start = initial_position(config.stations, session, config.area_center, options);
  const EstimateRun run = run_ekf(config.stations, start, session, options);
  if (run.estimates.empty()) {
    return std::numeric_limits<double>::infinity();
  }
  const std::uint64_t from = run.estimates.front().timestamp_us + static_cast<std::uint64_t>(settle * 1e6);
  double worst = 0.0;
  bool any = false;
  for (const CfSample& e : run.estimates) {
    if (e.timestamp_us >= from) {
      worst = std::max(worst, (e.position - truth).norm());
      any = true;
    }
  }
  return any ? worst : std::numeric_limits<double>::infinity();
}

Outcome ekf_convergence() {
  double worst_two = 0.0;
  double worst_one = 0.0;
  for (LhVersion v : {LhVersion::LH1, LhVersion::LH2}) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      const ScenarioConfig config = stationary_config(v, seed, 12.0, 0.0);
      const Trajectory traj = generate_trajectory(config);
      const Vec3 truth = traj.at(0.0).position;
      SessionBundle session = synthesize_session(config, traj);
      worst_two = std::max(worst_two, ekf_error_after(session, config, truth, 2.0));

      std::erase_if(session.cf_events, [&](const CfEvent& e) {
        const auto* s = std::get_if<SweepAngle>(&e);
        return s != nullptr && s->base_station_id == config.stations[1].id();
      });
      worst_one = std::max(worst_one, ekf_error_after(session, config, truth, 10.0));
    }
  }
  return {worst_two < 1e-3 && worst_one < 5e-3, "two stations: max error after 2 s " + sci(worst_two) +
                                                    " m (< 1e-3); one station: max error after 10 s " +
                                                    sci(worst_one) + " m (< 5e-3)"};
}

Outcome alignment_recovery() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  double worst_rot = 0.0;
  double worst_trans = 0.0;
  double worst_offset = 0.0;
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    std::ostringstream text;
    const Vec3 t = uniform_vec(rng, -2.0, 2.0);
    text << "scenario = flight\nduration = 30\nlh_version = 1\nseed = " << seed
         << "\nclock_drift_ppm = 500\nmocap_latency = 0.04\nmocap_rotation_rpy = " << angle(rng) << ','
         << angle(rng) / 2 << ',' << angle(rng) << "\nmocap_translation = " << t.x() << ',' << t.y() << ','
         << t.z() << '\n';
    const ScenarioConfig config = parse_scenario_config(text.str());
    SessionBundle session = synthesize_session(config, generate_trajectory(config));
    replace_estimates(session, run_crossing_beam(config.stations, session, EstimateOptions{}).estimates);
    const AlignedDataset d = align(session);
    worst_rot = std::max(worst_rot, rotation_angle_between(d.transform.rotation, config.mocap_frame.rotation));
    worst_trans = std::max(worst_trans, (d.transform.translation - config.mocap_frame.translation).norm());
    worst_offset = std::max({worst_offset, std::abs(d.offset_start - config.clock.mocap_latency),
                             std::abs(d.offset_end - config.clock.mocap_latency)});
  }
  return {worst_rot < 1e-3 && worst_trans < 1e-3 && worst_offset <= 1e-3 + 1e-9,
          "rotation error " + sci(worst_rot) + " rad (< 1e-3), translation error " + sci(worst_trans) +
              " m (< 1e-3), offset error " + sci(worst_offset) + " s (<= 1e-3)"};
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("lhloc_acceptance_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Outcome noiseless_pipeline() {
  TempDir tmp("e2e");
  double worst_acc = 0.0;
  double worst_prec = 0.0;
  for (int v : {1, 2}) {
    const fs::path config = tmp.path() / ("stationary_lh" + std::to_string(v) + ".txt");
    io::write_file(config, "scenario = stationary\nduration = 10\nlh_version = " + std::to_string(v) +
                               "\nseed = 31\nnoise_sigma = 0\n");
    const fs::path session = tmp.path() / ("lh" + std::to_string(v));
    cli::simulate(config, session);
    cli::estimate(session, Estimator::CrossingBeam, {});
    cli::align(session, {});
    const MetricsReport r = cli::report(session, {});
    worst_acc = std::max(worst_acc, r.accuracy.mean);
    worst_prec = std::max(worst_prec, r.precision);
  }
  return {worst_acc < 1e-8 && worst_prec < 1e-10,
          "mean accuracy error " + sci(worst_acc) + " m (< 1e-8), precision " + sci(worst_prec) + " m (< 1e-10)"};
}

MetricsReport noisy_stationary_report(LhVersion v, double dropout) {
  std::ostringstream text;
  text << "scenario = stationary\nduration = 60\nlh_version = " << static_cast<int>(v)
       << "\nseed = 41\nnoise_sigma = 0.0004\ndropout_rate = " << dropout << '\n';
  ScenarioConfig config = parse_scenario_config(text.str());
  SessionBundle session = synthesize_session(config, Trajectory::stationary(config.duration, config.area_center));
  const EstimateRun run = run_crossing_beam(config.stations, session, EstimateOptions{});
  replace_estimates(session, run.estimates);
  const AlignedDataset d = align(session);
  const FilterContext ctx = make_filter_context(config.stations, session, run.epochs);
  return make_report(apply_filters(d, FilterPolicy::for_estimator(Estimator::CrossingBeam), ctx), session.mocap);
}

Outcome table_reproduction() {
  const double dropout = 0.02;
  const MetricsReport lh1 = noisy_stationary_report(LhVersion::LH1, dropout);
  const MetricsReport lh2 = noisy_stationary_report(LhVersion::LH2, dropout);
  const bool jitter_ok = lh1.precision >= 1e-4 && lh1.precision <= 1e-3 && lh2.precision >= 1e-4 &&
                         lh2.precision <= 1e-3;
  const bool freq_ok = std::abs(lh1.frequency.mean - 30.0) < 3.0;
  const double ratio = lh2.frequency.stddev / lh1.frequency.stddev;
  return {jitter_ok && freq_ok && ratio >= 3.0,
          "jitter LH1 " + sci(lh1.precision * 1e3) + " mm, LH2 " + sci(lh2.precision * 1e3) +
              " mm (in [0.1, 1]); LH1 rate " + sci(lh1.frequency.mean) + " +- " + sci(lh1.frequency.stddev) +
              " Hz (~30), LH2 " + sci(lh2.frequency.mean) + " +- " + sci(lh2.frequency.stddev) +
              " Hz; std ratio " + sci(ratio) + " (>= 3)"};
}

// Straightforward re-implementation in long double with its own loops.
struct OracleMetrics {
  long double precision = 0;
  long double mean = 0;
  long double max = 0;
};

OracleMetrics oracle_metrics(const std::vector<AlignedRecord>& records) {
  OracleMetrics m;
  long double sq = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const long double d = static_cast<long double>(records[i].cf[k]) - records[i - 1].cf[k];
      sq += d * d;
    }
  }
  m.precision = std::sqrt(sq / records.size());
  long double sum = 0;
  std::size_t n = 0;
  for (const AlignedRecord& r : records) {
    if (!r.has_ground_truth()) continue;
    long double e2 = 0;
    for (int k = 0; k < 3; ++k) {
      const long double d = static_cast<long double>(r.cf[k]) - r.mc[k];
      e2 += d * d;
    }
    const long double e = std::sqrt(e2);
    sum += e;
    m.max = std::max(m.max, e);
    ++n;
  }
  m.mean = sum / n;
  return m;
}

double rel(double got, long double want) {
  return static_cast<double>(std::abs(static_cast<long double>(got) - want) / std::max(std::abs(want), 1e-300L));
}

Outcome metrics_oracle() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> size(2, 2000);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AlignedRecord> records(static_cast<std::size_t>(size(rng)));
    double t = 0.0;
    for (AlignedRecord& r : records) {
      t += 0.01 + 0.05 * unit(rng);
      r.t_hat = t;
      r.mc = uniform_vec(rng, -2.0, 2.0);
      r.cf = r.mc + Vec3(noise(rng), noise(rng), noise(rng));
      if (unit(rng) < 0.05) {
        r.mc = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
      }
    }
    records.front().mc = records.front().cf + Vec3(0.001, 0, 0);
    const OracleMetrics want = oracle_metrics(records);
    const AccuracySummary acc = accuracy(records);
    worst = std::max({worst, rel(precision(records), want.precision), rel(acc.mean, want.mean),
                      rel(acc.max, want.max)});
  }
  return {worst < 1e-12, "100 datasets, max relative deviation " + sci(worst) + " (< 1e-12)"};
}

SessionBundle random_bundle(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 60);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<std::uint64_t> step(0, 5000);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 10.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SessionBundle b;
  std::uint64_t ts = step(rng) * 1000;
  const int events = count(rng);
  for (int i = 0; i < events; ++i) {
    ts += step(rng);
    switch (kind(rng)) {
      case 0:
        b.cf_events.emplace_back(SweepAngle{static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng) % 4),
                                            static_cast<std::uint8_t>(1 + byte(rng) % 2), n(rng), ts});
        break;
      case 1:
        b.cf_events.emplace_back(CfSample{ts, Vec3(n(rng), unit(rng) < 0.1 ? nan : n(rng), n(rng))});
        break;
      case 2: {
        ImuSample s{ts, {}, {}};
        for (int k = 0; k < 3; ++k) {
          s.accel[k] = static_cast<float>(n(rng));
          s.gyro[k] = unit(rng) < 0.05 ? std::numeric_limits<float>::quiet_NaN() : static_cast<float>(n(rng));
        }
        b.cf_events.emplace_back(s);
        break;
      }
      default:
        b.cf_events.emplace_back(LedMarker{ts, unit(rng) < 0.5});
    }
  }
  b.mocap.rate = 50.0 + 500.0 * unit(rng);
  b.mocap.start_offset = n(rng);
  double t = b.mocap.start_offset;
  const int samples = count(rng);
  for (int i = 0; i < samples; ++i) {
    t += 1.0 / b.mocap.rate;
    const Vec3 p = unit(rng) < 0.1 ? Vec3::Constant(nan) : Vec3(n(rng), n(rng), n(rng));
    b.mocap.samples.push_back({t, p});
  }
  const int truth = count(rng);
  double tt = 0.0;
  std::uint64_t cf = 0;
  for (int i = 0; i < truth; ++i) {
    tt += unit(rng);
    cf += step(rng);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    b.truth.push_back({tt, cf, Vec3(n(rng), n(rng), n(rng)), Vec3(n(rng), n(rng), n(rng)), q.normalized()});
  }
  return b;
}

Outcome format_round_trip() {
  std::mt19937_64 rng(909);
  TempDir tmp("io");
  int exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const SessionBundle b = random_bundle(rng);
    const fs::path dir = tmp.path() / "session";
    io::write_session(dir, b);
    const SessionBundle back = io::read_session(dir);
    const bool same_bytes = io::encode_cf_log(back.cf_events) == io::encode_cf_log(b.cf_events) &&
                            io::encode_mocap(back.mocap) == io::encode_mocap(b.mocap) &&
                            io::encode_truth(back.truth) == io::encode_truth(b.truth);
    if (io::bitwise_equal(b, back) && same_bytes) {
      ++exact;
    }
  }
  return {exact == 1000, std::to_string(exact) + " / 1000 bundles bit-exact after write/read"};
}

std::vector<std::pair<std::string, std::string>> directory_contents(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    out.emplace_back(entry.path().filename().string(), io::read_file(entry.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

int run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"lhloc"};
  for (const std::string& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  TempDir tmp("det");
  const fs::path config = tmp.path() / "flight.txt";
  io::write_file(config,
                 "scenario = flight\nduration = 20\nlh_version = 2\nseed = 77\nnoise_sigma = 0.0005\n"
                 "dropout_rate = 0.05\nclock_drift_ppm = 120\nmocap_latency = 0.015\nmocap_gaps = 5:5.5\n");
  bool identical = true;
  std::size_t files = 0;
  for (const char* estimator : {"crossing_beam", "ekf"}) {
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;
    for (int rep = 0; rep < 2; ++rep) {
      const std::string dir = (tmp.path() / (std::string(estimator) + std::to_string(rep))).string();
      int rc = run_cli({"simulate", "-c", config.string(), "-o", dir});
      rc |= run_cli({"estimate", "-s", dir, "-e", estimator});
      rc |= run_cli({"align", "-s", dir});
      rc |= run_cli({"report", "-s", dir});
      if (rc != 0) {
        return {false, std::string("pipeline failed for ") + estimator};
      }
      runs.push_back(directory_contents(dir));
    }
    identical = identical && runs[0] == runs[1];
    files += runs[0].size();
  }
  return {identical, std::to_string(files) + " files compared across two runs per estimator, " +
                         (identical ? "all byte-identical" : "differences found")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {1, "geometry round-trip", geometry_round_trip},
      {2, "jacobian vs finite differences", jacobian_check},
      {3, "crossing-beam oracle", crossing_beam_oracle},
      {4, "ekf convergence", ekf_convergence},
      {5, "alignment recovery", alignment_recovery},
      {6, "noiseless end-to-end pipeline", noiseless_pipeline},
      {7, "stationary jitter and sample rate", table_reproduction},
      {8, "metrics oracle equivalence", metrics_oracle},
      {9, "format round-trip", format_round_trip},
      {10, "determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d / %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
