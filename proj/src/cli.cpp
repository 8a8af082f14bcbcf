#include "lhloc/cli.hpp"

#include <algorithm>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "lhloc/format.hpp"
#include "lhloc/io.hpp"
#include "lhloc/simulator.hpp"

namespace fs = std::filesystem;

namespace lhloc::cli {

namespace {

fs::path stage_dir(const fs::path& session, const fs::path& out) {
  if (!fs::is_directory(session)) {
    throw Error("session directory " + session.string() + " does not exist");
  }
  if (out.empty()) {
    return session;
  }
  fs::create_directories(out);
  if (!fs::equivalent(session, out)) {
    for (const auto& entry : fs::directory_iterator(session)) {
      if (entry.is_regular_file()) {
        fs::copy_file(entry.path(), out / entry.path().filename(), fs::copy_options::overwrite_existing);
      }
    }
  }
  return out;
}

void remove_outputs(const fs::path& dir, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    fs::remove(dir / name);
  }
}

SessionBundle load_session(const fs::path& dir) {
  if (!fs::exists(dir / io::kCfLogFile) || !fs::exists(dir / io::kMocapFile)) {
    throw MissingStage("simulate", "no session files in " + dir.string());
  }
  return io::read_session(dir);
}

ScenarioConfig session_config(const fs::path& dir) {
  if (!fs::exists(dir / kConfigFile)) {
    throw MissingStage("simulate", "no " + std::string(kConfigFile) + " in " + dir.string());
  }
  return load_scenario_config(dir / kConfigFile);
}

}  // namespace

Manifest read_manifest(const fs::path& session) {
  Manifest m;
  if (!fs::exists(session / kManifestFile)) {
    return m;
  }
  std::istringstream in(io::read_file(session / kManifestFile));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) {
      m[line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  return m;
}

void write_manifest(const fs::path& session, const Manifest& manifest) {
  std::ostringstream out;
  for (const auto& [key, value] : manifest) {
    out << key << " = " << value << '\n';
  }
  io::write_file(session / kManifestFile, out.str());
}

void simulate(const fs::path& config_path, const fs::path& out) {
  const std::string text = io::read_file(config_path);
  const ScenarioConfig config = parse_scenario_config(text);
  const Trajectory trajectory = generate_trajectory(config);
  const SessionBundle bundle = synthesize_session(config, trajectory);

  fs::create_directories(out);
  remove_outputs(out, {kEpochFile, kAlignedFile, kReportTable, kReportColumns, kErrorColumns});
  io::write_session(out, bundle);
  io::write_file(out / kConfigFile, text);
  Manifest m;
  m["tool_version"] = kToolVersion;
  m["config"] = kConfigFile;
  m["seed"] = std::to_string(config.rng_seed);
  m["scenario"] = std::string(to_string(config.scenario));
  m["lh_version"] = config.lh_version == LhVersion::LH1 ? "LH1" : "LH2";
  m["cf_log"] = io::kCfLogFile;
  m["mocap"] = io::kMocapFile;
  m["truth"] = io::kTruthFile;
  write_manifest(out, m);
}

void estimate(const fs::path& session, Estimator estimator, const fs::path& out, const EstimateOptions& options) {
  const fs::path dir = stage_dir(session, out);
  const ScenarioConfig config = session_config(dir);
  SessionBundle bundle = load_session(dir);
  if (std::none_of(bundle.cf_events.begin(), bundle.cf_events.end(),
                   [](const CfEvent& e) { return std::holds_alternative<SweepAngle>(e); })) {
    throw Error("session has no sweep events to estimate from");
  }

  EstimateRun run = estimator == Estimator::CrossingBeam
                        ? run_crossing_beam(config.stations, bundle, options)
                        : run_ekf(config.stations, initial_position(config.stations, bundle, config.area_center, options),
                                  bundle, options);
  replace_estimates(bundle, run.estimates);
  io::write_file(dir / io::kCfLogFile, io::encode_cf_log(bundle.cf_events));
  remove_outputs(dir, {kEpochFile, kAlignedFile, kReportTable, kReportColumns, kErrorColumns});
  if (estimator == Estimator::CrossingBeam) {
    io::write_file(dir / kEpochFile, io::format_epoch_quality(run.epochs));
  }

  Manifest m = read_manifest(dir);
  m["estimator"] = to_string(estimator);
  m["estimates"] = std::to_string(run.estimates.size());
  m.erase("aligned");
  m.erase("report");
  write_manifest(dir, m);
}

AlignedDataset align(const fs::path& session, const fs::path& out, const OffsetGrid& grid) {
  const fs::path dir = stage_dir(session, out);
  const SessionBundle bundle = load_session(dir);
  if (std::none_of(bundle.cf_events.begin(), bundle.cf_events.end(),
                   [](const CfEvent& e) { return std::holds_alternative<CfSample>(e); })) {
    throw MissingStage("estimate", "session has no position estimates");
  }
  AlignedDataset dataset = lhloc::align(bundle, grid);
  io::write_file(dir / kAlignedFile, io::format_aligned(dataset));
  remove_outputs(dir, {kReportTable, kReportColumns, kErrorColumns});

  Manifest m = read_manifest(dir);
  m["aligned"] = kAlignedFile;
  m.erase("report");
  write_manifest(dir, m);
  return dataset;
}

MetricsReport report(const fs::path& session, const fs::path& out) {
  const fs::path dir = stage_dir(session, out);
  Manifest m = read_manifest(dir);
  if (!m.contains("estimator")) {
    throw MissingStage("estimate", "manifest names no estimator");
  }
  if (!fs::exists(dir / kAlignedFile)) {
    throw MissingStage("align", "no " + std::string(kAlignedFile) + " in " + dir.string());
  }
  const Estimator estimator = parse_estimator(m.at("estimator"));
  const ScenarioConfig config = session_config(dir);
  const SessionBundle bundle = load_session(dir);
  const AlignedDataset dataset = io::parse_aligned(io::read_file(dir / kAlignedFile));

  std::vector<EpochQuality> epochs;
  if (estimator == Estimator::CrossingBeam) {
    if (!fs::exists(dir / kEpochFile)) {
      throw MissingStage("estimate", "no " + std::string(kEpochFile) + " in " + dir.string());
    }
    epochs = io::parse_epoch_quality(io::read_file(dir / kEpochFile));
  }
  const FilterContext context = make_filter_context(config.stations, bundle, std::move(epochs));
  const FilterResult filtered = apply_filters(dataset, FilterPolicy::for_estimator(estimator), context);
  MetricsReport r = make_report(filtered, bundle.mocap);
  r.scenario = std::string(to_string(config.scenario));
  r.estimator = to_string(estimator);

  io::write_file(dir / kReportTable, format_report_table(r));
  io::write_file(dir / kReportColumns, format_report_columns(r));
  io::write_file(dir / kErrorColumns, format_error_columns(filtered.dataset, r.accuracy));
  m["report"] = kReportColumns;
  write_manifest(dir, m);
  return r;
}

void batch(const std::vector<fs::path>& configs, const fs::path& out_root, Estimator estimator,
           const EstimateOptions& options, const OffsetGrid& grid, int jobs) {
  std::vector<fs::path> dirs;
  std::set<std::string> used;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::string name = configs[i].stem().string();
    if (used.contains(name)) {
      name += "_" + std::to_string(i);
    }
    used.insert(name);
    dirs.push_back(out_root / name);
  }
  auto run_one = [&](std::size_t i) {
    simulate(configs[i], dirs[i]);
    estimate(dirs[i], estimator, {}, options);
    align(dirs[i], {}, grid);
    report(dirs[i], {});
  };

  const auto width = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::string> failures;
  for (std::size_t start = 0; start < configs.size(); start += width) {
    std::vector<std::future<void>> running;
    for (std::size_t i = start; i < std::min(configs.size(), start + width); ++i) {
      running.push_back(std::async(std::launch::async, run_one, i));
    }
    for (std::size_t k = 0; k < running.size(); ++k) {
      try {
        running[k].get();
      } catch (const std::exception& e) {
        failures.push_back(configs[start + k].string() + ": " + e.what());
      }
    }
  }
  if (!failures.empty()) {
    std::string message = "batch failed for " + std::to_string(failures.size()) + " session(s)";
    for (const std::string& f : failures) {
      message += "\n  " + f;
    }
    throw Error(message);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lighthouse positioning toolkit: simulate, estimate, align, report"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path;
  std::string session_path;
  std::string out_path;
  std::string estimator_name = "crossing_beam";
  std::vector<std::string> batch_configs;
  int jobs = 1;
  EstimateOptions est;
  double epoch_window_ms = 10.0;
  OffsetGrid grid;
  double range_ms = 100.0;
  double coarse_ms = 5.0;
  double fine_ms = 1.0;
  bool no_imu = false;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic session from a scenario config");
  sim->add_option("-c,--config", config_path, "Scenario config (key = value)")->required();
  sim->add_option("-o,--out", out_path, "Output session directory")->required();

  auto add_estimate_flags = [&](CLI::App* cmd) {
    cmd->add_option("-e,--estimator", estimator_name, "crossing_beam | ekf")
        ->check(CLI::IsMember({"crossing_beam", "cb", "ekf"}));
    cmd->add_option("--epoch-window-ms", epoch_window_ms, "Sweep grouping window for crossing beam")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--delta-gate", est.delta_gate, "Per-sensor delta above which a sensor is not averaged")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--ekf-sigma", est.ekf.sigma_angle, "EKF sweep angle noise [rad]")->check(CLI::PositiveNumber);
    cmd->add_option("--ekf-process-noise", est.ekf.process_noise, "EKF velocity random walk [m^2/s^3]")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--ekf-gate", est.ekf.gate_sigmas, "EKF innovation gate [sigmas]")->check(CLI::PositiveNumber);
    cmd->add_option("--ekf-output-rate", est.ekf_output_rate, "EKF estimate rate [Hz]")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-imu", no_imu, "Ignore IMU records in the EKF");
  };
  auto add_grid_flags = [&](CLI::App* cmd) {
    cmd->add_option("--range-ms", range_ms, "Offset search half-range")->check(CLI::PositiveNumber);
    cmd->add_option("--coarse-ms", coarse_ms, "Coarse offset step")->check(CLI::PositiveNumber);
    cmd->add_option("--fine-ms", fine_ms, "Fine offset step")->check(CLI::PositiveNumber);
  };

  auto* estc = app.add_subcommand("estimate", "Compute onboard position estimates from sweep angles");
  estc->add_option("-s,--session", session_path, "Session directory")->required();
  estc->add_option("-o,--out", out_path, "Output directory (default: in place)");
  add_estimate_flags(estc);

  auto* alc = app.add_subcommand("align", "Spatiotemporal alignment against ground truth");
  alc->add_option("-s,--session", session_path, "Session directory")->required();
  alc->add_option("-o,--out", out_path, "Output directory (default: in place)");
  add_grid_flags(alc);

  auto* rep = app.add_subcommand("report", "Filter the aligned data and compute precision / accuracy");
  rep->add_option("-s,--session", session_path, "Session directory")->required();
  rep->add_option("-o,--out", out_path, "Output directory (default: in place)");

  auto* bat = app.add_subcommand("batch", "Run the whole pipeline for several configs");
  bat->add_option("-c,--config", batch_configs, "Scenario configs")->required();
  bat->add_option("-o,--out", out_path, "Root output directory")->required();
  bat->add_option("-j,--jobs", jobs, "Sessions processed concurrently")->check(CLI::PositiveNumber);
  add_estimate_flags(bat);
  add_grid_flags(bat);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  est.epoch_window_us = static_cast<std::uint64_t>(std::llround(epoch_window_ms * 1e3));
  est.ekf_use_imu = !no_imu;
  grid.range = range_ms * 1e-3;
  grid.coarse_step = coarse_ms * 1e-3;
  grid.fine_step = fine_ms * 1e-3;

  try {
    if (sim->parsed()) {
      simulate(config_path, out_path);
    } else if (estc->parsed()) {
      estimate(session_path, parse_estimator(estimator_name), out_path, est);
    } else if (alc->parsed()) {
      const AlignedDataset d = align(session_path, out_path, grid);
      out << "offsets [ms]  " << format_double(d.offset_start * 1e3) << " " << format_double(d.offset_end * 1e3)
          << "\nresidual [m]  " << format_double(d.residual) << '\n';
    } else if (rep->parsed()) {
      out << format_report_table(report(session_path, out_path));
    } else if (bat->parsed()) {
      std::vector<fs::path> paths(batch_configs.begin(), batch_configs.end());
      batch(paths, out_path, parse_estimator(estimator_name), est, grid, jobs);
    }
  } catch (const EmptyDataset& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace lhloc::cli
