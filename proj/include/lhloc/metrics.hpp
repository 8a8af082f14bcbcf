#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lhloc/alignment.hpp"

namespace lhloc {

enum class Estimator { CrossingBeam, Ekf };

std::string to_string(Estimator estimator);
/// Accepts "crossing_beam" / "cb" and "ekf"; throws ConfigError otherwise.
Estimator parse_estimator(const std::string& name);

/// Per-epoch quality reported by the crossing-beam estimator.
struct EpochQuality {
  std::uint64_t timestamp_us = 0;
  bool complete = false;
  int sensors_used = 0;
  double max_delta = 0.0;

  friend bool operator==(const EpochQuality&, const EpochQuality&) = default;
};

/// Raw information the filters need besides the aligned records.
struct FilterContext {
  std::vector<EpochQuality> epochs;  // sorted by timestamp
  std::map<int, std::vector<std::uint64_t>> station_sweeps;  // sorted sweep timestamps per station
};

struct FilterPolicy {
  Estimator estimator = Estimator::CrossingBeam;
  bool require_full_epoch = true;  // crossing beam
  double delta_max = 0.1;          // crossing beam, compared against the max per-sensor delta
  bool ekf_min_visibility = true;  // ekf
  double visibility_window = 0.1;  // seconds
  bool drop_nan_mocap = true;

  static FilterPolicy for_estimator(Estimator estimator);
};

struct FilterCounts {
  std::size_t total = 0;
  std::size_t no_ground_truth = 0;
  std::size_t incomplete_epoch = 0;
  std::size_t delta_exceeded = 0;
  std::size_t insufficient_visibility = 0;
  std::size_t used = 0;

  std::size_t filtered() const { return total - used; }
};

struct FilterResult {
  AlignedDataset dataset;
  FilterCounts counts;
};

/// Removes records per policy. Rules are checked in the order listed in
/// FilterCounts and each removed record is attributed to the first rule it fails.
FilterResult apply_filters(const AlignedDataset& dataset, const FilterPolicy& policy, const FilterContext& context);

/// RMS of consecutive position differences, normalized by the record count.
/// Throws TooFewSamples for fewer than two records.
double precision(std::span<const AlignedRecord> records);

struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // smallest value >= q1 - 1.5 IQR
  double whisker_high = 0.0;  // largest value <= q3 + 1.5 IQR
  std::vector<double> outliers;
};

/// Linear-interpolated quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);
BoxStats box_stats(std::span<const double> values);

struct AccuracySummary {
  std::vector<double> errors;  // per record
  double mean = 0.0;
  double max = 0.0;
  BoxStats box;
};

/// Euclidean error per record. Throws EmptyDataset when no record has ground truth.
AccuracySummary accuracy(std::span<const AlignedRecord> records);

struct FrequencyStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Instantaneous rates 1/(t[i+1]-t[i]) over consecutive events (seconds).
/// Throws TooFewSamples for fewer than three timestamps.
FrequencyStats sample_frequency(std::span<const double> timestamps);

struct MetricsReport {
  std::string scenario;
  std::string estimator;
  double precision = 0.0;
  AccuracySummary accuracy;
  FrequencyStats frequency;
  FrequencyStats mocap_frequency;
  FilterCounts counts;
};

/// Builds the report from filtered records. Throws EmptyDataset when nothing survived filtering.
MetricsReport make_report(const FilterResult& filtered, const MocapStream& mocap);

/// Human-readable summary table.
std::string format_report_table(const MetricsReport& report);
/// Tab-separated metric/value rows for plotting.
std::string format_report_columns(const MetricsReport& report);
/// Tab-separated per-record errors.
std::string format_error_columns(const AlignedDataset& dataset, const AccuracySummary& accuracy);

}  // namespace lhloc
