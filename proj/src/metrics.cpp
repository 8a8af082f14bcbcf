#include "lhloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "lhloc/errors.hpp"
#include "lhloc/format.hpp"

namespace lhloc {

std::string to_string(Estimator estimator) {
  return estimator == Estimator::CrossingBeam ? "crossing_beam" : "ekf";
}

Estimator parse_estimator(const std::string& name) {
  if (name == "crossing_beam" || name == "cb") return Estimator::CrossingBeam;
  if (name == "ekf") return Estimator::Ekf;
  throw ConfigError("unknown estimator '" + name + "'");
}

FilterPolicy FilterPolicy::for_estimator(Estimator estimator) {
  FilterPolicy p;
  p.estimator = estimator;
  return p;
}

FilterResult apply_filters(const AlignedDataset& dataset, const FilterPolicy& policy, const FilterContext& context) {
  if (!(policy.delta_max > 0.0)) {
    throw std::invalid_argument("delta_max must be > 0");
  }
  FilterResult out;
  out.dataset = dataset;
  out.dataset.records.clear();
  out.counts.total = dataset.records.size();

  const auto window_us = static_cast<std::uint64_t>(std::llround(policy.visibility_window * 1e6));
  auto seen_recently = [&](const std::vector<std::uint64_t>& sweeps, std::uint64_t t) {
    const std::uint64_t from = t >= window_us ? t - window_us : 0;
    const auto it = std::lower_bound(sweeps.begin(), sweeps.end(), from);
    return it != sweeps.end() && *it <= t;
  };

  for (const AlignedRecord& r : dataset.records) {
    if (policy.drop_nan_mocap && !r.has_ground_truth()) {
      ++out.counts.no_ground_truth;
      continue;
    }
    if (policy.estimator == Estimator::CrossingBeam) {
      const auto it = std::lower_bound(context.epochs.begin(), context.epochs.end(), r.cf_timestamp_us,
                                       [](const EpochQuality& e, std::uint64_t t) { return e.timestamp_us < t; });
      const bool found = it != context.epochs.end() && it->timestamp_us == r.cf_timestamp_us;
      if (policy.require_full_epoch && (!found || !it->complete)) {
        ++out.counts.incomplete_epoch;
        continue;
      }
      if (found && it->max_delta > policy.delta_max) {
        ++out.counts.delta_exceeded;
        continue;
      }
    } else if (policy.ekf_min_visibility) {
      const bool visible =
          !context.station_sweeps.empty() &&
          std::all_of(context.station_sweeps.begin(), context.station_sweeps.end(),
                      [&](const auto& kv) { return seen_recently(kv.second, r.cf_timestamp_us); });
      if (!visible) {
        ++out.counts.insufficient_visibility;
        continue;
      }
    }
    out.dataset.records.push_back(r);
  }
  out.counts.used = out.dataset.records.size();
  return out;
}

double precision(std::span<const AlignedRecord> records) {
  if (records.size() < 2) {
    throw TooFewSamples("precision needs at least two records");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    sum += (records[i].cf - records[i + 1].cf).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(records.size()));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw EmptyDataset("quantile of empty data");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats b;
  b.median = quantile_sorted(sorted, 0.5);
  b.q1 = quantile_sorted(sorted, 0.25);
  b.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = *std::find_if(sorted.begin(), sorted.end(), [&](double v) { return v >= lo_fence; });
  b.whisker_high = *std::find_if(sorted.rbegin(), sorted.rend(), [&](double v) { return v <= hi_fence; });
  for (double v : sorted) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
    }
  }
  return b;
}

AccuracySummary accuracy(std::span<const AlignedRecord> records) {
  AccuracySummary s;
  double sum = 0.0;
  for (const AlignedRecord& r : records) {
    if (!r.has_ground_truth()) {
      continue;
    }
    const double e = (r.cf - r.mc).norm();
    s.errors.push_back(e);
    sum += e;
    s.max = std::max(s.max, e);
  }
  if (s.errors.empty()) {
    throw EmptyDataset("no records with ground truth");
  }
  s.mean = sum / static_cast<double>(s.errors.size());
  s.box = box_stats(s.errors);
  return s;
}

FrequencyStats sample_frequency(std::span<const double> timestamps) {
  if (timestamps.size() < 3) {
    throw TooFewSamples("sample frequency needs at least three timestamps");
  }
  std::vector<double> rates;
  rates.reserve(timestamps.size() - 1);
  for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) {
    const double gap = timestamps[i + 1] - timestamps[i];
    if (gap > 0.0) {
      rates.push_back(1.0 / gap);
    }
  }
  if (rates.size() < 2) {
    throw TooFewSamples("sample frequency needs at least two positive gaps");
  }
  FrequencyStats f;
  for (double r : rates) {
    f.mean += r;
  }
  f.mean /= static_cast<double>(rates.size());
  double var = 0.0;
  for (double r : rates) {
    var += (r - f.mean) * (r - f.mean);
  }
  f.stddev = std::sqrt(var / static_cast<double>(rates.size()));
  return f;
}

MetricsReport make_report(const FilterResult& filtered, const MocapStream& mocap) {
  const auto& records = filtered.dataset.records;
  if (records.empty()) {
    throw EmptyDataset("empty after filtering");
  }
  MetricsReport report;
  report.counts = filtered.counts;
  report.accuracy = accuracy(records);
  report.precision = records.size() >= 2 ? precision(records) : 0.0;

  std::vector<double> times;
  times.reserve(records.size());
  for (const AlignedRecord& r : records) {
    times.push_back(r.t_hat);
  }
  if (times.size() >= 3) {
    report.frequency = sample_frequency(times);
  }
  std::vector<double> mocap_times;
  for (const MocapSample& m : mocap.samples) {
    if (m.position.allFinite()) {
      mocap_times.push_back(m.t);
    }
  }
  if (mocap_times.size() >= 3) {
    report.mocap_frequency = sample_frequency(mocap_times);
  }
  return report;
}

std::string format_report_table(const MetricsReport& r) {
  std::ostringstream out;
  out << std::fixed;
  out << "scenario        " << r.scenario << "\n";
  out << "estimator       " << r.estimator << "\n";
  out << "records         total " << r.counts.total << ", used " << r.counts.used << ", filtered "
      << r.counts.filtered() << "\n";
  out << "  removed       no ground truth " << r.counts.no_ground_truth << ", incomplete epoch "
      << r.counts.incomplete_epoch << ", delta " << r.counts.delta_exceeded << ", visibility "
      << r.counts.insufficient_visibility << "\n";
  out << std::setprecision(2);
  out << "freq [Hz]       " << r.frequency.mean << " +- " << r.frequency.stddev << "\n";
  out << "mocap [Hz]      " << r.mocap_frequency.mean << " +- " << r.mocap_frequency.stddev << "\n";
  out << std::setprecision(3);
  out << "jitter [mm]     " << r.precision * 1e3 << "\n";
  const auto& a = r.accuracy;
  out << "accuracy [mm]   mean " << a.mean * 1e3 << ", median " << a.box.median * 1e3 << ", max " << a.max * 1e3
      << "\n";
  out << "  box [mm]      q1 " << a.box.q1 * 1e3 << ", q3 " << a.box.q3 * 1e3 << ", whiskers "
      << a.box.whisker_low * 1e3 << " .. " << a.box.whisker_high * 1e3 << ", outliers " << a.box.outliers.size()
      << "\n";
  return out.str();
}

std::string format_report_columns(const MetricsReport& r) {
  std::ostringstream out;
  auto row = [&](const std::string& key, const std::string& value) { out << key << '\t' << value << '\n'; };
  row("metric", "value");
  row("scenario", r.scenario);
  row("estimator", r.estimator);
  row("records_total", std::to_string(r.counts.total));
  row("records_used", std::to_string(r.counts.used));
  row("records_filtered", std::to_string(r.counts.filtered()));
  row("removed_no_ground_truth", std::to_string(r.counts.no_ground_truth));
  row("removed_incomplete_epoch", std::to_string(r.counts.incomplete_epoch));
  row("removed_delta", std::to_string(r.counts.delta_exceeded));
  row("removed_visibility", std::to_string(r.counts.insufficient_visibility));
  row("freq_mean_hz", format_double(r.frequency.mean));
  row("freq_std_hz", format_double(r.frequency.stddev));
  row("mocap_freq_mean_hz", format_double(r.mocap_frequency.mean));
  row("mocap_freq_std_hz", format_double(r.mocap_frequency.stddev));
  row("precision_m", format_double(r.precision));
  row("accuracy_mean_m", format_double(r.accuracy.mean));
  row("accuracy_max_m", format_double(r.accuracy.max));
  row("accuracy_median_m", format_double(r.accuracy.box.median));
  row("accuracy_q1_m", format_double(r.accuracy.box.q1));
  row("accuracy_q3_m", format_double(r.accuracy.box.q3));
  row("accuracy_whisker_low_m", format_double(r.accuracy.box.whisker_low));
  row("accuracy_whisker_high_m", format_double(r.accuracy.box.whisker_high));
  row("accuracy_outliers", std::to_string(r.accuracy.box.outliers.size()));
  for (double v : r.accuracy.box.outliers) {
    row("outlier_m", format_double(v));
  }
  return out.str();
}

std::string format_error_columns(const AlignedDataset& dataset, const AccuracySummary& accuracy) {
  std::ostringstream out;
  out << "t_hat\tcf_timestamp_us\terror_m\n";
  std::size_t k = 0;
  for (const AlignedRecord& r : dataset.records) {
    if (!r.has_ground_truth()) {
      continue;
    }
    out << format_double(r.t_hat) << '\t' << r.cf_timestamp_us << '\t' << format_double(accuracy.errors.at(k++))
        << '\n';
  }
  return out.str();
}

}  // namespace lhloc
