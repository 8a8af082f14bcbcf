#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lhloc/alignment.hpp"
#include "lhloc/errors.hpp"
#include "lhloc/metrics.hpp"
#include "lhloc/pipeline.hpp"

namespace lhloc::cli {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr const char* kConfigFile = "config.txt";
inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kEpochFile = "epochs.tsv";
inline constexpr const char* kAlignedFile = "aligned.tsv";
inline constexpr const char* kReportTable = "report.txt";
inline constexpr const char* kReportColumns = "report.tsv";
inline constexpr const char* kErrorColumns = "errors.tsv";

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3 };

/// An upstream pipeline stage has not produced its artifact yet.
class MissingStage : public Error {
 public:
  MissingStage(const std::string& stage, const std::string& detail)
      : Error("missing stage '" + stage + "': " + detail), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Session directory metadata (key = value lines, sorted by key).
using Manifest = std::map<std::string, std::string>;
Manifest read_manifest(const std::filesystem::path& session);
void write_manifest(const std::filesystem::path& session, const Manifest& manifest);

void simulate(const std::filesystem::path& config, const std::filesystem::path& out);
void estimate(const std::filesystem::path& session, Estimator estimator, const std::filesystem::path& out,
              const EstimateOptions& options = {});
AlignedDataset align(const std::filesystem::path& session, const std::filesystem::path& out,
                     const OffsetGrid& grid = {});
MetricsReport report(const std::filesystem::path& session, const std::filesystem::path& out);

/// simulate -> estimate -> align -> report for each config, each in its own
/// subdirectory of `out_root`, running up to `jobs` sessions concurrently.
void batch(const std::vector<std::filesystem::path>& configs, const std::filesystem::path& out_root,
           Estimator estimator, const EstimateOptions& options, const OffsetGrid& grid, int jobs);

/// Command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lhloc::cli
