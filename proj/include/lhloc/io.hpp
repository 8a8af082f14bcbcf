#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lhloc/alignment.hpp"
#include "lhloc/metrics.hpp"
#include "lhloc/session.hpp"

namespace lhloc::io {

// Binary layouts are described in docs/FORMAT.md. All integers and floats are
// little-endian; NaNs are written as the canonical quiet NaN.

inline constexpr std::uint16_t kFormatVersion = 1;

enum class CfTag : std::uint8_t { Sweep = 0, Position = 1, Imu = 2, Led = 3 };

std::string encode_cf_log(std::span<const CfEvent> events);
std::vector<CfEvent> decode_cf_log(std::string_view bytes);

std::string encode_mocap(const MocapStream& mocap);
MocapStream decode_mocap(std::string_view bytes);

std::string encode_truth(std::span<const TruthSample> truth);
std::vector<TruthSample> decode_truth(std::string_view bytes);

inline constexpr const char* kCfLogFile = "cf_log.lhk";
inline constexpr const char* kMocapFile = "mocap.lhm";
inline constexpr const char* kTruthFile = "truth.lht";

/// Writes the three session files into `dir` (created if needed).
void write_session(const std::filesystem::path& dir, const SessionBundle& bundle);
/// Reads a session directory. A missing truth file yields an empty truth stream.
SessionBundle read_session(const std::filesystem::path& dir);

/// Field-by-field bit comparison (NaNs compared by canonical pattern).
bool bitwise_equal(const SessionBundle& a, const SessionBundle& b);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Columnar text: '#' metadata lines (transform, offsets, residual) followed
/// by a header row and one row per record.
std::string format_aligned(const AlignedDataset& dataset);
AlignedDataset parse_aligned(std::string_view text);

/// Crossing-beam per-epoch sidecar (tab separated).
std::string format_epoch_quality(std::span<const EpochQuality> epochs);
std::vector<EpochQuality> parse_epoch_quality(std::string_view text);

}  // namespace lhloc::io
