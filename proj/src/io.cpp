#include "lhloc/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lhloc/errors.hpp"
#include "lhloc/format.hpp"

namespace lhloc::io {

namespace {

constexpr std::uint64_t kCanonicalNaN64 = 0x7FF8000000000000ULL;
constexpr std::uint32_t kCanonicalNaN32 = 0x7FC00000U;

constexpr std::uint16_t kCfHeaderLength = 16;
constexpr std::uint16_t kMocapHeaderLength = 32;
constexpr std::uint16_t kTruthHeaderLength = 16;

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { little(v, 2); }
  void u32(std::uint32_t v) { little(v, 4); }
  void u64(std::uint64_t v) { little(v, 8); }
  void f32(float v) { u32(std::isnan(v) ? kCanonicalNaN32 : std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::isnan(v) ? kCanonicalNaN64 : std::bit_cast<std::uint64_t>(v)); }
  void vec3(const Vec3& v) {
    f64(v.x());
    f64(v.y());
    f64(v.z());
  }
  std::string take() { return std::move(out_); }

 private:
  void little(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(little(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(little(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little(4)); }
  std::uint64_t u64() { return little(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Vec3 vec3() {
    const double x = f64();
    const double y = f64();
    const double z = f64();
    return Vec3(x, y, z);
  }

  void skip_to(std::size_t offset) {
    if (offset < pos_) {
      throw FormatError("header length shorter than fixed header", pos_);
    }
    need(offset - pos_);
    pos_ = offset;
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw FormatError("truncated file", data_.size());
    }
  }
  std::uint64_t little(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

void write_preamble(Writer& w, std::string_view magic, std::uint16_t header_length) {
  w.bytes(magic);
  w.u16(kFormatVersion);
  w.u16(header_length);
}

std::uint16_t read_preamble(Reader& r, std::string_view magic, std::uint16_t min_header) {
  if (r.bytes(4) != magic) {
    throw FormatError("bad magic, expected " + std::string(magic), 0);
  }
  const std::uint16_t version = r.u16();
  if (version != kFormatVersion) {
    throw VersionError("unsupported " + std::string(magic) + " format version " + std::to_string(version));
  }
  const std::size_t at = r.offset();
  const std::uint16_t header_length = r.u16();
  if (header_length < min_header) {
    throw FormatError("header length " + std::to_string(header_length) + " too small", at);
  }
  return header_length;
}

void expect_end(const Reader& r) {
  if (!r.at_end()) {
    throw FormatError("trailing bytes after last record", r.offset());
  }
}

std::uint64_t bits(double v) { return std::isnan(v) ? kCanonicalNaN64 : std::bit_cast<std::uint64_t>(v); }
std::uint32_t bits(float v) { return std::isnan(v) ? kCanonicalNaN32 : std::bit_cast<std::uint32_t>(v); }
bool same(double a, double b) { return bits(a) == bits(b); }
bool same(const Vec3& a, const Vec3& b) { return same(a.x(), b.x()) && same(a.y(), b.y()) && same(a.z(), b.z()); }

bool same_event(const CfEvent& a, const CfEvent& b) {
  if (a.index() != b.index()) {
    return false;
  }
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, SweepAngle>) {
          return x.timestamp_us == y.timestamp_us && x.base_station_id == y.base_station_id &&
                 x.sensor == y.sensor && x.plane == y.plane && same(x.angle, y.angle);
        } else if constexpr (std::is_same_v<T, CfSample>) {
          return x.timestamp_us == y.timestamp_us && same(x.position, y.position);
        } else if constexpr (std::is_same_v<T, ImuSample>) {
          for (std::size_t i = 0; i < 3; ++i) {
            if (bits(x.accel[i]) != bits(y.accel[i]) || bits(x.gyro[i]) != bits(y.gyro[i])) {
              return false;
            }
          }
          return x.timestamp_us == y.timestamp_us;
        } else {
          return x.timestamp_us == y.timestamp_us && x.on == y.on;
        }
      },
      a);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) {
      break;
    }
    start = tab + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("malformed integer '" + std::string(s) + "'", 0);
  }
  return v;
}

}  // namespace

std::string encode_cf_log(std::span<const CfEvent> events) {
  Writer w;
  write_preamble(w, "LHK1", kCfHeaderLength);
  w.u64(events.size());
  for (const CfEvent& e : events) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SweepAngle>) {
            w.u8(static_cast<std::uint8_t>(CfTag::Sweep));
            w.u64(x.timestamp_us);
            w.u8(x.base_station_id);
            w.u8(x.sensor);
            w.u8(x.plane);
            w.f64(x.angle);
          } else if constexpr (std::is_same_v<T, CfSample>) {
            w.u8(static_cast<std::uint8_t>(CfTag::Position));
            w.u64(x.timestamp_us);
            w.vec3(x.position);
          } else if constexpr (std::is_same_v<T, ImuSample>) {
            w.u8(static_cast<std::uint8_t>(CfTag::Imu));
            w.u64(x.timestamp_us);
            for (float v : x.accel) w.f32(v);
            for (float v : x.gyro) w.f32(v);
          } else {
            w.u8(static_cast<std::uint8_t>(CfTag::Led));
            w.u64(x.timestamp_us);
            w.u8(x.on ? 1 : 0);
          }
        },
        e);
  }
  return w.take();
}

std::vector<CfEvent> decode_cf_log(std::string_view bytes) {
  Reader r(bytes);
  const std::uint16_t header_length = read_preamble(r, "LHK1", kCfHeaderLength);
  const std::uint64_t count = r.u64();
  r.skip_to(header_length);
  std::vector<CfEvent> events;
  events.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, bytes.size() / 10)));
  std::uint64_t previous = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    const std::uint8_t tag = r.u8();
    const std::uint64_t ts = r.u64();
    if (i > 0 && ts < previous) {
      throw FormatError("records not sorted by timestamp", at);
    }
    previous = ts;
    switch (static_cast<CfTag>(tag)) {
      case CfTag::Sweep: {
        SweepAngle s;
        s.timestamp_us = ts;
        s.base_station_id = r.u8();
        s.sensor = r.u8();
        s.plane = r.u8();
        s.angle = r.f64();
        events.emplace_back(s);
        break;
      }
      case CfTag::Position:
        events.emplace_back(CfSample{ts, r.vec3()});
        break;
      case CfTag::Imu: {
        ImuSample imu;
        imu.timestamp_us = ts;
        for (float& v : imu.accel) v = r.f32();
        for (float& v : imu.gyro) v = r.f32();
        events.emplace_back(imu);
        break;
      }
      case CfTag::Led: {
        const std::uint8_t on = r.u8();
        events.emplace_back(LedMarker{ts, on != 0});
        break;
      }
      default:
        throw FormatError("unknown record tag " + std::to_string(tag), at);
    }
  }
  expect_end(r);
  return events;
}

std::string encode_mocap(const MocapStream& mocap) {
  Writer w;
  write_preamble(w, "LHM1", kMocapHeaderLength);
  w.f64(mocap.rate);
  w.f64(mocap.start_offset);
  w.u64(mocap.samples.size());
  for (const MocapSample& s : mocap.samples) {
    w.f64(s.t);
    w.vec3(s.position);
  }
  return w.take();
}

MocapStream decode_mocap(std::string_view bytes) {
  Reader r(bytes);
  const std::uint16_t header_length = read_preamble(r, "LHM1", kMocapHeaderLength);
  MocapStream m;
  m.rate = r.f64();
  m.start_offset = r.f64();
  const std::uint64_t count = r.u64();
  r.skip_to(header_length);
  m.samples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, bytes.size() / 32)));
  for (std::uint64_t i = 0; i < count; ++i) {
    MocapSample s;
    s.t = r.f64();
    s.position = r.vec3();
    m.samples.push_back(s);
  }
  expect_end(r);
  return m;
}

std::string encode_truth(std::span<const TruthSample> truth) {
  Writer w;
  write_preamble(w, "LHT1", kTruthHeaderLength);
  w.u64(truth.size());
  for (const TruthSample& s : truth) {
    w.f64(s.t);
    w.u64(s.cf_timestamp_us);
    w.vec3(s.position);
    w.vec3(s.velocity);
    w.f64(s.orientation.w());
    w.f64(s.orientation.x());
    w.f64(s.orientation.y());
    w.f64(s.orientation.z());
  }
  return w.take();
}

std::vector<TruthSample> decode_truth(std::string_view bytes) {
  Reader r(bytes);
  const std::uint16_t header_length = read_preamble(r, "LHT1", kTruthHeaderLength);
  const std::uint64_t count = r.u64();
  r.skip_to(header_length);
  std::vector<TruthSample> out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, bytes.size() / 96)));
  for (std::uint64_t i = 0; i < count; ++i) {
    TruthSample s;
    s.t = r.f64();
    s.cf_timestamp_us = r.u64();
    s.position = r.vec3();
    s.velocity = r.vec3();
    const double qw = r.f64();
    const double qx = r.f64();
    const double qy = r.f64();
    const double qz = r.f64();
    s.orientation = Eigen::Quaterniond(qw, qx, qy, qz);
    out.push_back(s);
  }
  expect_end(r);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

void write_session(const std::filesystem::path& dir, const SessionBundle& bundle) {
  std::filesystem::create_directories(dir);
  write_file(dir / kCfLogFile, encode_cf_log(bundle.cf_events));
  write_file(dir / kMocapFile, encode_mocap(bundle.mocap));
  write_file(dir / kTruthFile, encode_truth(bundle.truth));
}

SessionBundle read_session(const std::filesystem::path& dir) {
  SessionBundle b;
  b.cf_events = decode_cf_log(read_file(dir / kCfLogFile));
  b.mocap = decode_mocap(read_file(dir / kMocapFile));
  if (std::filesystem::exists(dir / kTruthFile)) {
    b.truth = decode_truth(read_file(dir / kTruthFile));
  }
  return b;
}

bool bitwise_equal(const SessionBundle& a, const SessionBundle& b) {
  if (a.cf_events.size() != b.cf_events.size() || a.mocap.samples.size() != b.mocap.samples.size() ||
      a.truth.size() != b.truth.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.cf_events.size(); ++i) {
    if (!same_event(a.cf_events[i], b.cf_events[i])) {
      return false;
    }
  }
  if (!same(a.mocap.rate, b.mocap.rate) || !same(a.mocap.start_offset, b.mocap.start_offset)) {
    return false;
  }
  for (std::size_t i = 0; i < a.mocap.samples.size(); ++i) {
    if (!same(a.mocap.samples[i].t, b.mocap.samples[i].t) ||
        !same(a.mocap.samples[i].position, b.mocap.samples[i].position)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.truth.size(); ++i) {
    const TruthSample& x = a.truth[i];
    const TruthSample& y = b.truth[i];
    if (!same(x.t, y.t) || x.cf_timestamp_us != y.cf_timestamp_us || !same(x.position, y.position) ||
        !same(x.velocity, y.velocity) || !same(x.orientation.w(), y.orientation.w()) ||
        !same(x.orientation.vec(), y.orientation.vec())) {
      return false;
    }
  }
  return true;
}

std::string format_aligned(const AlignedDataset& d) {
  std::ostringstream out;
  const Mat3& r = d.transform.rotation;
  out << "# rotation";
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out << '\t' << format_double(r(i, j));
    }
  }
  out << "\n# translation";
  for (int i = 0; i < 3; ++i) {
    out << '\t' << format_double(d.transform.translation[i]);
  }
  out << "\n# offsets\t" << format_double(d.offset_start) << '\t' << format_double(d.offset_end);
  out << "\n# residual\t" << format_double(d.residual) << '\n';
  out << "t_hat\tcf_timestamp_us\tcf_x\tcf_y\tcf_z\tmc_x\tmc_y\tmc_z\n";
  for (const AlignedRecord& rec : d.records) {
    out << format_double(rec.t_hat) << '\t' << rec.cf_timestamp_us;
    for (int i = 0; i < 3; ++i) out << '\t' << format_double(rec.cf[i]);
    for (int i = 0; i < 3; ++i) out << '\t' << format_double(rec.mc[i]);
    out << '\n';
  }
  return out.str();
}

AlignedDataset parse_aligned(std::string_view text) {
  AlignedDataset d;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      if (line.front() == '#') {
        const auto f = split_fields(line);
        if (f[0] == "# rotation" && f.size() == 10) {
          for (int i = 0; i < 9; ++i) d.transform.rotation(i / 3, i % 3) = parse_double(f[static_cast<std::size_t>(i + 1)]);
        } else if (f[0] == "# translation" && f.size() == 4) {
          for (int i = 0; i < 3; ++i) d.transform.translation[i] = parse_double(f[static_cast<std::size_t>(i + 1)]);
        } else if (f[0] == "# offsets" && f.size() == 3) {
          d.offset_start = parse_double(f[1]);
          d.offset_end = parse_double(f[2]);
        } else if (f[0] == "# residual" && f.size() == 2) {
          d.residual = parse_double(f[1]);
        }
        continue;
      }
      if (!header_seen) {
        header_seen = true;
        continue;
      }
      const auto f = split_fields(line);
      if (f.size() != 8) {
        throw FormatError("expected 8 columns", 0);
      }
      AlignedRecord r;
      r.t_hat = parse_double(f[0]);
      r.cf_timestamp_us = parse_u64(f[1]);
      for (int i = 0; i < 3; ++i) {
        r.cf[i] = parse_double(f[static_cast<std::size_t>(2 + i)]);
        r.mc[i] = parse_double(f[static_cast<std::size_t>(5 + i)]);
      }
      d.records.push_back(r);
    } catch (const FormatError& e) {
      throw Error("aligned dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return d;
}

std::string format_epoch_quality(std::span<const EpochQuality> epochs) {
  std::ostringstream out;
  out << "timestamp_us\tcomplete\tsensors_used\tmax_delta\n";
  for (const EpochQuality& e : epochs) {
    out << e.timestamp_us << '\t' << (e.complete ? 1 : 0) << '\t' << e.sensors_used << '\t'
        << format_double(e.max_delta) << '\n';
  }
  return out.str();
}

std::vector<EpochQuality> parse_epoch_quality(std::string_view text) {
  std::vector<EpochQuality> out;
  const auto lines = lines_of(text);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      continue;
    }
    const auto f = split_fields(lines[i]);
    if (f.size() != 4) {
      throw Error("epoch sidecar line " + std::to_string(i + 1) + ": expected 4 columns");
    }
    EpochQuality e;
    e.timestamp_us = parse_u64(f[0]);
    e.complete = parse_u64(f[1]) != 0;
    e.sensors_used = static_cast<int>(parse_u64(f[2]));
    e.max_delta = parse_double(f[3]);
    out.push_back(e);
  }
  return out;
}

}  // namespace lhloc::io
