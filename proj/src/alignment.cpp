#include "lhloc/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <Eigen/SVD>

#include "lhloc/errors.hpp"

namespace lhloc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Below this RMS spread (m) of the estimates the rotation is unobservable
// (e.g. a stationary deck) and only a translation is fitted.
constexpr double kMinRotationSpread = 0.05;

// Prefix counts over the mocap stream for O(1) validity checks of a time span.
class MocapIndex {
 public:
  explicit MocapIndex(const MocapStream& mocap) : mocap_(mocap) {
    const auto& s = mocap.samples;
    nan_prefix_.assign(s.size() + 1, 0);
    gap_prefix_.assign(s.size() + 1, 0);
    const double max_gap = 2.0 / mocap.rate;
    for (std::size_t i = 0; i < s.size(); ++i) {
      nan_prefix_[i + 1] = nan_prefix_[i] + (s[i].position.allFinite() ? 0 : 1);
      const bool big_gap = i + 1 < s.size() && s[i + 1].t - s[i].t > max_gap;
      gap_prefix_[i + 1] = gap_prefix_[i] + (big_gap ? 1 : 0);
    }
  }

  /// True if interpolation succeeds for every time in [lo, hi].
  bool valid_over(double lo, double hi) const {
    const auto& s = mocap_.samples;
    if (s.empty() || lo < s.front().t || hi > s.back().t) {
      return false;
    }
    // first: last sample with t <= lo; last: first sample with t >= hi
    const auto first = static_cast<std::size_t>(
        std::upper_bound(s.begin(), s.end(), lo, [](double v, const MocapSample& m) { return v < m.t; }) -
        s.begin() - 1);
    const auto last = static_cast<std::size_t>(
        std::lower_bound(s.begin(), s.end(), hi, [](const MocapSample& m, double v) { return m.t < v; }) -
        s.begin());
    if (nan_prefix_[last + 1] - nan_prefix_[first] != 0) {
      return false;
    }
    return last == first || gap_prefix_[last] - gap_prefix_[first] == 0;
  }

 private:
  const MocapStream& mocap_;
  std::vector<int> nan_prefix_;
  std::vector<int> gap_prefix_;
};

struct Prepared {
  std::vector<double> u;  // fraction of the CF anchor span
  std::vector<Vec3> cf;
  std::vector<char> in_mask;
  std::size_t mask_count = 0;
  bool translation_only = false;
};

Prepared prepare(std::span<const CfSample> estimates, const ClockAnchors& anchors) {
  if (!(anchors.cf_end_us > anchors.cf_start_us) || !(anchors.mocap_end > anchors.mocap_start)) {
    throw InvalidAnchors("sync anchors must span a positive interval on both clocks");
  }
  Prepared p;
  const double cf_span = static_cast<double>(anchors.cf_end_us - anchors.cf_start_us);
  for (const CfSample& e : estimates) {
    const double dt = e.timestamp_us >= anchors.cf_start_us
                          ? static_cast<double>(e.timestamp_us - anchors.cf_start_us)
                          : -static_cast<double>(anchors.cf_start_us - e.timestamp_us);
    p.u.push_back(dt / cf_span);
    p.cf.push_back(e.position);
  }
  p.in_mask.assign(p.u.size(), 1);
  p.mask_count = p.u.size();
  return p;
}

double mocap_time(const ClockAnchors& a, double u, double offset_start, double offset_end) {
  const double span = (a.mocap_end + offset_end) - (a.mocap_start + offset_start);
  return a.mocap_start + offset_start + u * span;
}

struct CellResult {
  double offset_start = 0.0;
  double offset_end = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  RigidTransform transform;
};

CellResult evaluate(const Prepared& p, const MocapStream& mocap, const ClockAnchors& anchors, double a, double b) {
  std::vector<std::pair<Vec3, Vec3>> pairs;
  pairs.reserve(p.mask_count);
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    if (!p.in_mask[i]) {
      continue;
    }
    const Vec3 mc = interpolate_mocap(mocap_time(anchors, p.u[i], a, b), mocap);
    if (mc.allFinite()) {
      pairs.emplace_back(p.cf[i], mc);
    }
  }
  CellResult r;
  r.offset_start = a;
  r.offset_end = b;
  r.count = pairs.size();
  if (p.translation_only) {
    if (pairs.empty()) {
      throw DegenerateGeometry("no point pairs to fit");
    }
    Vec3 shift = Vec3::Zero();
    for (const auto& [cf, mc] : pairs) {
      shift += mc - cf;
    }
    r.transform.translation = shift / static_cast<double>(pairs.size());
  } else {
    r.transform = fit_rigid_transform(pairs);
  }
  double sum = 0.0;
  for (const auto& [cf, mc] : pairs) {
    sum += (r.transform.apply(cf) - mc).norm();
  }
  r.objective = sum;
  return r;
}

bool better(const CellResult& x, const CellResult& y) {
  if (x.objective != y.objective) {
    return x.objective < y.objective;
  }
  const double lx = std::abs(x.offset_start) + std::abs(x.offset_end);
  const double ly = std::abs(y.offset_start) + std::abs(y.offset_end);
  if (lx != ly) {
    return lx < ly;
  }
  return std::tie(x.offset_start, x.offset_end) < std::tie(y.offset_start, y.offset_end);
}

CellResult search(const Prepared& p, const MocapStream& mocap, const ClockAnchors& anchors,
                  const std::vector<std::pair<double, double>>& cells) {
  std::vector<CellResult> results(cells.size());
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < cells.size(); i += workers) {
          results[i] = evaluate(p, mocap, anchors, cells[i].first, cells[i].second);
        }
      });
    }
  }
  CellResult best;
  for (const CellResult& r : results) {
    if (better(r, best)) {
      best = r;
    }
  }
  return best;
}

std::vector<double> axis(double center, double half_width, double step, double limit) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::llround(half_width / step));
  for (long i = -n; i <= n; ++i) {
    const double v = center + static_cast<double>(i) * step;
    if (std::abs(v) <= limit + 1e-12) {
      out.push_back(v);
    }
  }
  return out;
}

AlignedDataset finish(std::span<const CfSample> estimates, const Prepared& p, const MocapStream& mocap,
                      const ClockAnchors& anchors, const CellResult& best) {
  AlignedDataset out;
  out.transform = best.transform;
  out.offset_start = best.offset_start;
  out.offset_end = best.offset_end;
  out.residual = best.count == 0 ? 0.0 : best.objective / static_cast<double>(best.count);
  const double span = (anchors.mocap_end + best.offset_end) - (anchors.mocap_start + best.offset_start);
  out.records.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    AlignedRecord r;
    r.t_hat = p.u[i] * span;
    r.cf_timestamp_us = estimates[i].timestamp_us;
    r.cf = best.transform.apply(estimates[i].position);
    r.mc = interpolate_mocap(mocap_time(anchors, p.u[i], best.offset_start, best.offset_end), mocap);
    out.records.push_back(r);
  }
  return out;
}

}  // namespace

double rescale_time(std::uint64_t cf_timestamp_us, const ClockAnchors& a) {
  if (!(a.cf_end_us > a.cf_start_us) || !(a.mocap_end > a.mocap_start)) {
    throw InvalidAnchors("sync anchors must span a positive interval on both clocks");
  }
  const double dt = cf_timestamp_us >= a.cf_start_us ? static_cast<double>(cf_timestamp_us - a.cf_start_us)
                                                     : -static_cast<double>(a.cf_start_us - cf_timestamp_us);
  return dt * 1e-6 * ((a.mocap_end - a.mocap_start) / (static_cast<double>(a.cf_end_us - a.cf_start_us) * 1e-6));
}

std::vector<double> rescale_clock(std::span<const std::uint64_t> cf_timestamps_us, const ClockAnchors& anchors) {
  std::vector<double> out;
  out.reserve(cf_timestamps_us.size());
  for (std::uint64_t t : cf_timestamps_us) {
    out.push_back(rescale_time(t, anchors));
  }
  return out;
}

Vec3 interpolate_mocap(double t, const MocapStream& mocap) {
  const Vec3 missing = Vec3::Constant(kNaN);
  const auto& s = mocap.samples;
  auto it = std::lower_bound(s.begin(), s.end(), t, [](const MocapSample& m, double v) { return m.t < v; });
  if (it == s.end()) {
    return missing;
  }
  if (it->t == t) {
    return it->position;
  }
  if (it == s.begin()) {
    return missing;
  }
  const MocapSample& hi = *it;
  const MocapSample& lo = *std::prev(it);
  if (hi.t - lo.t > 2.0 / mocap.rate || !lo.position.allFinite() || !hi.position.allFinite()) {
    return missing;
  }
  const double w = (t - lo.t) / (hi.t - lo.t);
  return lo.position + w * (hi.position - lo.position);
}

RigidTransform fit_rigid_transform(std::span<const std::pair<Vec3, Vec3>> pairs) {
  Vec3 src_mean = Vec3::Zero();
  Vec3 dst_mean = Vec3::Zero();
  std::size_t n = 0;
  for (const auto& [src, dst] : pairs) {
    if (src.allFinite() && dst.allFinite()) {
      src_mean += src;
      dst_mean += dst;
      ++n;
    }
  }
  if (n < 3) {
    throw DegenerateGeometry("rigid fit needs at least three point pairs");
  }
  src_mean /= static_cast<double>(n);
  dst_mean /= static_cast<double>(n);

  Mat3 cross = Mat3::Zero();
  for (const auto& [src, dst] : pairs) {
    if (src.allFinite() && dst.allFinite()) {
      cross += (src - src_mean) * (dst - dst_mean).transpose();
    }
  }
  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()[1] < 1e-12) {
    throw DegenerateGeometry("point pairs are collinear");
  }
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 fix = Mat3::Identity();
  fix(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RigidTransform t;
  t.rotation = v * fix * u.transpose();
  t.translation = dst_mean - t.rotation * src_mean;
  return t;
}

ClockAnchors find_anchors(const SessionBundle& session) {
  ClockAnchors a;
  bool have_on = false;
  bool have_off = false;
  for (const CfEvent& e : session.cf_events) {
    if (const auto* led = std::get_if<LedMarker>(&e)) {
      if (led->on && !have_on) {
        a.cf_start_us = led->timestamp_us;
        have_on = true;
      } else if (!led->on) {
        a.cf_end_us = led->timestamp_us;
        have_off = true;
      }
    }
  }
  if (!have_on || !have_off) {
    throw InvalidAnchors("session has no LED on/off sync markers");
  }
  const auto& s = session.mocap.samples;
  const auto first = std::find_if(s.begin(), s.end(), [](const MocapSample& m) { return m.position.allFinite(); });
  const auto last = std::find_if(s.rbegin(), s.rend(), [](const MocapSample& m) { return m.position.allFinite(); });
  if (first == s.end()) {
    throw InvalidAnchors("mocap stream has no marker detections");
  }
  a.mocap_start = first->t;
  a.mocap_end = last->t;
  return a;
}

AlignedDataset align_with_offsets(std::span<const CfSample> estimates, const MocapStream& mocap,
                                  const ClockAnchors& anchors, double offset_start, double offset_end) {
  const Prepared p = prepare(estimates, anchors);
  const CellResult r = evaluate(p, mocap, anchors, offset_start, offset_end);
  return finish(estimates, p, mocap, anchors, r);
}

AlignedDataset align(const SessionBundle& session, const OffsetGrid& grid) {
  const std::vector<CfSample> estimates = events_of<CfSample>(session);
  const ClockAnchors anchors = find_anchors(session);
  Prepared p = prepare(estimates, anchors);

  // Same record set for every cell: keep records whose mocap bracket is valid
  // for every offset pair in the search box (mapped time is linear in the
  // offsets, so the corners bound it).
  const MocapIndex index(session.mocap);
  p.mask_count = 0;
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double a : {-grid.range, grid.range}) {
      for (double b : {-grid.range, grid.range}) {
        const double t = mocap_time(anchors, p.u[i], a, b);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    }
    p.in_mask[i] = index.valid_over(lo, hi) ? 1 : 0;
    p.mask_count += static_cast<std::size_t>(p.in_mask[i]);
  }
  if (p.mask_count < 10) {
    throw InsufficientOverlap("fewer than 10 estimates overlap valid ground truth");
  }
  Vec3 centroid = Vec3::Zero();
  for (std::size_t i = 0; i < p.cf.size(); ++i) {
    if (p.in_mask[i]) {
      centroid += p.cf[i];
    }
  }
  centroid /= static_cast<double>(p.mask_count);
  double spread = 0.0;
  for (std::size_t i = 0; i < p.cf.size(); ++i) {
    if (p.in_mask[i]) {
      spread += (p.cf[i] - centroid).squaredNorm();
    }
  }
  p.translation_only = std::sqrt(spread / static_cast<double>(p.mask_count)) < kMinRotationSpread;

  std::vector<std::pair<double, double>> cells;
  const auto coarse = axis(0.0, grid.range, grid.coarse_step, grid.range);
  for (double a : coarse) {
    for (double b : coarse) {
      cells.emplace_back(a, b);
    }
  }
  const CellResult coarse_best = search(p, session.mocap, anchors, cells);

  cells.clear();
  const auto fine_a = axis(coarse_best.offset_start, grid.coarse_step, grid.fine_step, grid.range);
  const auto fine_b = axis(coarse_best.offset_end, grid.coarse_step, grid.fine_step, grid.range);
  for (double a : fine_a) {
    for (double b : fine_b) {
      cells.emplace_back(a, b);
    }
  }
  CellResult best = search(p, session.mocap, anchors, cells);
  if (better(coarse_best, best)) {
    best = coarse_best;
  }
  return finish(estimates, p, session.mocap, anchors, best);
}

}  // namespace lhloc
