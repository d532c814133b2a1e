#include "idde/estimator.hpp"
#include "idde/error.hpp"

#include <cmath>
#include <string>

namespace idde {

ScaleRange::ScaleRange(double log2_r_min, double log2_r_max) : lo_(log2_r_min), hi_(log2_r_max) {
  if (!std::isfinite(lo_) || !std::isfinite(hi_) || !(lo_ < hi_)) {
    throw UsageError("scale range needs finite bounds with min < max, got [" + std::to_string(lo_) + ", " +
                     std::to_string(hi_) + "]");
  }
}

namespace {

std::vector<CurvePoint> points_in(const CorrelationCurve& curve, const ScaleRange& range) {
  std::vector<CurvePoint> pts;
  for (const auto& p : curve.points) {
    if (!range.contains(p.log2_r)) continue;
    if (!pts.empty() && pts.back().log2_r == p.log2_r) {
      pts.back() = p; // keep the final cumulative point of a tie run
    } else {
      pts.push_back(p);
    }
  }
  return pts;
}

} // namespace

SegmentFit fit_segment(const CorrelationCurve& curve, const ScaleRange& range, std::optional<double> d_override) {
  if (d_override && !(std::isfinite(*d_override) && *d_override >= 0.0)) {
    throw UsageError("slope override must be finite and >= 0");
  }
  const auto pts = points_in(curve, range);
  const std::size_t required = d_override ? 1 : 2;
  if (pts.size() < required) {
    throw DataError("scale range [" + std::to_string(range.lo()) + ", " + std::to_string(range.hi()) + "] holds " +
                    std::to_string(pts.size()) + " curve point(s); at least " + std::to_string(required) +
                    " required");
  }

  const double count = static_cast<double>(pts.size());
  double slope;
  if (d_override) {
    slope = *d_override;
  } else {
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
      mx += p.log2_r;
      my += p.log2_c;
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : pts) {
      sxx += (p.log2_r - mx) * (p.log2_r - mx);
      sxy += (p.log2_r - mx) * (p.log2_c - my);
    }
    slope = sxy / sxx;
  }

  double offset = 0.0;
  for (const auto& p : pts) offset += slope * p.log2_r - p.log2_c;
  offset /= count;

  double ss = 0.0;
  for (const auto& p : pts) {
    const double e = p.log2_c - (slope * p.log2_r - offset);
    ss += e * e;
  }
  return SegmentFit{slope, offset, range, pts.size(), std::sqrt(ss / count)};
}

std::vector<CandidateLine> candidate_lines(const CorrelationCurve& curve, std::span<const double> d_list,
                                           const ScaleRange& anchor) {
  if (d_list.empty()) {
    throw UsageError("candidate slope list is empty");
  }
  std::vector<CandidateLine> lines;
  lines.reserve(d_list.size());
  for (double d : d_list) {
    lines.push_back({d, fit_segment(curve, anchor, d).h_hat});
  }
  return lines;
}

std::vector<WindowFit> multiscale_scan(const CorrelationCurve& curve, const ScanOptions& options) {
  if (!(options.width > 0.0) || !(options.stride > 0.0)) {
    throw UsageError("scan width and stride must be positive");
  }
  if (curve.points.size() < 2) {
    throw DataError("scan needs a curve with at least 2 points");
  }
  const double x0 = curve.min_log2_r();
  const double span = curve.max_log2_r() - x0;
  if (options.width > span) {
    throw UsageError("scan window of " + std::to_string(options.width) + " bits is wider than the curve span of " +
                     std::to_string(span) + " bits");
  }

  const auto windows = static_cast<std::size_t>(std::floor((span - options.width) / options.stride + 1e-9)) + 1;
  std::vector<WindowFit> out;
  out.reserve(windows);
  for (std::size_t i = 0; i < windows; ++i) {
    const double lo = x0 + options.stride * static_cast<double>(i);
    const ScaleRange range(lo, lo + options.width);
    if (options.min_pairs > 0.0 && curve.pairs_at(range.lo()) < options.min_pairs) continue;
    if (options.max_pairs && curve.pairs_at(range.hi()) > *options.max_pairs) continue;
    if (points_in(curve, range).size() < 2) continue;
    out.push_back({range, fit_segment(curve, range)});
  }
  return out;
}

std::vector<Plateau> find_plateaus(std::span<const WindowFit> scan, const PlateauOptions& options) {
  std::vector<Plateau> out;
  std::size_t start = 0;
  double sum = 0.0;
  std::size_t count = 0;

  auto close = [&](std::size_t end) {
    if (count >= std::max<std::size_t>(options.min_windows, 1)) {
      out.push_back({ScaleRange(scan[start].range.lo(), scan[end - 1].range.hi()), sum / static_cast<double>(count),
                     start, count});
    }
  };

  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double slope = scan[i].fit.d_hat;
    if (count > 0) {
      const double mean = sum / static_cast<double>(count);
      if (std::abs(slope - mean) <= options.abs_tol + options.rel_tol * std::abs(mean)) {
        sum += slope;
        ++count;
        continue;
      }
      close(i);
    }
    start = i;
    sum = slope;
    count = 1;
  }
  if (count > 0) close(scan.size());
  return out;
}

ScaleRange support_band(const CorrelationCurve& curve, double min_pairs, double max_pairs) {
  if (!(min_pairs > 0.0) || !(max_pairs > min_pairs)) {
    throw UsageError("support band needs 0 < min_pairs < max_pairs");
  }
  const double lo = curve.log2_r_at_pairs(min_pairs);
  const double hi = curve.log2_r_at_pairs(max_pairs);
  if (!(lo < hi)) {
    throw DataError("curve does not resolve the pair counts " + std::to_string(min_pairs) + " to " +
                    std::to_string(max_pairs));
  }
  return ScaleRange(lo, hi);
}

ScaleRange neighbour_band(const CorrelationCurve& curve) {
  const double n = static_cast<double>(curve.n);
  return support_band(curve, n / 10.0, 4.0 * n);
}

std::optional<Plateau> fine_scale_plateau(const CorrelationCurve& curve, double width, double stride,
                                          PlateauOptions options) {
  const ScaleRange band = neighbour_band(curve);
  const auto all = multiscale_scan(curve, ScanOptions{width, stride, 0.0, std::nullopt});
  std::vector<WindowFit> inside;
  for (const auto& w : all) {
    if (w.range.lo() >= band.lo() && w.range.hi() <= band.hi()) inside.push_back(w);
  }
  const auto plateaus = find_plateaus(inside, options);
  if (plateaus.empty()) return std::nullopt;
  return plateaus.front();
}

} // namespace idde
