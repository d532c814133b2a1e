#pragma once

#include "idde/coincidence.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace idde {

// Closed interval of log2 r, in bits.
class ScaleRange {
public:
  ScaleRange(double log2_r_min, double log2_r_max);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  bool contains(double log2_r) const noexcept { return log2_r >= lo_ && log2_r <= hi_; }

  friend bool operator==(const ScaleRange&, const ScaleRange&) = default;

private:
  double lo_;
  double hi_;
};

// Apparent ID (slope) and apparent DE (offset, bits) over one scale range:
// log2 C ~ d_hat * log2 r - h_hat.
struct SegmentFit {
  double d_hat = 0.0;
  double h_hat = 0.0;
  ScaleRange range{0.0, 1.0};
  std::size_t n_points = 0;
  double rms_residual = 0.0;
};

// Ordinary least squares slope over the in-range points, or `d_override`
// verbatim. The offset is always the mean of d*log2_r - log2_C over those
// points. Runs of equal abscissae are collapsed to their last point first.
SegmentFit fit_segment(const CorrelationCurve& curve, const ScaleRange& range,
                       std::optional<double> d_override = std::nullopt);

struct CandidateLine {
  double d;
  double h;
  // Ordinate of the hypothesis line at log2 r = x.
  double at(double x) const noexcept { return d * x - h; }
};

// One ID hypothesis line per slope, each anchored by its mean offset over
// the anchor range.
std::vector<CandidateLine> candidate_lines(const CorrelationCurve& curve, std::span<const double> d_list,
                                           const ScaleRange& anchor);

struct ScanOptions {
  double width = 1.0;  // bits of log2 r per window
  double stride = 0.25;
  // Keep only windows whose cumulative pair count is at least `min_pairs` at
  // the lower edge and at most `max_pairs` at the upper edge.
  double min_pairs = 0.0;
  std::optional<double> max_pairs;
};

struct WindowFit {
  ScaleRange range;
  SegmentFit fit;
};

// Sliding-window fits from fine to coarse scale. Windows holding fewer than
// two curve points are skipped.
std::vector<WindowFit> multiscale_scan(const CorrelationCurve& curve, const ScanOptions& options);

struct PlateauOptions {
  // A window joins the current plateau while its slope stays within
  // abs_tol + rel_tol * |mean slope| of the plateau's running mean.
  double abs_tol = 0.25;
  double rel_tol = 0.10;
  std::size_t min_windows = 2;
};

struct Plateau {
  ScaleRange range;
  double mean_slope;
  std::size_t first_window;
  std::size_t windows;
};

// Runs of consecutive scan windows with near-constant slope, fine to coarse.
std::vector<Plateau> find_plateaus(std::span<const WindowFit> scan, const PlateauOptions& options = {});

// Abscissae where the cumulative pair count crosses min_pairs and max_pairs.
ScaleRange support_band(const CorrelationCurve& curve, double min_pairs, double max_pairs);

// The nearest-neighbour regime: between 0.2 and 8 coincidences per
// observation on average (n/10 to 4n pairs). This is the scale the bias
// model's mean neighbour distance refers to.
ScaleRange neighbour_band(const CorrelationCurve& curve);

// Finest plateau formed by scan windows lying wholly inside the neighbour
// band. Window width and stride are in bits. Empty when the band is narrower
// than one window.
std::optional<Plateau> fine_scale_plateau(const CorrelationCurve& curve, double width, double stride,
                                          PlateauOptions options = {0.25, 0.10, 1});

} // namespace idde
