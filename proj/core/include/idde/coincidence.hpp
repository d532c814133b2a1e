#pragma once

#include "idde/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace idde {

// Sorted doubled sup-norm pair distances. radii[k-1] is the edge of the
// hypercube that yields k coincidences, so C(r) is a rank lookup.
class RadiiProfile {
public:
  // Takes ownership of `radii`, which must already be sorted ascending and
  // non-negative.
  RadiiProfile(std::vector<double> radii, std::size_t n, bool sampled = false);

  std::span<const double> radii() const noexcept { return radii_; }
  std::size_t n() const noexcept { return n_; }
  // L_r: number of stored pairs. Equals n(n-1)/2 unless pairs were sampled.
  std::size_t lr() const noexcept { return radii_.size(); }
  bool sampled() const noexcept { return sampled_; }
  // Pairs at distance zero (duplicate observations).
  std::size_t zero_pairs() const noexcept;

private:
  std::vector<double> radii_;
  std::size_t n_;
  bool sampled_;
};

struct PairOptions {
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  // Largest number of pairs computed exactly.
  std::size_t pair_budget = 50'000'000;
  // When the exact count exceeds the budget, draw this many pairs uniformly
  // (with replacement, i != j). 0 means refuse with PairBudgetError.
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
};

constexpr std::size_t pair_count(std::size_t n) noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }

// Steps 1-2 of the visual method: every unordered pair i<j contributes
// 2 * max_k |x(i)_k - x(j)_k|; the result is sorted. Output is bit-identical
// for any thread count.
RadiiProfile pairwise_radii(const Dataset& ds, const PairOptions& options = {});

// Empirical correlation integral with a closed threshold: #{radii <= r} / L_r.
double correlation_at(const RadiiProfile& profile, double r);

struct CurvePoint {
  double log2_r;
  double log2_c;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// Points (log2 r, log2 C(r)) plus the metadata needed to interpret them.
struct CorrelationCurve {
  std::vector<CurvePoint> points;
  std::size_t n = 0;
  std::size_t lr = 0;
  std::size_t zero_pairs = 0;
  bool resampled = false;

  double min_log2_r() const { return points.front().log2_r; }
  double max_log2_r() const { return points.back().log2_r; }
  // Cumulative pair count k = C * L_r at abscissa x, by linear interpolation
  // of log2 C. Clamped to the curve's ends.
  double pairs_at(double log2_r) const;
  // Inverse of pairs_at: abscissa where the cumulative pair count reaches k.
  double log2_r_at_pairs(double pairs) const;
};

struct ResampleOptions {
  std::size_t num_points = 0;
};

// One point per distinct positive radius, evaluated right-continuously so
// tied radii report the count of all ties. Zero radii are counted in C but
// not plotted. With resampling, `num_points` evenly spaced abscissae in log2 r
// (log-uniform in r) with piecewise-linear interpolation of log2 C.
CorrelationCurve curve(const RadiiProfile& profile, std::optional<ResampleOptions> resample = std::nullopt);

// Resamples an existing curve. A curve with a single point is returned as is.
CorrelationCurve resample_curve(const CorrelationCurve& raw, std::size_t num_points);

} // namespace idde
