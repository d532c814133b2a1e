#include "idde/coincidence.hpp"
#include "idde/error.hpp"

#include "parallel.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace idde {
namespace {

double doubled_sup_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a[k] - b[k]));
  }
  return 2.0 * m;
}

// Offset of row i's first pair (i, i+1) in the row-major upper triangle.
std::size_t row_offset(std::size_t i, std::size_t n) { return i * (2 * n - i - 1) / 2; }

// Splits rows [0, n-1) into `parts` ranges carrying roughly equal pair counts.
std::vector<std::size_t> balance_rows(std::size_t n, unsigned parts) {
  const std::size_t total = pair_count(n);
  std::vector<std::size_t> cuts{0};
  std::size_t i = 0;
  for (unsigned p = 1; p < parts; ++p) {
    const std::size_t target = total * p / parts;
    while (i < n - 1 && row_offset(i + 1, n) <= target) ++i;
    cuts.push_back(std::max(cuts.back(), i));
  }
  cuts.push_back(n - 1);
  return cuts;
}

std::uint64_t bounded(detail::Engine& rng, std::uint64_t bound) {
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::vector<double> exact_radii(const Dataset& ds, unsigned threads) {
  const std::size_t n = ds.size();
  std::vector<double> out(pair_count(n));
  const auto cuts = balance_rows(n, threads);
  detail::run_parallel(threads, [&](unsigned t) {
    for (std::size_t i = cuts[t]; i < cuts[t + 1]; ++i) {
      const auto xi = ds.row(i);
      double* dst = out.data() + row_offset(i, n);
      for (std::size_t j = i + 1; j < n; ++j) {
        *dst++ = doubled_sup_distance(xi, ds.row(j));
      }
    }
  });
  return out;
}

std::vector<double> sampled_radii(const Dataset& ds, std::size_t samples, std::uint64_t seed, unsigned threads) {
  const std::size_t n = ds.size();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(samples);
  detail::Engine rng(seed);
  for (auto& p : pairs) {
    const auto i = bounded(rng, n);
    auto j = bounded(rng, n - 1);
    if (j >= i) ++j;
    p = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
  }
  std::vector<double> out(samples);
  detail::run_parallel(threads, [&](unsigned t) {
    const std::size_t lo = samples * t / threads;
    const std::size_t hi = samples * (t + 1) / threads;
    for (std::size_t s = lo; s < hi; ++s) {
      out[s] = doubled_sup_distance(ds.row(pairs[s].first), ds.row(pairs[s].second));
    }
  });
  return out;
}

} // namespace

RadiiProfile::RadiiProfile(std::vector<double> radii, std::size_t n, bool sampled)
    : radii_(std::move(radii)), n_(n), sampled_(sampled) {
  if (radii_.empty()) {
    throw UsageError("a radii profile needs at least one pair");
  }
  if (!sampled_ && radii_.size() != pair_count(n_)) {
    throw UsageError("exact profile for n=" + std::to_string(n_) + " must hold " + std::to_string(pair_count(n_)) +
                     " radii, got " + std::to_string(radii_.size()));
  }
  if (radii_.front() < 0.0 || !std::is_sorted(radii_.begin(), radii_.end())) {
    throw UsageError("radii must be non-negative and sorted ascending");
  }
}

std::size_t RadiiProfile::zero_pairs() const noexcept {
  return static_cast<std::size_t>(std::upper_bound(radii_.begin(), radii_.end(), 0.0) - radii_.begin());
}

RadiiProfile pairwise_radii(const Dataset& ds, const PairOptions& options) {
  const std::size_t n = ds.size();
  const std::size_t total = pair_count(n);
  const unsigned threads = detail::resolve_threads(options.threads);

  std::vector<double> radii;
  bool sampled = false;
  if (total <= options.pair_budget) {
    radii = exact_radii(ds, static_cast<unsigned>(std::min<std::size_t>(threads, n - 1)));
  } else if (options.sample_size > 0) {
    if (n > std::numeric_limits<std::uint32_t>::max()) {
      throw UsageError("pair sampling supports at most 2^32-1 observations");
    }
    radii = sampled_radii(ds, options.sample_size, options.seed, threads);
    sampled = true;
  } else {
    throw PairBudgetError(total, options.pair_budget);
  }
  detail::parallel_sort(radii, threads);
  return RadiiProfile(std::move(radii), n, sampled);
}

double correlation_at(const RadiiProfile& profile, double r) {
  if (!(r >= 0.0)) {
    throw UsageError("correlation threshold must be >= 0");
  }
  const auto radii = profile.radii();
  const auto count = std::upper_bound(radii.begin(), radii.end(), r) - radii.begin();
  return static_cast<double>(count) / static_cast<double>(radii.size());
}

CorrelationCurve curve(const RadiiProfile& profile, std::optional<ResampleOptions> resample) {
  const auto radii = profile.radii();
  const double lr = static_cast<double>(radii.size());

  CorrelationCurve out;
  out.n = profile.n();
  out.lr = radii.size();
  out.zero_pairs = profile.zero_pairs();
  if (out.zero_pairs == radii.size()) {
    throw DegenerateDataError("all " + std::to_string(radii.size()) +
                              " pair distances are zero; the log-log curve is empty");
  }

  std::size_t k = out.zero_pairs;
  while (k < radii.size()) {
    const double value = radii[k];
    // Advance past the tie block; k then counts every radius <= value.
    while (k < radii.size() && radii[k] == value) ++k;
    out.points.push_back({std::log2(value), std::log2(static_cast<double>(k) / lr)});
  }

  if (resample && resample->num_points > 0) {
    return resample_curve(out, resample->num_points);
  }
  return out;
}

CorrelationCurve resample_curve(const CorrelationCurve& raw, std::size_t num_points) {
  if (raw.points.empty()) {
    throw UsageError("cannot resample an empty curve");
  }
  if (num_points < 2) {
    throw UsageError("resampling needs at least 2 points");
  }
  if (raw.points.size() == 1) {
    return raw;
  }
  CorrelationCurve out = raw;
  out.resampled = true;
  out.points.clear();
  out.points.reserve(num_points);

  const double x0 = raw.min_log2_r();
  const double x1 = raw.max_log2_r();
  std::size_t seg = 0;
  for (std::size_t i = 0; i < num_points; ++i) {
    const double x = i + 1 == num_points ? x1 : x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(num_points - 1);
    while (seg + 2 < raw.points.size() && raw.points[seg + 1].log2_r <= x) ++seg;
    const auto& a = raw.points[seg];
    const auto& b = raw.points[seg + 1];
    double y;
    if (x >= b.log2_r) {
      y = b.log2_c;
    } else if (x <= a.log2_r) {
      y = a.log2_c;
    } else {
      const double t = (x - a.log2_r) / (b.log2_r - a.log2_r);
      y = a.log2_c + t * (b.log2_c - a.log2_c);
    }
    out.points.push_back({x, y});
  }
  return out;
}

double CorrelationCurve::pairs_at(double log2_r) const {
  if (points.empty()) throw UsageError("empty curve");
  const auto it = std::lower_bound(points.begin(), points.end(), log2_r,
                                   [](const CurvePoint& p, double x) { return p.log2_r < x; });
  double y;
  if (it == points.begin()) {
    y = points.front().log2_c;
  } else if (it == points.end()) {
    y = points.back().log2_c;
  } else {
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double t = (log2_r - a.log2_r) / (b.log2_r - a.log2_r);
    y = a.log2_c + t * (b.log2_c - a.log2_c);
  }
  return std::exp2(y) * static_cast<double>(lr);
}

double CorrelationCurve::log2_r_at_pairs(double pairs) const {
  if (points.empty()) throw UsageError("empty curve");
  if (!(pairs > 0.0)) throw UsageError("pair count must be positive");
  const double target = std::log2(pairs / static_cast<double>(lr));
  const auto it = std::lower_bound(points.begin(), points.end(), target,
                                   [](const CurvePoint& p, double y) { return p.log2_c < y; });
  if (it == points.begin()) return points.front().log2_r;
  if (it == points.end()) return points.back().log2_r;
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double t = (target - a.log2_c) / (b.log2_c - a.log2_c);
  return a.log2_r + t * (b.log2_r - a.log2_r);
}

} // namespace idde
