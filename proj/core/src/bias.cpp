#include "idde/bias.hpp"
#include "idde/error.hpp"

#include <cmath>
#include <string>

namespace idde::bias {
namespace {

void require_model_inputs(double n, double d) {
  if (!(n >= 2.0) || !std::isfinite(n)) {
    throw UsageError("bias model needs n >= 2, got " + std::to_string(n));
  }
  if (!(d >= 1.0) || !std::isfinite(d)) {
    throw UsageError("bias model needs d >= 1, got " + std::to_string(d));
  }
}

// Both terms depend on r only through this ratio.
double shrink(double r) { return r / (2.0 - r); }

} // namespace

double c0(double r, double d) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw UsageError("c0 needs r in (0, 1], got " + std::to_string(r));
  }
  return std::pow(r * (2.0 - r), d);
}

double d0_of_r(double r, double d) {
  if (!(r > 0.0 && r < 1.0)) {
    throw UsageError("d0 needs r in (0, 1), got " + std::to_string(r));
  }
  return d * (1.0 - shrink(r));
}

double rbar(double n, double d) {
  require_model_inputs(n, d);
  return 1.0 / (1.0 + std::pow(n, 1.0 / d));
}

double apparent_id(double n, double d) {
  return d * (1.0 - shrink(rbar(n, d)));
}

double de_bias(double n, double d) {
  const double r = rbar(n, d);
  return d * (shrink(r) * std::log2(r) + std::log2(2.0 - r));
}

BiasTable bias_table(std::size_t n, int d_min, int d_max) {
  if (d_min < 1 || d_max < d_min) {
    throw UsageError("bias table needs 1 <= d_min <= d_max, got " + std::to_string(d_min) + ".." +
                     std::to_string(d_max));
  }
  BiasTable table{n, {}};
  table.rows.reserve(static_cast<std::size_t>(d_max - d_min + 1));
  for (int d = d_min; d <= d_max; ++d) {
    const double d0 = apparent_id(static_cast<double>(n), d);
    if (!table.rows.empty() && !(d0 > table.rows.back().d0)) {
      throw DataError("apparent ID is not increasing in d at n=" + std::to_string(n) + ", d=" + std::to_string(d));
    }
    table.rows.push_back({d, d0});
  }
  return table;
}

double invert_apparent_id(std::size_t n, double d_hat, const InversionOptions& options) {
  if (!(d_hat > 0.0) || !std::isfinite(d_hat)) {
    throw UsageError("apparent ID must be positive, got " + std::to_string(d_hat));
  }
  if (options.ceiling < 1) {
    throw UsageError("inversion ceiling must be >= 1");
  }
  const double nn = static_cast<double>(n);
  const double top = apparent_id(nn, options.ceiling);
  if (d_hat > top) {
    throw DataError("apparent ID " + std::to_string(d_hat) + " exceeds the prediction " + std::to_string(top) +
                    " for d=" + std::to_string(options.ceiling) + " at n=" + std::to_string(n));
  }

  if (options.mode == InversionMode::Integer) {
    int best = 1;
    double best_gap = std::abs(apparent_id(nn, 1) - d_hat);
    for (int d = 2; d <= options.ceiling; ++d) {
      const double gap = std::abs(apparent_id(nn, d) - d_hat);
      if (gap < best_gap) {
        best = d;
        best_gap = gap;
      }
    }
    return best;
  }

  const auto residual = [&](double d) { return apparent_id(nn, d) - d_hat; };
  if (residual(1.0) > 0.0) {
    throw DataError("apparent ID " + std::to_string(d_hat) + " lies below the prediction for d=1 at n=" +
                    std::to_string(n));
  }
  // Unit-step scan for the first sign change; monotonicity in d is only
  // established numerically, so the bracket is found rather than assumed.
  double lo = 1.0;
  double hi = 1.0;
  for (int d = 1; d <= options.ceiling; ++d) {
    if (residual(d) >= 0.0) {
      hi = d;
      break;
    }
    lo = d;
  }
  if (residual(hi) == 0.0) return hi;
  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Compensation compensate(double h_hat, std::size_t n, double d_bar) {
  if (!std::isfinite(h_hat)) {
    throw UsageError("apparent DE must be finite");
  }
  const double delta = de_bias(static_cast<double>(n), d_bar);
  return Compensation{d_bar, delta, h_hat - delta, n, std::nullopt};
}

Compensation compensate_fit(std::size_t n, double d_hat, double h_hat, const InversionOptions& options) {
  auto out = compensate(h_hat, n, invert_apparent_id(n, d_hat, options));
  out.d_hat = d_hat;
  return out;
}

double DataRequirement::smith_n_min() const { return std::pow(42.0, d); }
double DataRequirement::eckmann_n_min() const { return std::pow(10.0, d / 2.0); }

DataRequirement min_observations(double d) {
  if (!(d >= 1.0) || !std::isfinite(d)) {
    throw UsageError("requirement needs d >= 1");
  }
  return DataRequirement{d, d * std::log10(42.0), d / 2.0};
}


SegmentFit model_scale_fit(const CorrelationCurve& curve, std::size_t n, const SegmentFit& start,
                           const ModelScaleOptions& options) {
  if (!(options.width > 0.0) || options.max_iterations < 1) {
    throw UsageError("model_scale_fit needs width > 0 and at least one iteration");
  }
  InversionOptions inversion;
  inversion.mode = InversionMode::Continuous;
  SegmentFit fit = start;
  double centre = std::nan("");
  for (int i = 0; i < options.max_iterations; ++i) {
    const double d_bar = invert_apparent_id(n, fit.d_hat, inversion);
    const double next = std::log2(2.0 * rbar(static_cast<double>(n), d_bar));
    if (std::abs(next - centre) < 1e-9) break;
    centre = next;
    fit = fit_segment(curve, ScaleRange(centre - options.width / 2, centre + options.width / 2));
  }
  return fit;
}

} // namespace idde::bias
