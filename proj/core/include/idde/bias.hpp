#pragma once

#include "idde/estimator.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace idde::bias {

// Small-sample bias model for a uniform density in a d-dimensional unit
// hypercube under the supremum norm. All entropies are in bits.

// Theoretical correlation integral at threshold r in (0, 1]: (r(2-r))^d.
double c0(double r, double d);

// Local log-log slope of c0 at r in (0, 1): d * (1 - r/(2-r)).
double d0_of_r(double r, double d);

// Coarse mean nearest-neighbour sup distance for n points: 1 / (1 + n^(1/d)).
double rbar(double n, double d);

// Predicted apparent ID d0(n, d) for true ID d.
double apparent_id(double n, double d);

// Predicted apparent-DE bias for true ID d, in bits.
double de_bias(double n, double d);

struct BiasRow {
  int d;
  double d0;
};

struct BiasTable {
  std::size_t n;
  std::vector<BiasRow> rows; // ascending d; d0 strictly increasing
};

BiasTable bias_table(std::size_t n, int d_min, int d_max);

enum class InversionMode { Integer, Continuous };

struct InversionOptions {
  InversionMode mode = InversionMode::Integer;
  int ceiling = 200;
  double tolerance = 1e-6; // continuous mode, in ID units
};

// Compensated ID: the d whose predicted apparent ID matches d_hat. Integer
// mode picks the closest integer d (ties go to the smaller d). Continuous mode
// solves apparent_id(n, d) = d_hat by bracketing and bisection.
double invert_apparent_id(std::size_t n, double d_hat, const InversionOptions& options = {});

struct Compensation {
  double d_bar;
  double delta_h;
  double h_bar; // h_hat - delta_h
  std::size_t n;
  std::optional<double> d_hat;
};

// Corrects an apparent DE for a given compensated ID.
Compensation compensate(double h_hat, std::size_t n, double d_bar);

// Full correction of one fit: invert the apparent ID, then correct the DE.
Compensation compensate_fit(std::size_t n, double d_hat, double h_hat, const InversionOptions& options = {});

// Minimum sample sizes for reliable ID estimation. Values are kept as log10
// so large d stays representable; the linear accessors may return +inf.
struct DataRequirement {
  double d;
  double log10_smith;    // 42^d
  double log10_eckmann;  // 10^(d/2)

  double smith_n_min() const;
  double eckmann_n_min() const;
};

DataRequirement min_observations(double d);

struct ModelScaleOptions {
  double width = 0.5; // bits of log2 r around the model scale
  int max_iterations = 20;
};

// Re-reads a fit at the scale the bias model is calibrated for: a window
// centred on log2(2 * rbar(n, d_bar)), the doubled mean neighbour distance,
// where d_bar is the continuous inversion of the current slope. Repeats until
// the window stops moving. `start` is usually a fine-scale plateau fit.
SegmentFit model_scale_fit(const CorrelationCurve& curve, std::size_t n, const SegmentFit& start,
                           const ModelScaleOptions& options = {});

} // namespace idde::bias
