#pragma once

#include "idde/bias.hpp"
#include "idde/coincidence.hpp"
#include "idde/estimator.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>

namespace idde {

// JSON shapes:
//   curve        {n, lr, zero_pairs, resampled, points: [[log2_r, log2_C], ...]}
//   scale range  [log2_r_min, log2_r_max]  (objects {log2_r_min, log2_r_max} also accepted on input)
//   segment fit  {d_hat, h_hat, range, n_points, rms_residual}
void to_json(nlohmann::json& j, const CorrelationCurve& curve);
void from_json(const nlohmann::json& j, CorrelationCurve& curve);
void to_json(nlohmann::json& j, const ScaleRange& range);
ScaleRange scale_range_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const SegmentFit& fit);
void to_json(nlohmann::json& j, const CandidateLine& line);
void to_json(nlohmann::json& j, const WindowFit& window);
void to_json(nlohmann::json& j, const Plateau& plateau);

// Curve CSV: '#'-prefixed metadata lines (n, lr, zero_pairs, resampled), a
// "log2_r,log2_C" header, then one row per point.
void write_curve_csv(std::ostream& out, const CorrelationCurve& curve);
std::string curve_csv(const CorrelationCurve& curve);
CorrelationCurve read_curve_csv(std::istream& in);

// Reads either curve format, sniffing for a leading '{'.
CorrelationCurve read_curve(std::istream& in);

// Radii CSV: an "r" header then one sorted radius per line.
void write_radii_csv(std::ostream& out, const RadiiProfile& profile);

namespace bias {
void to_json(nlohmann::json& j, const BiasTable& table);
void to_json(nlohmann::json& j, const Compensation& comp);
void to_json(nlohmann::json& j, const DataRequirement& req);
void write_table_csv(std::ostream& out, const BiasTable& table);
} // namespace bias

} // namespace idde
