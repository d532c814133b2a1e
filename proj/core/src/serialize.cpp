#include "idde/serialize.hpp"
#include "idde/error.hpp"

#include "format.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace idde {

void to_json(nlohmann::json& j, const CorrelationCurve& curve) {
  auto points = nlohmann::json::array();
  for (const auto& p : curve.points) points.push_back({p.log2_r, p.log2_c});
  j = {{"n", curve.n},
       {"lr", curve.lr},
       {"zero_pairs", curve.zero_pairs},
       {"resampled", curve.resampled},
       {"points", std::move(points)}};
}

void from_json(const nlohmann::json& j, CorrelationCurve& curve) {
  try {
    curve.n = j.at("n").get<std::size_t>();
    curve.lr = j.at("lr").get<std::size_t>();
    curve.zero_pairs = j.value("zero_pairs", std::size_t{0});
    curve.resampled = j.value("resampled", false);
    curve.points.clear();
    for (const auto& p : j.at("points")) {
      curve.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed curve document: ") + e.what());
  }
  if (curve.points.empty()) {
    throw DataError("curve document holds no points");
  }
}

void to_json(nlohmann::json& j, const ScaleRange& range) { j = {range.lo(), range.hi()}; }

ScaleRange scale_range_from_json(const nlohmann::json& j) {
  try {
    if (j.is_array() && j.size() == 2) {
      return ScaleRange(j[0].get<double>(), j[1].get<double>());
    }
    if (j.is_object()) {
      return ScaleRange(j.at("log2_r_min").get<double>(), j.at("log2_r_max").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed scale range: ") + e.what());
  }
  throw UsageError("scale range must be [lo, hi] or {log2_r_min, log2_r_max}");
}

void to_json(nlohmann::json& j, const SegmentFit& fit) {
  j = {{"d_hat", fit.d_hat},
       {"h_hat", fit.h_hat},
       {"range", fit.range},
       {"n_points", fit.n_points},
       {"rms_residual", fit.rms_residual}};
}

void to_json(nlohmann::json& j, const CandidateLine& line) { j = {{"d", line.d}, {"h", line.h}}; }

void to_json(nlohmann::json& j, const WindowFit& window) { j = window.fit; }

void to_json(nlohmann::json& j, const Plateau& plateau) {
  j = {{"range", plateau.range},
       {"mean_slope", plateau.mean_slope},
       {"first_window", plateau.first_window},
       {"windows", plateau.windows}};
}

void write_curve_csv(std::ostream& out, const CorrelationCurve& curve) {
  out << curve_csv(curve);
}

std::string curve_csv(const CorrelationCurve& curve) {
  std::string text;
  text.reserve(48 * curve.points.size() + 96);
  text += "# n=" + std::to_string(curve.n) + "\n";
  text += "# lr=" + std::to_string(curve.lr) + "\n";
  text += "# zero_pairs=" + std::to_string(curve.zero_pairs) + "\n";
  text += std::string("# resampled=") + (curve.resampled ? "true" : "false") + "\n";
  text += "log2_r,log2_C\n";
  for (const auto& p : curve.points) {
    detail::append_double(text, p.log2_r);
    text.push_back(',');
    detail::append_double(text, p.log2_c);
    text.push_back('\n');
  }
  return text;
}

namespace {

double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw CsvError(line, 1, "non-numeric value '" + std::string(s) + "'");
  }
  return v;
}

} // namespace

CorrelationCurve read_curve_csv(std::istream& in) {
  CorrelationCurve curve;
  bool have_n = false;
  bool have_lr = false;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = line.substr(1, eq - 1);
      const auto value = std::string_view(line).substr(eq + 1);
      const auto trimmed_key = key.substr(key.find_first_not_of(' '));
      if (trimmed_key == "n") {
        curve.n = static_cast<std::size_t>(parse_number(value, line_no));
        have_n = true;
      } else if (trimmed_key == "lr") {
        curve.lr = static_cast<std::size_t>(parse_number(value, line_no));
        have_lr = true;
      } else if (trimmed_key == "zero_pairs") {
        curve.zero_pairs = static_cast<std::size_t>(parse_number(value, line_no));
      } else if (trimmed_key == "resampled") {
        curve.resampled = value == "true";
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("log2_r", 0) == 0) continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw CsvError(line_no, 2, "expected two columns");
    }
    const std::string_view view(line);
    curve.points.push_back({parse_number(view.substr(0, comma), line_no), parse_number(view.substr(comma + 1), line_no)});
  }
  if (!have_n || !have_lr) {
    throw DataError("curve CSV lacks the '# n=' and '# lr=' metadata lines");
  }
  if (curve.points.empty()) {
    throw DataError("curve CSV holds no points");
  }
  return curve;
}

CorrelationCurve read_curve(std::istream& in) {
  in >> std::ws;
  if (in.peek() == '{') {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed curve JSON: ") + e.what());
    }
    return j.get<CorrelationCurve>();
  }
  return read_curve_csv(in);
}

void write_radii_csv(std::ostream& out, const RadiiProfile& profile) {
  std::string text = "r\n";
  for (double r : profile.radii()) {
    detail::append_double(text, r);
    text.push_back('\n');
  }
  out << text;
}

namespace bias {

void to_json(nlohmann::json& j, const BiasTable& table) {
  auto rows = nlohmann::json::array();
  for (const auto& r : table.rows) rows.push_back({{"d", r.d}, {"d0", r.d0}});
  j = {{"n", table.n}, {"rows", std::move(rows)}};
}

void to_json(nlohmann::json& j, const Compensation& comp) {
  j = {{"d_bar", comp.d_bar}, {"delta_h", comp.delta_h}, {"h_bar", comp.h_bar}, {"n", comp.n}};
  j["d_hat"] = comp.d_hat ? nlohmann::json(*comp.d_hat) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const DataRequirement& req) {
  j = {{"d", req.d},
       {"smith_n_min", req.smith_n_min()},
       {"eckmann_n_min", req.eckmann_n_min()},
       {"log10_smith_n_min", req.log10_smith},
       {"log10_eckmann_n_min", req.log10_eckmann}};
}

void write_table_csv(std::ostream& out, const BiasTable& table) {
  std::string text = "d,d0\n";
  for (const auto& r : table.rows) {
    text += std::to_string(r.d);
    text.push_back(',');
    detail::append_double(text, r.d0);
    text.push_back('\n');
  }
  out << text;
}

} // namespace bias
} // namespace idde
