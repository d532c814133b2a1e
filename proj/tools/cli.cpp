#include "cli.hpp"

#include "idde/bias.hpp"
#include "idde/coincidence.hpp"
#include "idde/dataset.hpp"
#include "idde/error.hpp"
#include "idde/estimator.hpp"
#include "idde/serialize.hpp"
#include "idde/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace idde::cli {
namespace {

using nlohmann::json;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + " must be a comma-separated list of numbers, got '" + text + "'");
    }
  }
  if (values.empty()) throw UsageError(std::string(what) + " is empty");
  return values;
}

ScaleRange parse_range(const std::string& text) {
  const auto colon = text.find(':', 1);
  if (colon == std::string::npos) {
    throw UsageError("--range must look like LO:HI, got '" + text + "'");
  }
  try {
    std::size_t a = 0, b = 0;
    const auto lo_text = text.substr(0, colon);
    const auto hi_text = text.substr(colon + 1);
    const double lo = std::stod(lo_text, &a);
    const double hi = std::stod(hi_text, &b);
    if (a != lo_text.size() || b != hi_text.size()) throw std::invalid_argument(text);
    return ScaleRange(lo, hi);
  } catch (const std::invalid_argument&) {
    throw UsageError("--range must look like LO:HI, got '" + text + "'");
  } catch (const std::out_of_range&) {
    throw UsageError("--range bounds out of range: '" + text + "'");
  }
}

bias::InversionMode parse_mode(const std::string& mode) {
  return mode == "continuous" ? bias::InversionMode::Continuous : bias::InversionMode::Integer;
}

// Writes to `path` when given, otherwise to `out`.
void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) {
    throw IoError("cannot write '" + path + "'");
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

struct GenerateArgs {
  std::string kind;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::size_t d = 1;
  std::size_t ambient = 0;
  bool rotate = false;
  std::string direction;
  double noise = 0.0;
  std::string out;
};

struct CurveArgs {
  std::string in;
  bool header = false;
  std::string delimiter = ",";
  std::string columns;
  std::size_t window = 0;
  std::size_t stride = 0;
  std::size_t resample = 0;
  unsigned threads = 0;
  std::size_t pair_budget = PairOptions{}.pair_budget;
  std::size_t sample_size = 0;
  std::optional<std::uint64_t> seed;
  bool csv = false;
  std::string out;
  std::string radii_out;
};

struct FitArgs {
  std::string curve;
  std::vector<std::string> ranges;
  std::optional<double> d_override;
  std::optional<std::size_t> n;
  bool compensate = false;
  bool model_scale = false;
  std::string mode = "integer";
  int ceiling = 200;
  std::string candidates;
  std::string out;
};

struct ScanArgs {
  std::string curve;
  double width = 1.0;
  double stride = 0.25;
  double min_pairs = 0.0;
  std::optional<double> max_pairs;
  PlateauOptions plateau;
  std::string out;
};

struct TableArgs {
  std::size_t n = 0;
  int d_min = 1;
  int d_max = 30;
  bool csv = false;
  std::string out;
};

struct CompensateArgs {
  std::size_t n = 0;
  double d_hat = 0.0;
  double h_hat = 0.0;
  std::string mode = "integer";
  int ceiling = 200;
};

struct ServeArgs {
  std::string bind = "127.0.0.1:8080";
  std::string data_dir;
  std::string static_dir;
  unsigned threads = 0;
  std::size_t pair_budget = PairOptions{}.pair_budget;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  if (!a.seed) throw UsageError("generate requires an explicit --seed");
  std::optional<Dataset> ds;
  if (a.kind == "circle") {
    ds.emplace(gen_circle(a.n, *a.seed));
  } else if (a.kind == "sinusoid") {
    ds.emplace(gen_sinusoid(a.n, *a.seed));
  } else if (a.kind == "hypercube") {
    ds.emplace(gen_hypercube(a.n, a.d, a.ambient == 0 ? a.d : a.ambient, *a.seed, HypercubeOptions{a.rotate}));
  } else if (a.kind == "segment") {
    const auto dir = parse_list(a.direction.empty() ? "100,50,150" : a.direction, "--direction");
    ds.emplace(gen_noisy_segment(a.n, dir, a.noise, *a.seed));
  } else {
    throw UsageError("unknown generator '" + a.kind + "'");
  }
  std::ostringstream text;
  write_csv(text, *ds);
  emit(out, a.out, text.str());
  return kOk;
}

int cmd_curve(const CurveArgs& a, std::ostream& out) {
  CsvOptions csv;
  csv.has_header = a.header;
  if (a.delimiter.size() != 1) throw UsageError("--delimiter must be one character");
  csv.delimiter = a.delimiter.front();
  if (!a.columns.empty()) {
    for (double c : parse_list(a.columns, "--columns")) {
      if (c < 0 || c != static_cast<double>(static_cast<std::size_t>(c))) {
        throw UsageError("--columns entries must be non-negative integers");
      }
      csv.columns.push_back(static_cast<std::size_t>(c));
    }
  }
  if (a.sample_size > 0 && !a.seed) throw UsageError("--sample-size requires an explicit --seed");

  auto in = open_input(a.in);
  std::optional<Dataset> ds;
  if (a.window > 0) {
    WindowConfig cfg;
    cfg.width = a.window;
    if (a.stride > 0) {
      cfg.mode = WindowMode::Sliding;
      cfg.stride = a.stride;
    }
    const auto series = load_series(in, csv, csv.columns.empty() ? 0 : csv.columns.front());
    ds.emplace(window_series(series, cfg));
  } else {
    ds.emplace(load_csv(in, csv));
  }

  PairOptions pairs;
  pairs.threads = a.threads;
  pairs.pair_budget = a.pair_budget;
  pairs.sample_size = a.sample_size;
  pairs.seed = a.seed.value_or(0);
  const auto profile = pairwise_radii(*ds, pairs);
  if (!a.radii_out.empty()) {
    std::ostringstream radii;
    write_radii_csv(radii, profile);
    emit(out, a.radii_out, radii.str());
  }

  std::optional<ResampleOptions> resample;
  if (a.resample > 0) resample = ResampleOptions{a.resample};
  const auto c = curve(profile, resample);
  emit(out, a.out, a.csv ? curve_csv(c) : json(c).dump() + "\n");
  return kOk;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  auto in = open_input(a.curve);
  const auto c = read_curve(in);
  const std::size_t n = a.n.value_or(c.n);

  json report;
  report["dataset"] = {{"n", n}, {"lr", c.lr}, {"zero_pairs", c.zero_pairs}, {"source", a.curve}};
  report["curve"] = {{"path", a.curve},
                     {"points", c.points.size()},
                     {"resampled", c.resampled},
                     {"log2_r_span", {c.min_log2_r(), c.max_log2_r()}}};
  report["fits"] = json::array();
  report["compensations"] = json::array();
  report["requirements"] = json::array();

  bias::InversionOptions inv;
  inv.mode = parse_mode(a.mode);
  inv.ceiling = a.ceiling;

  for (std::size_t i = 0; i < a.ranges.size(); ++i) {
    const auto range = parse_range(a.ranges[i]);
    auto fit = fit_segment(c, range, a.d_override);
    if (a.model_scale) fit = bias::model_scale_fit(c, n, fit);
    json fit_json = fit;
    if (!a.candidates.empty()) {
      fit_json["candidates"] = candidate_lines(c, parse_list(a.candidates, "--candidates"), range);
    }
    report["fits"].push_back(std::move(fit_json));

    if (a.compensate) {
      const auto comp = bias::compensate_fit(n, fit.d_hat, fit.h_hat, inv);
      json comp_json = comp;
      comp_json["fit"] = i;
      const int centre = static_cast<int>(std::lround(comp.d_bar));
      comp_json["table"] = bias::bias_table(n, std::max(1, centre - 2), centre + 2);
      report["compensations"].push_back(std::move(comp_json));
      report["requirements"].push_back(bias::min_observations(comp.d_bar));
    } else if (fit.d_hat >= 1.0) {
      report["requirements"].push_back(bias::min_observations(fit.d_hat));
    }
  }
  emit(out, a.out, report.dump(2) + "\n");
  return kOk;
}

int cmd_scan(const ScanArgs& a, std::ostream& out) {
  auto in = open_input(a.curve);
  const auto c = read_curve(in);
  const auto windows = multiscale_scan(c, ScanOptions{a.width, a.stride, a.min_pairs, a.max_pairs});
  json report = {{"windows", windows}, {"plateaus", find_plateaus(windows, a.plateau)}};
  try {
    report["neighbour_band"] = neighbour_band(c);
    const auto fine = fine_scale_plateau(c, a.width, a.stride, a.plateau);
    report["fine_plateau"] = fine ? json(*fine) : json(nullptr);
  } catch (const Error&) {
    report["neighbour_band"] = nullptr;
    report["fine_plateau"] = nullptr;
  }
  emit(out, a.out, report.dump(2) + "\n");
  return kOk;
}

int cmd_bias_table(const TableArgs& a, std::ostream& out) {
  const auto table = bias::bias_table(a.n, a.d_min, a.d_max);
  if (a.csv) {
    std::ostringstream text;
    bias::write_table_csv(text, table);
    emit(out, a.out, text.str());
  } else {
    emit(out, a.out, json(table).dump(2) + "\n");
  }
  return kOk;
}

int cmd_compensate(const CompensateArgs& a, std::ostream& out) {
  bias::InversionOptions inv;
  inv.mode = parse_mode(a.mode);
  inv.ceiling = a.ceiling;
  json comp = bias::compensate_fit(a.n, a.d_hat, a.h_hat, inv);
  out << comp.dump(2) << "\n";
  return kOk;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  const auto [host, port] = service::parse_bind_address(a.bind);
  service::ServiceOptions opts;
  opts.pairs.threads = a.threads;
  opts.pairs.pair_budget = a.pair_budget;
  if (!a.data_dir.empty()) opts.data_dir = a.data_dir;
  if (!a.static_dir.empty()) opts.static_dir = a.static_dir;

  // Block the stop signals before any server thread exists so only the
  // waiter thread below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Server server(opts);
  const int bound = server.bind(host, port);
  out << "listening on " << host << ":" << bound << std::endl;

  std::jthread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  // listen() also returns if the server failed; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::Usage:
      return kUsage;
    case Error::Kind::Data:
      return kData;
    case Error::Kind::Io:
      return kIo;
  }
  return kData;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intrinsic dimension and differential entropy from pairwise coincidences", "idde"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(IDDE_CLI_VERSION));

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  generate->add_option("kind", gen.kind, "circle | sinusoid | hypercube | segment")
      ->required()
      ->check(CLI::IsMember({"circle", "sinusoid", "hypercube", "segment"}));
  generate->add_option("--n", gen.n, "Number of observations")->required();
  generate->add_option("--seed", gen.seed, "Random seed (required)");
  generate->add_option("--d", gen.d, "Hypercube intrinsic dimension");
  generate->add_option("--D", gen.ambient, "Hypercube ambient dimension (default d)");
  generate->add_flag("--rotate", gen.rotate, "Apply a seeded random rotation to the hypercube");
  generate->add_option("--direction", gen.direction, "Segment direction, comma separated (default 100,50,150)");
  generate->add_option("--noise", gen.noise, "Segment noise amplitude");
  generate->add_option("--out,-o", gen.out, "Output path (default stdout)");

  CurveArgs cur;
  auto* curve_cmd = app.add_subcommand("curve", "Compute the log-log correlation curve of a CSV dataset");
  curve_cmd->add_option("--in,-i,input", cur.in, "Dataset CSV")->required();
  curve_cmd->add_flag("--header", cur.header, "First record is a header");
  curve_cmd->add_option("--delimiter", cur.delimiter, "Field delimiter");
  curve_cmd->add_option("--columns", cur.columns, "Zero-based columns to keep, comma separated");
  curve_cmd->add_option("--window", cur.window, "Window a single series column into patterns of this width");
  curve_cmd->add_option("--stride", cur.stride, "Sliding-window stride (disjoint windows when omitted)");
  curve_cmd->add_option("--resample", cur.resample, "Resample to K log-uniform points");
  curve_cmd->add_option("--threads", cur.threads, "Worker threads for pair distances (0 = all cores)");
  curve_cmd->add_option("--pair-budget", cur.pair_budget, "Largest pair count computed exactly");
  curve_cmd->add_option("--sample-size", cur.sample_size, "Pairs to sample when over budget");
  curve_cmd->add_option("--seed", cur.seed, "Seed for pair sampling");
  curve_cmd->add_flag("--csv", cur.csv, "Emit CSV instead of JSON");
  curve_cmd->add_option("--out,-o", cur.out, "Output path (default stdout)");
  curve_cmd->add_option("--radii-out", cur.radii_out, "Also write the sorted radii as CSV");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit apparent ID and DE on scale ranges of a curve");
  fit_cmd->add_option("--curve,-c,curve", fit.curve, "Curve file (JSON or CSV)")->required();
  fit_cmd->add_option("--range,-r", fit.ranges, "LO:HI in log2 r bits (repeatable)")->required();
  fit_cmd->add_option("--d-override", fit.d_override, "Fix the slope instead of fitting it");
  fit_cmd->add_option("--n", fit.n, "Sample count for bias correction (default: from the curve)");
  fit_cmd->add_flag("--compensate", fit.compensate, "Apply bias compensation");
  fit_cmd->add_flag("--model-scale", fit.model_scale, "Re-read each fit at the bias model's neighbour scale")
      ->excludes("--d-override");
  fit_cmd->add_option("--mode", fit.mode, "Inversion mode")->check(CLI::IsMember({"integer", "continuous"}));
  fit_cmd->add_option("--ceiling", fit.ceiling, "Largest ID considered during inversion");
  fit_cmd->add_option("--candidates", fit.candidates, "ID hypotheses to anchor on each range, comma separated");
  fit_cmd->add_option("--out,-o", fit.out, "Output path (default stdout)");

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Sliding-window slope scan and plateau detection");
  scan_cmd->add_option("--curve,-c,curve", scan.curve, "Curve file (JSON or CSV)")->required();
  scan_cmd->add_option("--width", scan.width, "Window width in bits");
  scan_cmd->add_option("--stride", scan.stride, "Window stride in bits");
  scan_cmd->add_option("--min-pairs", scan.min_pairs, "Minimum cumulative pairs at a window's lower edge");
  scan_cmd->add_option("--max-pairs", scan.max_pairs, "Maximum cumulative pairs at a window's upper edge");
  scan_cmd->add_option("--abs-tol", scan.plateau.abs_tol, "Plateau absolute slope tolerance");
  scan_cmd->add_option("--rel-tol", scan.plateau.rel_tol, "Plateau relative slope tolerance");
  scan_cmd->add_option("--min-windows", scan.plateau.min_windows, "Windows needed to form a plateau");
  scan_cmd->add_option("--out,-o", scan.out, "Output path (default stdout)");

  TableArgs table;
  auto* table_cmd = app.add_subcommand("bias-table", "Predicted apparent IDs for a range of true IDs");
  table_cmd->add_option("--n", table.n, "Sample count")->required();
  table_cmd->add_option("--dmin", table.d_min, "Smallest ID");
  table_cmd->add_option("--dmax", table.d_max, "Largest ID");
  table_cmd->add_flag("--csv", table.csv, "Emit CSV instead of JSON");
  table_cmd->add_option("--out,-o", table.out, "Output path (default stdout)");

  CompensateArgs comp;
  auto* comp_cmd = app.add_subcommand("compensate", "Bias-correct an apparent ID/DE pair");
  comp_cmd->add_option("--n", comp.n, "Sample count")->required();
  comp_cmd->add_option("--d-hat", comp.d_hat, "Apparent ID")->required();
  comp_cmd->add_option("--h-hat", comp.h_hat, "Apparent DE in bits")->required();
  comp_cmd->add_option("--mode", comp.mode, "Inversion mode")->check(CLI::IsMember({"integer", "continuous"}));
  comp_cmd->add_option("--ceiling", comp.ceiling, "Largest ID considered during inversion");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the local HTTP/JSON analysis service");
  serve_cmd->add_option("--bind", serve.bind, "host:port to listen on");
  serve_cmd->add_option("--data-dir", serve.data_dir, "Persist uploaded datasets here as CSV");
  serve_cmd->add_option("--static-dir", serve.static_dir, "Serve static UI assets from this directory");
  serve_cmd->add_option("--threads", serve.threads, "Worker threads for pair distances (0 = all cores)");
  serve_cmd->add_option("--pair-budget", serve.pair_budget, "Largest pair count computed exactly");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*curve_cmd) return cmd_curve(cur, out);
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*scan_cmd) return cmd_scan(scan, out);
    if (*table_cmd) return cmd_bias_table(table, out);
    if (*comp_cmd) return cmd_compensate(comp, out);
    if (*serve_cmd) return cmd_serve(serve, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("idde");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace idde::cli
