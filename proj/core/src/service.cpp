#include "idde/service.hpp"

#include "idde/bias.hpp"
#include "idde/error.hpp"
#include "idde/estimator.hpp"
#include "idde/serialize.hpp"

#include <httplib.h>

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

namespace idde::service {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Store

DatasetEntry::DatasetEntry(std::string id, Dataset dataset, std::string source, PairOptions pairs)
    : id_(std::move(id)), dataset_(std::move(dataset)), source_(std::move(source)), pairs_(pairs) {}

const RadiiProfile& DatasetEntry::profile() const {
  std::call_once(profile_once_, [this] { profile_.emplace(pairwise_radii(dataset_, pairs_)); });
  return *profile_;
}

std::shared_ptr<const CorrelationCurve> DatasetEntry::curve(std::size_t points) const {
  const auto& prof = profile();
  std::lock_guard lock(curve_mutex_);
  if (auto it = curves_.find(points); it != curves_.end()) return it->second;

  std::shared_ptr<const CorrelationCurve> raw;
  if (auto it = curves_.find(0); it != curves_.end()) {
    raw = it->second;
  } else {
    raw = std::make_shared<const CorrelationCurve>(idde::curve(prof));
    curves_.emplace(0, raw);
  }
  if (points == 0) return raw;
  auto resampled = std::make_shared<const CorrelationCurve>(resample_curve(*raw, points));
  curves_.emplace(points, resampled);
  return resampled;
}

std::shared_ptr<DatasetEntry> SessionStore::add(Dataset dataset, std::string source, PairOptions pairs) {
  std::unique_lock lock(mutex_);
  std::string id;
  do {
    id = next_id();
  } while (entries_.contains(id));
  auto entry = std::make_shared<DatasetEntry>(id, std::move(dataset), std::move(source), pairs);
  entries_.emplace(id, entry);
  return entry;
}

std::shared_ptr<DatasetEntry> SessionStore::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : it->second;
}

bool SessionStore::erase(const std::string& id) {
  std::unique_lock lock(mutex_);
  return entries_.erase(id) > 0;
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::string SessionStore::next_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[40];
  const auto n = std::snprintf(buf, sizeof(buf), "ds-%llu-%08llx", static_cast<unsigned long long>(++counter_),
                               static_cast<unsigned long long>(rng() & 0xffffffffULL));
  return std::string(buf, static_cast<std::size_t>(n));
}

std::pair<std::string, int> parse_bind_address(const std::string& address) {
  std::string host;
  std::string port_text;
  if (!address.empty() && address.front() == '[') {
    const auto close = address.find(']');
    if (close == std::string::npos || close + 1 >= address.size() || address[close + 1] != ':') {
      throw UsageError("malformed bind address '" + address + "'");
    }
    host = address.substr(1, close - 1);
    port_text = address.substr(close + 2);
  } else {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) {
      throw UsageError("bind address '" + address + "' must be host:port");
    }
    host = address.substr(0, colon);
    port_text = address.substr(colon + 1);
  }
  int port = -1;
  const auto res = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (host.empty() || res.ec != std::errc{} || res.ptr != port_text.data() + port_text.size() || port < 0 ||
      port > 65535) {
    throw UsageError("malformed bind address '" + address + "'");
  }
  return {host, port};
}

// ---------------------------------------------------------------------------
// HTTP layer

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
  json detail = nullptr;
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const HttpError& err) {
  send_json(res, err.status, json{{"code", err.code}, {"message", err.message}, {"detail", err.detail}});
}

// Maps library exceptions onto HTTP statuses. `data_status` distinguishes
// unparsable input (400) from well-formed input that cannot be analysed (422).
template <class Fn>
void guarded(httplib::Response& res, int data_status, Fn&& fn) {
  try {
    fn();
  } catch (const HttpError& e) {
    send_error(res, e);
  } catch (const PairBudgetError& e) {
    send_error(res, {413, "pair_budget_exceeded", e.what(), {{"pairs", e.pairs()}, {"budget", e.budget()}}});
  } catch (const CsvError& e) {
    send_error(res, {400, "parse_error", e.what(), {{"row", e.row()}, {"column", e.column()}}});
  } catch (const DataError& e) {
    send_error(res, {data_status, data_status == 400 ? "bad_data" : "unprocessable", e.what()});
  } catch (const UsageError& e) {
    send_error(res, {400, "bad_request", e.what()});
  } catch (const json::exception& e) {
    send_error(res, {400, "bad_json", e.what()});
  } catch (const std::exception& e) {
    send_error(res, {500, "internal", e.what()});
  }
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw HttpError{400, "bad_json", std::string("request body is not valid JSON: ") + e.what()};
  }
}

template <class T>
T query_number(const httplib::Request& req, const std::string& key, T fallback) {
  if (!req.has_param(key)) return fallback;
  const auto text = req.get_param_value(key);
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw HttpError{400, "bad_request", "query parameter '" + key + "' is not a valid number", text};
  }
  return value;
}

bool query_flag(const httplib::Request& req, const std::string& key) {
  if (!req.has_param(key)) return false;
  const auto v = req.get_param_value(key);
  return v.empty() || v == "1" || v == "true" || v == "yes";
}

std::vector<std::size_t> parse_columns(const std::string& text) {
  std::vector<std::size_t> cols;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
      throw HttpError{400, "bad_request", "columns must be a comma-separated list of indices", text};
    }
    cols.push_back(v);
  }
  return cols;
}

Dataset dataset_from_csv(const httplib::Request& req) {
  CsvOptions opts;
  opts.has_header = query_flag(req, "header");
  if (req.has_param("delimiter")) {
    const auto d = req.get_param_value("delimiter");
    if (d.size() != 1) throw HttpError{400, "bad_request", "delimiter must be a single character", d};
    opts.delimiter = d.front();
  }
  if (req.has_param("columns")) opts.columns = parse_columns(req.get_param_value("columns"));

  std::istringstream in(req.body);
  const auto window = query_number<std::size_t>(req, "window", 0);
  if (window == 0) return load_csv(in, opts);

  WindowConfig cfg;
  cfg.width = window;
  if (req.has_param("stride")) {
    cfg.mode = WindowMode::Sliding;
    cfg.stride = query_number<std::size_t>(req, "stride", 1);
  }
  const auto column = opts.columns.empty() ? std::size_t{0} : opts.columns.front();
  const auto series = load_series(in, opts, column);
  return window_series(series, cfg);
}

std::uint64_t required_seed(const json& spec) {
  if (!spec.contains("seed")) {
    throw HttpError{400, "bad_request", "generator specs require an explicit seed"};
  }
  return spec.at("seed").get<std::uint64_t>();
}

Dataset dataset_from_generator(const json& spec, std::string& source) {
  const auto kind = spec.at("kind").get<std::string>();
  const auto n = spec.at("n").get<std::size_t>();
  const auto seed = required_seed(spec);
  source = "generator:" + kind;
  if (kind == "circle") return gen_circle(n, seed);
  if (kind == "sinusoid") return gen_sinusoid(n, seed);
  if (kind == "hypercube") {
    const auto d = spec.at("d").get<std::size_t>();
    const auto ambient = spec.value("D", d);
    return gen_hypercube(n, d, ambient, seed, HypercubeOptions{spec.value("rotate", false)});
  }
  if (kind == "segment") {
    const auto direction = spec.at("direction").get<std::vector<double>>();
    return gen_noisy_segment(n, direction, spec.value("noise", 0.0), seed);
  }
  throw HttpError{400, "bad_request", "unknown generator kind '" + kind + "'",
                  json::array({"circle", "sinusoid", "hypercube", "segment"})};
}

json dataset_summary(const DatasetEntry& entry) {
  const auto& prof = entry.profile();
  return {{"id", entry.id()},
          {"n", entry.dataset().size()},
          {"d_ambient", entry.dataset().dimension()},
          {"duplicate_pairs", prof.zero_pairs()},
          {"lr", prof.lr()},
          {"sampled", prof.sampled()},
          {"source", entry.source()}};
}

bias::InversionMode parse_mode(const std::string& mode) {
  if (mode == "integer") return bias::InversionMode::Integer;
  if (mode == "continuous") return bias::InversionMode::Continuous;
  throw HttpError{400, "bad_request", "mode must be 'integer' or 'continuous'", mode};
}

} // namespace

struct Server::Impl {
  ServiceOptions options;
  SessionStore store;
  httplib::Server http;
  bool bound = false;

  std::shared_ptr<DatasetEntry> lookup(const httplib::Request& req) const {
    const auto id = req.path_params.at("id");
    auto entry = store.find(id);
    if (!entry) throw HttpError{404, "not_found", "no dataset with id '" + id + "'"};
    return entry;
  }

  // Default: raw when small enough, otherwise resampled to the default size.
  std::size_t curve_points(const httplib::Request& req, const DatasetEntry& entry) const {
    if (req.has_param("points")) return query_number<std::size_t>(req, "points", 0);
    const auto raw = entry.curve(0);
    return raw->points.size() <= options.default_curve_points ? 0 : options.default_curve_points;
  }

  std::size_t body_curve_points(const json& body, const DatasetEntry& entry) const {
    if (body.contains("points")) return body.at("points").get<std::size_t>();
    const auto raw = entry.curve(0);
    return raw->points.size() <= options.default_curve_points ? 0 : options.default_curve_points;
  }

  void persist(const DatasetEntry& entry) const {
    if (!options.data_dir) return;
    std::filesystem::create_directories(*options.data_dir);
    const auto path = *options.data_dir / (entry.id() + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_csv(out, entry.dataset());
  }

  void routes() {
    http.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200,
                {{"status", "ok"},
                 {"name", "idde"},
                 {"version", IDDE_VERSION},
                 {"build", {{"type", IDDE_BUILD_TYPE}, {"compiler", __VERSION__}, {"cxx", __cplusplus}}}});
    });

    http.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 400, [&] {
        std::string source = "upload";
        PairOptions pairs = options.pairs;
        pairs.sample_size = query_number<std::size_t>(req, "subsample", 0);
        pairs.seed = query_number<std::uint64_t>(req, "seed", pairs.seed);

        const auto type = req.get_header_value("Content-Type");
        std::optional<Dataset> ds;
        if (type.rfind("application/json", 0) == 0) {
          const auto body = parse_body(req);
          const auto& spec = body.contains("generator") ? body.at("generator") : body;
          if (spec.contains("subsample")) pairs.sample_size = spec.at("subsample").get<std::size_t>();
          if (spec.contains("pair_seed")) pairs.seed = spec.at("pair_seed").get<std::uint64_t>();
          ds.emplace(dataset_from_generator(spec, source));
        } else {
          ds.emplace(dataset_from_csv(req));
        }
        const auto total = pair_count(ds->size());
        if (total > pairs.pair_budget && pairs.sample_size == 0) throw PairBudgetError(total, pairs.pair_budget);

        auto entry = store.add(std::move(*ds), source, pairs);
        try {
          entry->profile();
          persist(*entry);
        } catch (...) {
          store.erase(entry->id());
          throw;
        }
        send_json(res, 201, dataset_summary(*entry));
      });
    });

    http.Get("/datasets/:id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] { send_json(res, 200, dataset_summary(*lookup(req))); });
    });

    http.Delete("/datasets/:id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] {
        const auto id = req.path_params.at("id");
        if (!store.erase(id)) throw HttpError{404, "not_found", "no dataset with id '" + id + "'"};
        res.status = 204;
      });
    });

    http.Get("/datasets/:id/curve", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] {
        const auto entry = lookup(req);
        const auto c = entry->curve(curve_points(req, *entry));
        if (req.has_param("format") && req.get_param_value("format") == "csv") {
          res.status = 200;
          res.set_content(curve_csv(*c), "text/csv");
        } else {
          send_json(res, 200, *c);
        }
      });
    });

    http.Get("/datasets/:id/radii", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] {
        std::ostringstream out;
        write_radii_csv(out, lookup(req)->profile());
        res.status = 200;
        res.set_content(out.str(), "text/csv");
      });
    });

    http.Post("/datasets/:id/fit", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] {
        const auto entry = lookup(req);
        const auto body = parse_body(req);
        if (!body.contains("range")) throw HttpError{400, "bad_request", "fit body needs a 'range'"};
        const auto range = scale_range_from_json(body.at("range"));
        std::optional<double> d_override;
        if (body.contains("d_override") && !body.at("d_override").is_null()) {
          d_override = body.at("d_override").get<double>();
        }
        const auto c = entry->curve(body_curve_points(body, *entry));
        auto fit = fit_segment(*c, range, d_override);
        if (body.value("model_scale", false)) {
          if (d_override) throw UsageError("model_scale cannot be combined with d_override");
          fit = bias::model_scale_fit(*c, entry->dataset().size(), fit);
        }
        send_json(res, 200, fit);
      });
    });

    http.Post("/datasets/:id/candidates", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] {
        const auto entry = lookup(req);
        const auto body = parse_body(req);
        const auto anchor = scale_range_from_json(body.at("anchor"));
        const auto d_list = body.at("d_list").get<std::vector<double>>();
        const auto c = entry->curve(body_curve_points(body, *entry));
        send_json(res, 200, json{{"lines", candidate_lines(*c, d_list, anchor)}});
      });
    });

    http.Post("/datasets/:id/scan", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] {
        const auto entry = lookup(req);
        const auto body = parse_body(req);
        ScanOptions scan_opts;
        scan_opts.width = body.value("width", scan_opts.width);
        scan_opts.stride = body.value("stride", scan_opts.stride);
        scan_opts.min_pairs = body.value("min_pairs", 0.0);
        if (body.contains("max_pairs")) scan_opts.max_pairs = body.at("max_pairs").get<double>();
        const auto c = entry->curve(body_curve_points(body, *entry));
        const auto windows = multiscale_scan(*c, scan_opts);
        json out = {{"windows", windows}, {"plateaus", find_plateaus(windows)}};
        try {
          out["neighbour_band"] = neighbour_band(*c);
          const auto fine = fine_scale_plateau(*c, scan_opts.width, scan_opts.stride);
          out["fine_plateau"] = fine ? json(*fine) : json(nullptr);
        } catch (const Error&) {
          out["neighbour_band"] = nullptr;
          out["fine_plateau"] = nullptr;
        }
        send_json(res, 200, out);
      });
    });

    http.Get("/bias/table", [](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] {
        if (!req.has_param("n")) throw HttpError{400, "bad_request", "query parameter 'n' is required"};
        const auto n = query_number<std::size_t>(req, "n", 0);
        const auto table = bias::bias_table(n, query_number<int>(req, "dmin", 1), query_number<int>(req, "dmax", 30));
        if (req.has_param("format") && req.get_param_value("format") == "csv") {
          std::ostringstream out;
          bias::write_table_csv(out, table);
          res.status = 200;
          res.set_content(out.str(), "text/csv");
        } else {
          send_json(res, 200, table);
        }
      });
    });

    http.Post("/bias/compensate", [](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 422, [&] {
        const auto body = parse_body(req);
        const auto n = body.at("n").get<std::size_t>();
        bias::InversionOptions inv;
        inv.mode = parse_mode(body.value("mode", std::string("integer")));
        inv.ceiling = body.value("ceiling", inv.ceiling);
        const auto comp = bias::compensate_fit(n, body.at("d_hat").get<double>(), body.at("h_hat").get<double>(), inv);
        json out = comp;
        const int centre = static_cast<int>(std::lround(comp.d_bar));
        out["table"] = bias::bias_table(n, std::max(1, centre - 2), centre + 2);
        out["requirement"] = bias::min_observations(comp.d_bar);
        send_json(res, 200, out);
      });
    });
  }
};

Server::Server(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->routes();
  if (impl_->options.static_dir && !impl_->http.set_mount_point("/", impl_->options.static_dir->string())) {
    throw IoError("static asset directory '" + impl_->options.static_dir->string() + "' does not exist");
  }
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound_port = port;
  bool ok = false;
  if (port == 0) {
    bound_port = impl_->http.bind_to_any_port(host);
    ok = bound_port > 0;
  } else {
    ok = impl_->http.bind_to_port(host, port);
  }
  if (!ok) {
    throw IoError("cannot bind to " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound_port;
}

void Server::listen() {
  if (!impl_->bound) throw UsageError("bind() must succeed before listen()");
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

bool Server::running() const { return impl_->http.is_running(); }

SessionStore& Server::store() noexcept { return impl_->store; }

} // namespace idde::service
