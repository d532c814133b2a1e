#pragma once

#include "idde/coincidence.hpp"
#include "idde/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>

namespace idde::service {

struct ServiceOptions {
  PairOptions pairs{};
  // Curves larger than this are resampled unless the client asks otherwise.
  std::size_t default_curve_points = 2000;
  // Uploaded/generated datasets are also written here as <id>.csv.
  std::optional<std::filesystem::path> data_dir;
  // Static assets (the browser UI) mounted at "/".
  std::optional<std::filesystem::path> static_dir;
};

// A registered dataset. The radii profile is built at most once; concurrent
// callers block until the first computation finishes.
class DatasetEntry {
public:
  DatasetEntry(std::string id, Dataset dataset, std::string source, PairOptions pairs);

  const std::string& id() const noexcept { return id_; }
  const Dataset& dataset() const noexcept { return dataset_; }
  const std::string& source() const noexcept { return source_; }

  const RadiiProfile& profile() const;
  // points == 0 returns the raw curve; otherwise a resampled one. Cached.
  std::shared_ptr<const CorrelationCurve> curve(std::size_t points) const;

private:
  std::string id_;
  Dataset dataset_;
  std::string source_;
  PairOptions pairs_;
  mutable std::once_flag profile_once_;
  mutable std::optional<RadiiProfile> profile_;
  mutable std::mutex curve_mutex_;
  mutable std::map<std::size_t, std::shared_ptr<const CorrelationCurve>> curves_;
};

class SessionStore {
public:
  std::shared_ptr<DatasetEntry> add(Dataset dataset, std::string source, PairOptions pairs);
  std::shared_ptr<DatasetEntry> find(const std::string& id) const;
  bool erase(const std::string& id);
  std::size_t size() const;

private:
  std::string next_id();

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<DatasetEntry>> entries_;
  std::uint64_t counter_ = 0;
};

// Splits "host:port" (or "[v6]:port"). Throws UsageError when malformed.
std::pair<std::string, int> parse_bind_address(const std::string& address);

class Server {
public:
  explicit Server(ServiceOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds without serving yet; port 0 picks a free port, which is returned.
  // Throws IoError when the address cannot be bound.
  int bind(const std::string& host, int port);
  // Serves requests until stop() is called.
  void listen();
  void stop();
  bool running() const;

  SessionStore& store() noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace idde::service
