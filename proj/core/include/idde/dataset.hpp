#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace idde {

// N observations in D ambient coordinates, stored row-major. Immutable after
// construction; the constructor enforces N >= 2, D >= 1 and finite entries.
class Dataset {
public:
  Dataset(std::vector<double> values, std::size_t rows, std::size_t cols);

  std::size_t size() const noexcept { return rows_; }
  std::size_t dimension() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  double operator()(std::size_t i, std::size_t k) const noexcept { return values_[i * cols_ + k]; }

  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

private:
  std::vector<double> values_;
  std::size_t rows_;
  std::size_t cols_;
};

enum class WindowMode { Disjoint, Sliding };

struct WindowConfig {
  std::size_t width = 1;
  WindowMode mode = WindowMode::Disjoint;
  std::size_t stride = 1; // sliding mode only
};

struct CsvOptions {
  char delimiter = ',';
  bool has_header = false;
  // Zero-based column indices to keep, in output order. Empty keeps all.
  std::vector<std::size_t> columns;
};

// Parses an RFC-4180 style numeric table. Errors carry the 1-based record and
// field position of the offending cell.
Dataset load_csv(std::istream& source, const CsvOptions& options = {});
Dataset load_csv_file(const std::filesystem::path& path, const CsvOptions& options = {});

// Reads a single numeric column as a flat series (for windowing). Rows may
// have any number of fields as long as the selected column is present.
std::vector<double> load_series(std::istream& source, const CsvOptions& options = {}, std::size_t column = 0);

// Cuts a scalar series into patterns of `cfg.width` consecutive values.
// Disjoint: floor(L / width) rows, trailing remainder dropped.
// Sliding: floor((L - width) / stride) + 1 rows.
Dataset window_series(std::span<const double> series, const WindowConfig& cfg);

void write_csv(std::ostream& out, const Dataset& ds, char delimiter = ',');

// ---------------------------------------------------------------------------
// Synthetic sources. All are pure functions of their arguments and the seed.

// [sin 2piU, cos 2piU, 0.1 V]: a 2-D band of area 0.2*pi wrapped on a ring.
Dataset gen_circle(std::size_t n, std::uint64_t seed);

// [sin 2piU, cos 2piU, 0.1 sin 300piU]: a 1-D curve of length ~60.
Dataset gen_sinusoid(std::size_t n, std::uint64_t seed);

struct HypercubeOptions {
  // Apply a seeded random orthonormal DxD rotation after zero padding.
  bool rotate = false;
};

// First d coordinates i.i.d. uniform(0,1); the remaining D - d are zero.
Dataset gen_hypercube(std::size_t n, std::size_t d, std::size_t ambient, std::uint64_t seed,
                      HypercubeOptions options = {});

// t * direction + e, with t ~ U(0,1) and e uniform in [-a, a]^D.
Dataset gen_noisy_segment(std::size_t n, std::span<const double> direction, double noise_amplitude,
                          std::uint64_t seed);

} // namespace idde
