#include "idde/dataset.hpp"

#include "idde/error.hpp"

#include <cmath>
#include <ostream>

#include "format.hpp"

namespace idde {

Dataset::Dataset(std::vector<double> values, std::size_t rows, std::size_t cols)
    : values_(std::move(values)), rows_(rows), cols_(cols) {
  if (rows_ < 2) {
    throw DataError("a dataset needs at least 2 observations, got " + std::to_string(rows_));
  }
  if (cols_ < 1) {
    throw DataError("a dataset needs at least 1 coordinate");
  }
  if (values_.size() != rows_ * cols_) {
    throw UsageError("dataset storage holds " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(rows_ * cols_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite value at row " + std::to_string(i / cols_ + 1) + ", column " +
                      std::to_string(i % cols_ + 1));
    }
  }
}

Dataset window_series(std::span<const double> series, const WindowConfig& cfg) {
  if (cfg.width < 1) {
    throw UsageError("window width must be >= 1");
  }
  if (cfg.mode == WindowMode::Sliding && cfg.stride < 1) {
    throw UsageError("window stride must be >= 1");
  }
  const std::size_t len = series.size();
  if (len < cfg.width) {
    throw DataError("series of length " + std::to_string(len) + " is shorter than the window width " +
                    std::to_string(cfg.width));
  }

  const std::size_t step = cfg.mode == WindowMode::Disjoint ? cfg.width : cfg.stride;
  const std::size_t rows = cfg.mode == WindowMode::Disjoint ? len / cfg.width : (len - cfg.width) / cfg.stride + 1;

  std::vector<double> values;
  values.reserve(rows * cfg.width);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto first = series.begin() + static_cast<std::ptrdiff_t>(r * step);
    values.insert(values.end(), first, first + static_cast<std::ptrdiff_t>(cfg.width));
  }
  return Dataset(std::move(values), rows, cfg.width);
}

void write_csv(std::ostream& out, const Dataset& ds, char delimiter) {
  std::string line;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    line.clear();
    const auto row = ds.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) line.push_back(delimiter);
      detail::append_double(line, row[k]);
    }
    line.push_back('\n');
    out << line;
  }
}

} // namespace idde
