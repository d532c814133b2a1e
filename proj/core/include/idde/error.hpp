#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idde {

// Base for every error raised by the library. The category drives the CLI
// exit code and the HTTP status chosen by the service.
class Error : public std::runtime_error {
public:
  enum class Kind { Usage, Data, Io };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

// Invalid arguments or preconditions supplied by the caller.
class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error(Kind::Usage, what) {}
};

// The data itself cannot be analysed (parse failures, degenerate sets, ...).
class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(Kind::Data, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(Kind::Io, what) {}
};

// CSV parse failure. Rows and columns are 1-based and count physical records,
// header included.
class CsvError : public DataError {
public:
  CsvError(std::size_t row, std::size_t column, const std::string& what)
      : DataError("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t row_;
  std::size_t column_;
};

// Every pair distance is zero, so no log-log point exists.
class DegenerateDataError : public DataError {
public:
  explicit DegenerateDataError(const std::string& what) : DataError(what) {}
};

// The exact pair count exceeds the configured budget and no subsample size
// was requested.
class PairBudgetError : public DataError {
public:
  PairBudgetError(std::size_t pairs, std::size_t budget)
      : DataError(std::to_string(pairs) + " pairs exceed the pair budget of " + std::to_string(budget) +
                  "; request a pair subsample or raise the budget"),
        pairs_(pairs),
        budget_(budget) {}

  std::size_t pairs() const noexcept { return pairs_; }
  std::size_t budget() const noexcept { return budget_; }

private:
  std::size_t pairs_;
  std::size_t budget_;
};

} // namespace idde
