#include "idde/dataset.hpp"
#include "idde/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <string_view>

namespace idde {
namespace {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0; // physical line where the record starts
};

// Reads one RFC-4180 record. Quoted fields may contain delimiters, doubled
// quotes and line breaks. Returns false at end of input.
bool read_record(std::istream& in, char delim, Record& rec, std::size_t& line_no) {
  rec.fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  rec.line = line_no + 1;

  int ch;
  while ((ch = in.get()) != std::char_traits<char>::eof()) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == delim) {
      rec.fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      ++line_no;
      rec.fields.push_back(std::move(field));
      return true;
    } else if (c == '\n') {
      ++line_no;
      rec.fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) {
    throw CsvError(rec.line, rec.fields.size() + 1, "unterminated quoted field");
  }
  if (!any) return false;
  ++line_no;
  rec.fields.push_back(std::move(field));
  return true;
}

bool is_blank(const Record& rec) {
  if (rec.fields.size() != 1) return false;
  return rec.fields[0].find_first_not_of(" \t") == std::string::npos;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& text, std::size_t row, std::size_t col) {
  std::string_view s = trim(text);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw CsvError(row, col, "non-numeric cell '" + text + "'");
  }
  return value;
}

void skip_bom(std::istream& in) {
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
    if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
      throw CsvError(1, 1, "invalid byte sequence at start of input");
    }
  }
}

} // namespace

Dataset load_csv(std::istream& source, const CsvOptions& options) {
  skip_bom(source);
  Record rec;
  std::size_t line_no = 0;
  std::size_t expected_fields = 0;
  std::size_t rows = 0;
  std::size_t last_line = 0;
  bool header_pending = options.has_header;
  std::vector<double> values;

  while (read_record(source, options.delimiter, rec, line_no)) {
    if (is_blank(rec)) continue;
    last_line = rec.line;
    if (expected_fields == 0) {
      expected_fields = rec.fields.size();
      for (std::size_t c : options.columns) {
        if (c >= expected_fields) {
          throw CsvError(rec.line, c + 1,
                         "selected column " + std::to_string(c) + " is out of range (record has " +
                             std::to_string(expected_fields) + " fields)");
        }
      }
    } else if (rec.fields.size() != expected_fields) {
      throw CsvError(rec.line, std::min(rec.fields.size(), expected_fields) + 1,
                     "ragged row: expected " + std::to_string(expected_fields) + " fields, got " +
                         std::to_string(rec.fields.size()));
    }
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (options.columns.empty()) {
      for (std::size_t c = 0; c < rec.fields.size(); ++c) {
        values.push_back(parse_cell(rec.fields[c], rec.line, c + 1));
      }
    } else {
      for (std::size_t c : options.columns) {
        values.push_back(parse_cell(rec.fields[c], rec.line, c + 1));
      }
    }
    ++rows;
  }
  if (rows < 2) {
    throw CsvError(last_line == 0 ? 1 : last_line, 1,
                   "at least 2 data rows are required, found " + std::to_string(rows));
  }
  const std::size_t cols = options.columns.empty() ? expected_fields : options.columns.size();
  return Dataset(std::move(values), rows, cols);
}

std::vector<double> load_series(std::istream& source, const CsvOptions& options, std::size_t column) {
  skip_bom(source);
  Record rec;
  std::size_t line_no = 0;
  bool header_pending = options.has_header;
  std::vector<double> series;
  while (read_record(source, options.delimiter, rec, line_no)) {
    if (is_blank(rec)) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (column >= rec.fields.size()) {
      throw CsvError(rec.line, column + 1, "missing series column");
    }
    series.push_back(parse_cell(rec.fields[column], rec.line, column + 1));
  }
  return series;
}

Dataset load_csv_file(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  return load_csv(in, options);
}

} // namespace idde
