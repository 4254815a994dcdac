#pragma once

// CSV emission (fixed numeric format for bit-stable diffs) and the JSON
// config sidecar written next to every table.

#include <cstdio>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ottoring/common.hpp"

namespace ottoring {

/// 12 significant digits, '.' decimal separator, no locale surprises.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Comma-delimited, LF endings, one header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    for (size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
    n_cols_ = columns.size();
  }

  using Cell = std::variant<double, long, std::string>;

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != n_cols_) throw std::invalid_argument("CsvWriter: column count mismatch");
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      if (const double* d = std::get_if<double>(&cells[i]))
        out_ << format_number(*d);
      else if (const long* l = std::get_if<long>(&cells[i]))
        out_ << *l;
      else
        out_ << std::get<std::string>(cells[i]);
    }
    out_ << '\n';
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
  size_t n_cols_ = 0;
};

/// Echo of the fully resolved configuration, written once per experiment.
inline void write_json_sidecar(const std::string& path, const nlohmann::json& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json_sidecar: cannot open " + path);
  out << config.dump(2) << '\n';
}

}  // namespace ottoring
