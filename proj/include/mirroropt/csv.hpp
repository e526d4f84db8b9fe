#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mirroropt/errors.hpp"

namespace mirroropt {

// Decimal with 17 significant digits: doubles round-trip exactly, so files
// produced from the same run are byte-identical.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
    columns_ = header.size();
  }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_) throw DimensionMismatch("csv row width mismatch");
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_double(values[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  size_t columns_;
};

}  // namespace mirroropt
