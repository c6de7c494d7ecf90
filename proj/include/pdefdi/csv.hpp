#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "pdefdi/errors.hpp"

namespace pdefdi {

// All emitted CSV numbers use 9 significant digits so runs diff byte-exact.
inline std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw ConfigError("cannot open output file: " + path);
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) out_ << ',';
      out_ << header[c];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (c) out_ << ',';
      out_ << fmt_g9(values[c]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace pdefdi
