// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pirem {

/// Formats a double with 17 significant digits (round-trip exact).
std::string fmt_g17(double v);

/// Minimal CSV writer with a fixed header; every cell is written through
/// fmt_g17 unless it is a preformatted string.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void row_numeric(const std::vector<double>& cells);

 private:
  std::ostream& os_;
  std::size_t width_;
};

/// Splits one CSV line (no quoting; the formats here never need it).
std::vector<std::string> csv_split(const std::string& line);

}  // namespace pirem
