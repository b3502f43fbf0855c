// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace pirem {

/// One curve on a log-log plot: points, optional confidence band, legend label.
struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band_lo;  ///< empty = no band
  std::vector<double> band_hi;
  std::string label;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// Hand-rolled log-log SVG plot: axes box, decade ticks, polylines and
/// translucent bands. Returns the SVG document text.
std::string svg_loglog_plot(const std::vector<SvgSeries>& series, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            int width = 720, int height = 480);

}  // namespace pirem
