// SPDX-License-Identifier: Apache-2.0
#include "pirem/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pirem {

namespace {

struct LogAxis {
  double lo = 0.0, hi = 1.0;  // log10 range
  double px0 = 0.0, px1 = 1.0;
  double map(double v) const {
    double t = (std::log10(v) - lo) / (hi - lo);
    return px0 + t * (px1 - px0);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string tick_label(int decade) {
  std::ostringstream os;
  os << "1e" << decade;
  return os.str();
}

}  // namespace

std::string svg_loglog_plot(const std::vector<SvgSeries>& series, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel, int width,
                            int height) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const auto& s : series) {
    for (double v : s.x) {
      if (v > 0.0) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
      }
    }
    auto scan_y = [&](const std::vector<double>& ys) {
      for (double v : ys)
        if (v > 0.0 && std::isfinite(v)) {
          ymin = std::min(ymin, v);
          ymax = std::max(ymax, v);
        }
    };
    scan_y(s.y);
    scan_y(s.band_lo);
    scan_y(s.band_hi);
  }
  if (!(xmin < xmax) || !(ymin <= ymax)) throw std::invalid_argument("svg plot: no positive data");

  const double ml = 72, mr = 18, mt = 34, mb = 52;
  LogAxis X{std::log10(xmin), std::log10(xmax), ml, width - mr};
  LogAxis Y{std::log10(ymin) - 0.05, std::log10(ymax) + 0.05, height - mb, mt};
  if (X.hi == X.lo) X.hi = X.lo + 1.0;
  if (Y.hi == Y.lo) Y.hi = Y.lo + 1.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
     << "</text>\n";

  // axes box
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (width - ml - mr)
     << "\" height=\"" << (height - mt - mb)
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // decade ticks
  for (int dec = static_cast<int>(std::ceil(X.lo)); dec <= static_cast<int>(std::floor(X.hi));
       ++dec) {
    double px = X.map(std::pow(10.0, dec));
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << (height - mb) << "\" x2=\"" << fmt(px)
       << "\" y2=\"" << (height - mb + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(px) << "\" y=\"" << (height - mb + 18)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(dec) << "</text>\n";
  }
  for (int dec = static_cast<int>(std::ceil(Y.lo)); dec <= static_cast<int>(std::floor(Y.hi));
       ++dec) {
    double py = Y.map(std::pow(10.0, dec));
    os << "<line x1=\"" << (ml - 5) << "\" y1=\"" << fmt(py) << "\" x2=\"" << ml << "\" y2=\""
       << fmt(py) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (ml - 8) << "\" y=\"" << fmt(py + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(dec) << "</text>\n";
  }
  os << "<text x=\"" << width / 2 << "\" y=\"" << (height - 14)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
     << "transform=\"rotate(-90 16 " << height / 2 << ")\">" << ylabel << "</text>\n";

  int legend_y = mt + 16;
  for (const auto& s : series) {
    if (!s.band_lo.empty() && s.band_lo.size() == s.x.size() && s.band_hi.size() == s.x.size()) {
      os << "<polygon points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        os << fmt(X.map(s.x[i])) << "," << fmt(Y.map(std::max(s.band_hi[i], 1e-300))) << " ";
      for (std::size_t i = s.x.size(); i-- > 0;)
        os << fmt(X.map(s.x[i])) << "," << fmt(Y.map(std::max(s.band_lo[i], 1e-300))) << " ";
      os << "\" fill=\"" << s.color << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    }
    os << "<polyline points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << fmt(X.map(s.x[i])) << "," << fmt(Y.map(std::max(s.y[i], 1e-300))) << " ";
    os << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\""
       << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    os << "<line x1=\"" << (width - mr - 150) << "\" y1=\"" << legend_y << "\" x2=\""
       << (width - mr - 120) << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
       << "\" stroke-width=\"1.8\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    os << "<text x=\"" << (width - mr - 114) << "\" y=\"" << (legend_y + 4)
       << "\" font-size=\"11\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace pirem
