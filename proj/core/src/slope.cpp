// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <stdexcept>

#include "pirem/harness.hpp"

namespace pirem {

double t_quantile_975(int df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                 2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                 2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) throw std::invalid_argument("t_quantile_975: df must be >= 1");
  if (df <= 30) return table[df - 1];
  return 1.96 + 2.5 / df;
}

SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("slope_fit: need at least 3 points");
  const int n = static_cast<int>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [T, risk] : points) {
    if (!(T > 0.0) || !(risk > 0.0))
      throw std::invalid_argument("slope_fit: points must be strictly positive");
    sx += std::log(T);
    sy += std::log(risk);
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [T, risk] : points) {
    double ux = std::log(T) - mx;
    sxx += ux * ux;
    sxy += ux * (std::log(risk) - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("slope_fit: degenerate abscissae");

  SlopeFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [T, risk] : points) {
    double resid = std::log(risk) - (fit.intercept + fit.slope * std::log(T));
    rss += resid * resid;
  }
  fit.rss = rss;
  if (n > 2) {
    double var = rss / (n - 2) / sxx;
    fit.ci_half = t_quantile_975(n - 2) * std::sqrt(var);
  }
  return fit;
}

std::int64_t TruncationSchedule::at(std::int64_t T) const {
  double raw = coef * std::pow(static_cast<double>(T), power);
  auto m = static_cast<std::int64_t>(std::llround(raw));
  return std::clamp(m, lo, hi);
}

}  // namespace pirem
