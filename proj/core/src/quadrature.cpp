// SPDX-License-Identifier: Apache-2.0
#include "pirem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace pirem {

QuadRule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadRule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = 3.14159265358979323846;
  // roots of P_n by Newton iteration from the Chebyshev-based initial guess
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // evaluate P_n and P_n' by the three-term recurrence
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double p = (n == 0) ? 1.0 : p1;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dxn = p / dp;
      x -= dxn;
      if (std::abs(dxn) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

TensorQuad tensor_gauss_legendre(int per_axis, int dx, double half_width) {
  if (dx < 1) throw std::invalid_argument("tensor_gauss_legendre: dx must be >= 1");
  double count = std::pow(static_cast<double>(per_axis), dx);
  if (count > 4e6) throw std::invalid_argument("tensor_gauss_legendre: node count too large");
  QuadRule1D r = gauss_legendre(per_axis);
  const auto n_total = static_cast<Eigen::Index>(count + 0.5);
  TensorQuad q;
  q.nodes.resize(n_total, dx);
  q.weights.resize(n_total);
  std::vector<int> idx(dx, 0);
  for (Eigen::Index node = 0; node < n_total; ++node) {
    double w = 1.0;
    for (int j = 0; j < dx; ++j) {
      q.nodes(node, j) = half_width * r.nodes[idx[j]];
      w *= half_width * r.weights[idx[j]];
    }
    q.weights[node] = w;
    for (int j = dx - 1; j >= 0; --j) {
      if (++idx[j] < per_axis) break;
      idx[j] = 0;
    }
  }
  return q;
}

int default_nodes_per_axis(std::int64_t m, int dx) {
  double per = 4.0 * std::pow(static_cast<double>(m), 1.0 / dx);
  int n = static_cast<int>(std::ceil(per));
  return n < 8 ? 8 : n;
}

}  // namespace pirem
