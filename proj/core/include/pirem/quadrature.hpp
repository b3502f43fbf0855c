// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace pirem {

/// One-dimensional Gauss-Legendre rule on [-1,1].
struct QuadRule1D {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Nodes and weights by Newton iteration on the Legendre polynomial.
QuadRule1D gauss_legendre(int n);

/// Tensor-product rule on the cube [-half_width, half_width]^dx.
/// nodes is N x dx with N = per_axis^dx.
struct TensorQuad {
  Eigen::MatrixXd nodes;
  Eigen::VectorXd weights;
};

TensorQuad tensor_gauss_legendre(int per_axis, int dx, double half_width);

/// Per-axis node count heuristic for integrating products of the first m
/// basis members: 4 * m^(1/dx), floored at 8.
int default_nodes_per_axis(std::int64_t m, int dx);

struct QuadratureSpec {
  int nodes_per_axis = 0;  ///< 0 = use default_nodes_per_axis
};

}  // namespace pirem
