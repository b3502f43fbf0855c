// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pirem/quadrature.hpp"

namespace pirem {

// Real trigonometric basis with period 4L on the data cube [-L,L]^dx.
// Member 1 is the constant; every frequency pair after that is stored as one
// cosine followed by one sine. The family is orthogonal under Lebesgue
// measure on the medium cube [-2L,2L]^dx and is kept at unit sup-norm, with
// volume factors carried explicitly by the norms below.

/// Deterministic enumeration ell -> k(ell) in Z^dx: shells of constant
/// ||k||_inf, representatives in lexicographic order inside a shell, cosine
/// member labeled k and sine member labeled -k (so each pair is adjacent and
/// the positive label comes first).
class BasisIndexMap {
 public:
  explicit BasisIndexMap(int dx);

  /// Frequency label of the ell-th basis member (ell >= 1). Total function.
  std::vector<int> frequency_of(std::int64_t ell) const;

  /// Inverse of frequency_of on any prefix.
  std::int64_t index_of(const std::vector<int>& k) const;

  int dx() const { return dx_; }

 private:
  void extend_to_rep(std::int64_t rep_count) const;
  void extend_shell(int shell) const;

  int dx_;
  mutable std::vector<std::vector<int>> reps_;        // pair representatives in order
  mutable std::vector<std::int64_t> shell_rep_start_; // reps_ offset of each shell
  mutable int shells_done_ = -1;
};

/// Per-dimension index map, cached per thread (it grows lazily).
const BasisIndexMap& index_map(int dx);

/// k(ell) as a convenience free function.
std::vector<int> frequency_index(std::int64_t ell, int dx);

/// Value of basis member ell at x. x must lie in the medium cube
/// [-2L,2L]^dx (the natural domain of the periodic representation); outside
/// it a std::domain_error is thrown.
double basis_eval(std::int64_t ell, const Eigen::Ref<const Eigen::VectorXd>& x, double L);

/// Partial derivative d^alpha of basis member ell at x.
double basis_eval_deriv(std::int64_t ell, const std::vector<int>& alpha,
                        const Eigen::Ref<const Eigen::VectorXd>& x, double L);

/// Squared Lebesgue norm of member ell over the medium cube:
/// (4L)^dx for the constant, (4L)^dx / 2 otherwise.
double basis_norm_sq(std::int64_t ell, int dx, double L);

/// Coefficients of a vector-valued function on the truncated basis.
struct FourierCoeffs {
  int dy = 1;
  int dx = 1;
  std::int64_t m = 1;
  double L = 1.0;
  Eigen::MatrixXd z;  ///< dy x m, z(i, ell-1) multiplies basis member ell in output i

  FourierCoeffs() = default;
  FourierCoeffs(int dy_, std::int64_t m_, int dx_, double L_);

  /// f(x) in R^dy. Same domain rule as basis_eval.
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  void validate() const;
};

/// Sobolev weight ell^(2s/dx) attached to basis member ell.
double sobolev_weight(std::int64_t ell, int s, int dx);

/// sum_i sum_ell z_{i,ell}^2 ell^(2s/dx). Warns on stderr (does not throw)
/// when s < 2*dx.
double sobolev_norm_sq(const FourierCoeffs& f, int s);

/// Parseval sum sum_i sum_ell z_{i,ell}^2 * basis_norm_sq(ell); equals the
/// integral of ||f||^2 over the medium cube.
double l2_norm_sq_lebesgue(const FourierCoeffs& f);

/// Monte Carlo trajectory norm: mean over the given input sequences of
/// (1/T) sum_t ||f(X_t) - g(X_t)||^2. Throws on an empty set.
double l2_norm_sq_trajectory(const FourierCoeffs& f, const FourierCoeffs& g,
                             const std::vector<Eigen::MatrixXd>& trajectories);

/// Least-squares projection of a black-box target onto the first m basis
/// members under tensor Gauss-Legendre quadrature on the cube
/// [-box_halfwidth, box_halfwidth]^dx (defaults to the data cube [-L,L]^dx
/// when box_halfwidth <= 0). Throws if the quadrature Gram is singular.
FourierCoeffs project_function(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& target,
                               int dy, std::int64_t m, double L, int dx,
                               const QuadratureSpec& quad = {}, double box_halfwidth = 0.0);

/// CSV layout: header row "dy,m,dx,L", then dy rows of m coefficients,
/// 17 significant digits.
void save_coeffs_csv(const FourierCoeffs& f, std::ostream& os);
void save_coeffs_csv(const FourierCoeffs& f, const std::string& path);
FourierCoeffs load_coeffs_csv(std::istream& is);
FourierCoeffs load_coeffs_csv(const std::string& path);

}  // namespace pirem
