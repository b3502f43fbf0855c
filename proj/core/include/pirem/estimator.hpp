// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "pirem/data_process.hpp"
#include "pirem/pde_operator.hpp"

namespace pirem {

struct FitConfig {
  std::int64_t m = 1;
  double lambda_T = 0.0;    ///< physics penalty
  double lambda_sob = 0.0;  ///< Sobolev ridge (the ball constraint in penalty form)
  int s = 2;                ///< Sobolev order for the ridge weights
  double tol = 1e-10;       ///< solver tolerance (optimality certificate scale)

  void validate(std::int64_t T) const;
};

struct FitResult {
  FourierCoeffs coeffs;
  double objective = 0.0;      ///< re-evaluated fit objective at the solution
  double residual_norm = 0.0;  ///< sqrt((1/T) sum ||Y_t - fhat(X_t)||^2)
  double gram_cond = 0.0;      ///< condition estimate of the normal-equation matrix
  double sobolev_norm_sq = 0.0;
  double regularizer = 0.0;    ///< z' Q z at the solution (0 when no gram given)
};

/// Design matrix Phi with Phi(t, ell-1) = basis member ell at X_t.
Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& X, std::int64_t m, double L);

/// Regularized least squares over the truncated basis: per output i solve
///   (Phi'Phi/T + lambda_sob W_s + lambda_T Q_i) z_i = Phi'y_i / T
/// by LDLT with a jitter retry of 1e-12 tr(M)/m on near-singular systems.
/// gram may be null when lambda_T == 0. Throws when both penalties vanish
/// and m exceeds the sample count (identifiability guard).
FitResult fit_erm(const TrajectoryDataset& data, const FitConfig& cfg,
                  const OperatorGram* gram = nullptr);

struct RiskEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int n_traj = 0;
};

/// Monte Carlo excess risk ||fhat - fstar||^2 under the trajectory law:
/// mean over n_traj fresh trajectories of (1/T_eval) sum_t ||fhat - fstar||^2,
/// standard error from the trajectory-level sample variance.
RiskEstimate excess_risk(const FourierCoeffs& fhat,
                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fstar,
                         const DynSystem& sys, std::int64_t T_eval, int n_traj,
                         std::uint64_t seed);
RiskEstimate excess_risk(const FourierCoeffs& fhat, const FourierCoeffs& fstar,
                         const DynSystem& sys, std::int64_t T_eval, int n_traj,
                         std::uint64_t seed);

/// Martingale offset complexity of the unconstrained linear span:
///   sup_z (1/T) sum_t [ 4<W_t, Phi(X_t) z> - ||Phi(X_t) z||^2 ]
/// = (4/T) sum_i a_i' G^+ a_i with a_i = Phi' w_i and G = Phi'Phi.
double empirical_moc_linear(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& W);

/// Finite-class version: max over the cover of the same functional, floored
/// at zero (the class contains 0 by convention).
double empirical_moc_cover(const std::vector<FourierCoeffs>& cover, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& W);

}  // namespace pirem
