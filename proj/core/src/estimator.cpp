// SPDX-License-Identifier: Apache-2.0
#include "pirem/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "pirem/rng.hpp"

namespace pirem {

void FitConfig::validate(std::int64_t T) const {
  if (m < 1) throw std::invalid_argument("FitConfig: m must be >= 1");
  if (!(lambda_T >= 0.0) || !(lambda_sob >= 0.0) || !std::isfinite(lambda_T) ||
      !std::isfinite(lambda_sob))
    throw std::invalid_argument("FitConfig: penalties must be finite and >= 0");
  if (lambda_T == 0.0 && lambda_sob == 0.0 && m > T)
    throw std::invalid_argument(
        "FitConfig: identifiability guard: m exceeds sample count with both penalties zero");
}

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& X, std::int64_t m, double L) {
  const Eigen::Index T = X.rows();
  Eigen::MatrixXd Phi(T, m);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd x = X.row(t);
    for (std::int64_t ell = 1; ell <= m; ++ell)
      Phi(t, static_cast<Eigen::Index>(ell - 1)) = basis_eval(ell, x, L);
  }
  return Phi;
}

FitResult fit_erm(const TrajectoryDataset& data, const FitConfig& cfg, const OperatorGram* gram) {
  cfg.validate(data.T);
  if (!data.X.allFinite() || !data.Y.allFinite())
    throw std::invalid_argument("fit_erm: non-finite design or response");
  if (cfg.lambda_T > 0.0 && gram == nullptr)
    throw std::invalid_argument("fit_erm: lambda_T > 0 requires an operator gram");
  if (gram && (gram->m != cfg.m || gram->dy != data.dy))
    throw std::invalid_argument("fit_erm: operator gram shape mismatch");

  const double T = static_cast<double>(data.T);
  Eigen::MatrixXd Phi = design_matrix(data.X, cfg.m, data.L);
  Eigen::MatrixXd G = Phi.transpose() * Phi / T;

  Eigen::VectorXd ws(cfg.m);
  for (std::int64_t ell = 1; ell <= cfg.m; ++ell)
    ws[static_cast<Eigen::Index>(ell - 1)] = sobolev_weight(ell, cfg.s, data.dx);

  FitResult result;
  result.coeffs = FourierCoeffs(data.dy, cfg.m, data.dx, data.L);

  double cond_max = 0.0;
  for (int i = 0; i < data.dy; ++i) {
    Eigen::MatrixXd M = G;
    M += (cfg.lambda_sob * ws).asDiagonal();
    if (gram) M += cfg.lambda_T * gram->Q[static_cast<std::size_t>(i)];
    Eigen::VectorXd rhs = Phi.transpose() * data.Y.col(i) / T;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    bool degenerate = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                      ldlt.vectorD().minCoeff() <= 0.0 ||
                      ldlt.vectorD().minCoeff() < 1e-14 * ldlt.vectorD().maxCoeff();
    if (degenerate) {
      if (cfg.lambda_T == 0.0 && cfg.lambda_sob == 0.0)
        throw std::runtime_error(
            "fit_erm: singular normal equations (identifiability guard: rank-deficient design "
            "with both penalties zero)");
      double jitter = 1e-12 * M.trace() / static_cast<double>(cfg.m);
      M += jitter * Eigen::MatrixXd::Identity(cfg.m, cfg.m);
      ldlt.compute(M);
      if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("fit_erm: factorization failed after jitter");
    }
    result.coeffs.z.row(i) = ldlt.solve(rhs).transpose();

    double dmax = ldlt.vectorD().maxCoeff();
    double dmin = std::max(ldlt.vectorD().minCoeff(), 1e-300);
    cond_max = std::max(cond_max, dmax / dmin);
  }
  result.gram_cond = cond_max;

  // re-evaluate the objective at the solution
  Eigen::MatrixXd resid = data.Y - Phi * result.coeffs.z.transpose();
  double fit_term = resid.squaredNorm() / T;
  result.residual_norm = std::sqrt(fit_term);
  result.sobolev_norm_sq = 0.0;
  for (std::int64_t ell = 1; ell <= cfg.m; ++ell)
    result.sobolev_norm_sq +=
        ws[static_cast<Eigen::Index>(ell - 1)] *
        result.coeffs.z.col(static_cast<Eigen::Index>(ell - 1)).squaredNorm();
  result.regularizer = 0.0;
  if (gram)
    for (int i = 0; i < data.dy; ++i)
      result.regularizer += result.coeffs.z.row(i) *
                            gram->Q[static_cast<std::size_t>(i)] *
                            result.coeffs.z.row(i).transpose();
  result.objective = fit_term + cfg.lambda_sob * result.sobolev_norm_sq +
                     cfg.lambda_T * result.regularizer;
  return result;
}

RiskEstimate excess_risk(const FourierCoeffs& fhat,
                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fstar,
                         const DynSystem& sys, std::int64_t T_eval, int n_traj,
                         std::uint64_t seed) {
  if (n_traj < 2) throw std::invalid_argument("excess_risk: n_traj must be >= 2");
  Eigen::MatrixXd Phi;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n_traj));
  for (int j = 0; j < n_traj; ++j) {
    TrajectoryDataset d =
        simulate_trajectory(sys, T_eval, derive_seed(seed, 0xe7a1, static_cast<std::uint64_t>(j)));
    Phi = design_matrix(d.X, fhat.m, fhat.L);
    Eigen::MatrixXd pred = Phi * fhat.z.transpose();  // T x dy
    double acc = 0.0;
    for (std::int64_t t = 0; t < T_eval; ++t) {
      Eigen::VectorXd x = d.X.row(t);
      acc += (pred.row(t).transpose() - fstar(x)).squaredNorm();
    }
    values.push_back(acc / static_cast<double>(T_eval));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n_traj;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= (n_traj - 1);
  RiskEstimate est;
  est.estimate = mean;
  est.std_error = std::sqrt(var / n_traj);
  est.n_traj = n_traj;
  return est;
}

RiskEstimate excess_risk(const FourierCoeffs& fhat, const FourierCoeffs& fstar,
                         const DynSystem& sys, std::int64_t T_eval, int n_traj,
                         std::uint64_t seed) {
  if (fhat.dx != fstar.dx || fhat.dy != fstar.dy || fhat.L != fstar.L)
    throw std::invalid_argument("excess_risk: shape mismatch between fhat and fstar");
  if (n_traj < 2) throw std::invalid_argument("excess_risk: n_traj must be >= 2");
  // evaluate the difference through one design matrix, so identical
  // coefficients give exactly zero
  const std::int64_t m = std::max(fhat.m, fstar.m);
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(fhat.dy, m);
  dz.leftCols(fhat.m) = fhat.z;
  dz.leftCols(fstar.m) -= fstar.z;

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n_traj));
  for (int j = 0; j < n_traj; ++j) {
    TrajectoryDataset d =
        simulate_trajectory(sys, T_eval, derive_seed(seed, 0xe7a1, static_cast<std::uint64_t>(j)));
    Eigen::MatrixXd Phi = design_matrix(d.X, m, fhat.L);
    values.push_back((Phi * dz.transpose()).squaredNorm() / static_cast<double>(T_eval));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n_traj;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= (n_traj - 1);
  RiskEstimate est;
  est.estimate = mean;
  est.std_error = std::sqrt(var / n_traj);
  est.n_traj = n_traj;
  return est;
}

double empirical_moc_linear(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& W) {
  if (Phi.rows() != W.rows()) throw std::invalid_argument("empirical_moc_linear: row mismatch");
  if (!Phi.allFinite() || !W.allFinite())
    throw std::invalid_argument("empirical_moc_linear: non-finite input");
  const double T = static_cast<double>(Phi.rows());
  Eigen::MatrixXd G = Phi.transpose() * Phi;
  // pseudoinverse through the symmetric eigendecomposition
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  const Eigen::VectorXd& d = eig.eigenvalues();
  double cutoff = d.maxCoeff() * 1e-12;
  double total = 0.0;
  for (Eigen::Index i = 0; i < W.cols(); ++i) {
    Eigen::VectorXd a = Phi.transpose() * W.col(i);
    Eigen::VectorXd proj = eig.eigenvectors().transpose() * a;
    for (Eigen::Index j = 0; j < d.size(); ++j)
      if (d[j] > cutoff) total += proj[j] * proj[j] / d[j];
  }
  return 4.0 * total / T;
}

double empirical_moc_cover(const std::vector<FourierCoeffs>& cover, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& W) {
  if (cover.empty()) throw std::invalid_argument("empirical_moc_cover: empty cover");
  const double T = static_cast<double>(X.rows());
  double best = 0.0;  // the class contains 0, whose value is 0
  for (const FourierCoeffs& f : cover) {
    Eigen::MatrixXd Phi = design_matrix(X, f.m, f.L);
    Eigen::MatrixXd vals = Phi * f.z.transpose();  // T x dy
    double acc = 0.0;
    for (Eigen::Index t = 0; t < X.rows(); ++t)
      acc += 4.0 * W.row(t).dot(vals.row(t)) - vals.row(t).squaredNorm();
    best = std::max(best, acc / T);
  }
  return best;
}

}  // namespace pirem
