// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "pirem/estimator.hpp"
#include "pirem/rng.hpp"

using namespace pirem;

namespace {

DynSystem contraction_system(double L = 0.25, double sigma = 0.1) {
  return DynSystem::make(1, L, sigma, [](const Eigen::VectorXd& x) { return (0.5 * x).eval(); });
}

/// Max of (1/T)(4 a'z - z'Gz) over the grid z in [-5,5]^3 with step `step`:
/// exhaustive over (z2, z3); along z1 the objective is a concave parabola, so
/// the grid maximum sits at the grid neighbors of the vertex.
double moc_grid_search(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& w, double step) {
  const double T = static_cast<double>(Phi.rows());
  Eigen::Matrix3d G = (Phi.transpose() * Phi);
  Eigen::Vector3d a = Phi.transpose() * w;
  const double lo = -5.0, hi = 5.0;
  const auto n = static_cast<std::int64_t>(std::llround((hi - lo) / step)) + 1;
  auto snap = [&](double v) {
    double idx = std::clamp(std::round((v - lo) / step), 0.0, static_cast<double>(n - 1));
    return lo + idx * step;
  };
  double best = -1e300;
  for (std::int64_t i2 = 0; i2 < n; ++i2) {
    double z2 = lo + static_cast<double>(i2) * step;
    for (std::int64_t i3 = 0; i3 < n; ++i3) {
      double z3 = lo + static_cast<double>(i3) * step;
      double lin = 4.0 * a[0] - 2.0 * (G(0, 1) * z2 + G(0, 2) * z3);
      double vertex = lin / (2.0 * G(0, 0));
      for (double z1 : {snap(vertex - step), snap(vertex), snap(vertex + step), lo, hi}) {
        Eigen::Vector3d z(z1, z2, z3);
        double val = (4.0 * a.dot(z) - z.dot(G * z)) / T;
        best = std::max(best, val);
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("fit config validation and identifiability guard") {
  FitConfig cfg;
  cfg.m = 10;
  CHECK_THROWS_AS(cfg.validate(5), std::invalid_argument);  // m > T, both penalties zero
  cfg.lambda_sob = 1e-8;
  CHECK_NOTHROW(cfg.validate(5));
  cfg.lambda_T = -1.0;
  CHECK_THROWS_AS(cfg.validate(100), std::invalid_argument);
}

TEST_CASE("zero response gives the zero fit") {
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 128, 5);
  d.Y.setZero();
  FitConfig cfg;
  cfg.m = 8;
  cfg.lambda_sob = 1e-6;
  OperatorGram gram = operator_gram(LinearDiffOp::laplacian(1, 1), cfg.m, 1, sys.L);
  cfg.lambda_T = 0.01;
  FitResult fit = fit_erm(d, cfg, &gram);
  CHECK(fit.coeffs.z.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unpenalized fit matches the pseudoinverse solution") {
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 512, 6);
  FitConfig cfg;
  cfg.m = 6;
  FitResult fit = fit_erm(d, cfg, nullptr);

  Eigen::MatrixXd Phi = design_matrix(d.X, cfg.m, sys.L);
  Eigen::VectorXd oracle = Phi.completeOrthogonalDecomposition().solve(d.Y.col(0));
  CHECK((fit.coeffs.z.row(0).transpose() - oracle).norm() / oracle.norm() < 1e-8);
}

TEST_CASE("huge physics penalty drives the regularizer to its floor") {
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 512, 7);
  FitConfig cfg;
  cfg.m = 8;
  cfg.lambda_T = 1e12;
  RegMeasure measure;
  measure.kind = RegMeasure::Kind::QuadratureOnX;
  OperatorGram gram = operator_gram(LinearDiffOp::laplacian(1, 1), cfg.m, 1, sys.L, measure);
  FitResult fit = fit_erm(d, cfg, &gram);
  CHECK(fit.regularizer <= 1e-8);
}

TEST_CASE("optimality certificate: the normal-equation gradient vanishes") {
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 256, 8);
  FitConfig cfg;
  cfg.m = 10;
  cfg.lambda_T = 1e-3;
  cfg.lambda_sob = 1e-7;
  OperatorGram gram = operator_gram(LinearDiffOp::laplacian(1, 1), cfg.m, 1, sys.L);
  FitResult fit = fit_erm(d, cfg, &gram);

  const double T = static_cast<double>(d.T);
  Eigen::MatrixXd Phi = design_matrix(d.X, cfg.m, sys.L);
  Eigen::MatrixXd M = Phi.transpose() * Phi / T;
  for (std::int64_t ell = 1; ell <= cfg.m; ++ell)
    M(ell - 1, ell - 1) += cfg.lambda_sob * sobolev_weight(ell, cfg.s, 1);
  M += cfg.lambda_T * gram.Q[0];
  Eigen::VectorXd grad = 2.0 * (M * fit.coeffs.z.row(0).transpose() - Phi.transpose() * d.Y.col(0) / T);
  double z_norm = fit.coeffs.z.row(0).norm();
  CHECK(grad.norm() <= 1e-8 * (1.0 + z_norm) * M.norm());
}

TEST_CASE("training error is non-decreasing in the physics penalty") {
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 256, 9);
  OperatorGram gram = operator_gram(LinearDiffOp::laplacian(1, 1), 10, 1, sys.L);
  double prev = -1.0;
  for (double lam : {0.0, 1e-4, 1e-2, 1.0, 100.0}) {
    FitConfig cfg;
    cfg.m = 10;
    cfg.lambda_T = lam;
    cfg.lambda_sob = 1e-10;
    FitResult fit = fit_erm(d, cfg, lam > 0.0 ? &gram : nullptr);
    CHECK(fit.residual_norm >= prev - 1e-12);
    prev = fit.residual_norm;
  }
}

TEST_CASE("multi-output fit stacks independent scalar fits") {
  // build a dy = 2 dataset by pairing two scalar systems on the same inputs
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 300, 10);
  TrajectoryDataset stacked = d;
  stacked.dy = 2;
  stacked.Y.conservativeResize(d.T, 2);
  stacked.Y.col(1) = d.Y.col(0).cwiseProduct(d.X.col(0));  // any second response
  stacked.W = Eigen::MatrixXd::Zero(d.T, 2);

  FitConfig cfg;
  cfg.m = 7;
  cfg.lambda_T = 1e-3;
  cfg.lambda_sob = 1e-8;
  OperatorGram gram2 = operator_gram(LinearDiffOp::laplacian(2, 1), cfg.m, 1, sys.L);
  FitResult joint = fit_erm(stacked, cfg, &gram2);

  OperatorGram gram1 = operator_gram(LinearDiffOp::laplacian(1, 1), cfg.m, 1, sys.L);
  for (int i = 0; i < 2; ++i) {
    TrajectoryDataset scalar = d;
    scalar.dy = 1;
    scalar.Y = stacked.Y.col(i);
    scalar.W = Eigen::MatrixXd::Zero(d.T, 1);
    FitResult single = fit_erm(scalar, cfg, &gram1);
    CHECK((joint.coeffs.z.row(i) - single.coeffs.z.row(0)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("singular unpenalized system names the identifiability guard") {
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 64, 11);
  // duplicate times: make the design rank deficient by zeroing the inputs
  d.X.setZero();
  FitConfig cfg;
  cfg.m = 4;
  try {
    fit_erm(d, cfg, nullptr);
    FAIL("expected a throw");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("identifiability") != std::string::npos);
  }
}

TEST_CASE("excess risk: exact zero, constant shift, cosine moment") {
  DynSystem sys = contraction_system(0.5, 0.15);
  FourierCoeffs f(1, 4, 1, 0.5);
  f.z << 0.1, 0.2, -0.05, 0.03;
  RiskEstimate same = excess_risk(f, f, sys, 256, 3, 21);
  CHECK(same.estimate == 0.0);
  CHECK(same.std_error == 0.0);

  FourierCoeffs g = f;
  g.z(0, 0) += 0.25;
  RiskEstimate shifted = excess_risk(f, g, sys, 256, 3, 22);
  CHECK(shifted.estimate == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(shifted.std_error <= 1e-15);

  // single-cosine difference under a near-uniform iid surrogate law
  DynSystem surrogate = DynSystem::make(
      1, 1.0, 10.0, [](const Eigen::VectorXd& x) { return (0.0 * x).eval(); });
  FourierCoeffs a(1, 2, 1, 1.0), b(1, 2, 1, 1.0);
  a.z(0, 1) = 1.0;
  RiskEstimate est = excess_risk(a, b, surrogate, 2000, 8, 23);
  CHECK(std::abs(est.estimate - 0.5) < 3.0 * est.std_error + 0.01);
}

TEST_CASE("empirical MOC closed form") {
  SUBCASE("zero noise gives exactly zero") {
    Rng rng(31);
    Eigen::MatrixXd Phi(6, 3);
    for (int t = 0; t < 6; ++t)
      for (int j = 0; j < 3; ++j) Phi(t, j) = rng.uniform(-1.0, 1.0);
    CHECK(empirical_moc_linear(Phi, Eigen::MatrixXd::Zero(6, 1)) == 0.0);
  }
  SUBCASE("scalar case matches the one-dimensional formula") {
    Rng rng(32);
    Eigen::MatrixXd Phi(10, 1);
    Eigen::MatrixXd W(10, 1);
    for (int t = 0; t < 10; ++t) {
      Phi(t, 0) = rng.uniform(-1.0, 1.0);
      W(t, 0) = rng.gaussian(0.3);
    }
    double num = (Phi.col(0).dot(W.col(0)));
    double expected = 4.0 / 10.0 * num * num / Phi.col(0).squaredNorm();
    CHECK(empirical_moc_linear(Phi, W) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("closed form vs dense grid search") {
    int completed = 0;
    for (std::uint64_t attempt = 0; completed < 5 && attempt < 50; ++attempt) {
      Rng rng(100 + attempt);
      Eigen::MatrixXd Phi(5, 3);
      Eigen::VectorXd w(5);
      for (int t = 0; t < 5; ++t)
        for (int j = 0; j < 3; ++j) Phi(t, j) = rng.uniform(-1.0, 1.0);
      Eigen::Matrix3d G = Phi.transpose() * Phi;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(G);
      if (eig.eigenvalues().minCoeff() < 0.35) continue;
      for (int t = 0; t < 5; ++t) w[t] = rng.gaussian(0.15);
      Eigen::Vector3d z_star = 2.0 * G.ldlt().solve(Phi.transpose() * w);
      if (z_star.cwiseAbs().maxCoeff() > 4.5) continue;  // maximizer must sit inside the box
      ++completed;
      double closed = empirical_moc_linear(Phi, w);
      double grid = moc_grid_search(Phi, w, 0.01);
      CHECK(closed >= grid - 1e-10);        // the closed form is the true supremum
      CHECK(closed - grid <= 2e-3);         // grid resolution gap
    }
    CHECK(completed == 5);
  }
}

TEST_CASE("cover MOC: floor at zero, singleton, dominated by the span") {
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 64, 41);
  FourierCoeffs zero(1, 4, 1, sys.L);
  CHECK(empirical_moc_cover({zero}, d.X, d.W) == 0.0);

  Rng rng(42);
  std::vector<FourierCoeffs> cover;
  for (int j = 0; j < 6; ++j) {
    FourierCoeffs f(1, 4, 1, sys.L);
    for (int ell = 0; ell < 4; ++ell) f.z(0, ell) = 0.2 * rng.uniform(-1.0, 1.0);
    cover.push_back(f);
  }
  Eigen::MatrixXd Phi = design_matrix(d.X, 4, sys.L);
  double cover_val = empirical_moc_cover(cover, d.X, d.W);
  double span_val = empirical_moc_linear(Phi, d.W);
  CHECK(cover_val <= span_val + 1e-12);

  // singleton value equals the direct functional (or its floor at 0)
  double direct = 0.0;
  {
    const FourierCoeffs& f = cover[0];
    Eigen::VectorXd vals = Phi * f.z.row(0).transpose();
    direct = (4.0 * d.W.col(0).dot(vals) - vals.squaredNorm()) / static_cast<double>(d.T);
  }
  CHECK(empirical_moc_cover({cover[0]}, d.X, d.W) ==
        doctest::Approx(std::max(direct, 0.0)).epsilon(1e-12));
}

TEST_CASE("basic inequality on fitted runs (small version)") {
  Rng rng(55);
  LinearDiffOp lap = LinearDiffOp::laplacian(1, 1);
  for (int run = 0; run < 20; ++run) {
    const double L = 0.5;
    FourierCoeffs fstar(1, 6, 1, L);
    for (int ell = 0; ell < 6; ++ell) fstar.z(0, ell) = 0.03 * rng.uniform(-1.0, 1.0);
    DynSystem sys = DynSystem::make(fstar, 0.05);
    TrajectoryDataset d = simulate_trajectory(sys, 64, 1000 + static_cast<std::uint64_t>(run));

    FitConfig cfg;
    cfg.m = 6;
    cfg.lambda_T = 0.01;
    cfg.lambda_sob = 0.0;
    OperatorGram gram = operator_gram(lap, cfg.m, 1, L);
    FitResult fit = fit_erm(d, cfg, &gram);

    Eigen::MatrixXd Phi = design_matrix(d.X, cfg.m, L);
    double lhs = (Phi * (fit.coeffs.z - fstar.z).transpose()).squaredNorm() /
                 static_cast<double>(d.T);
    double R_star = fstar.z.row(0) * gram.Q[0] * fstar.z.row(0).transpose();
    double rhs = empirical_moc_linear(Phi, d.W) + 2.0 * cfg.lambda_T * R_star;
    CHECK(lhs <= rhs + 1e-9 * (1.0 + rhs));
  }
}
