// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pirem/data_process.hpp"
#include "pirem/estimator.hpp"
#include "pirem/theory_bounds.hpp"

namespace pirem {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_half = 0.0;  ///< 95% half-width from the standard slope-variance formula
  double rss = 0.0;
  int n = 0;
};

/// OLS on (log T, log risk). Throws on < 3 points or non-positive risks.
SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points);

/// Two-sided 97.5% Student-t quantile (table for small df, asymptote 1.96).
double t_quantile_975(int df);

/// Basis truncation schedule m(T) = clamp(round(coef * T^power), lo, hi).
struct TruncationSchedule {
  double coef = 1.5;
  double power = 0.33;
  std::int64_t lo = 10;
  std::int64_t hi = 48;
  std::int64_t at(std::int64_t T) const;
};

struct ArmSpec {
  std::string name;
  double lambda_T = 0.0;
  double lambda_sob = 1e-9;
  /// How the physics penalty level is chosen per grid cell:
  ///   Fixed      - use lambda_T as given
  ///   Theory     - minimal admissible level at this T (probability rate bound)
  ///   Validation - deterministic grid search on a 25% holdout tail
  enum class LambdaPolicy { Fixed, Theory, Validation };
  LambdaPolicy policy = LambdaPolicy::Fixed;
};

struct SweepConfig {
  std::vector<std::int64_t> T_grid;  ///< strictly increasing, >= 4 points
  int n_reps = 20;                   ///< >= 5
  DynSystem sys;
  LinearDiffOp op;
  RegMeasure reg_measure;  ///< measure behind the operator gram
  int s = 2;
  TruncationSchedule m_schedule;
  ArmSpec reg{"reg", 3e-3, 1e-9};
  ArmSpec unreg{"unreg", 0.0, 1e-9};
  std::int64_t T_eval = 2048;
  int n_traj = 4;
  std::uint64_t master_seed = 1;
  int jobs = 1;
  double burn_in_frac = 0.25;  ///< fraction of smallest T points dropped from slope fits
  double max_failed_frac = 0.2;
  ProblemParams theory;    ///< parameters for the bound overlays
  double theory_R = -1.0;  ///< R(f*) for overlays; < 0 = compute from the projected truth

  void validate() const;
};

struct CellStat {
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bound = 0.0;  ///< theoretical overlay at this T
  int n = 0;
};

struct ArmResult {
  std::string name;
  std::vector<CellStat> cells;  ///< one per grid T
  SlopeFit slope;
};

struct RateReport {
  std::vector<std::int64_t> T_grid;
  std::vector<std::int64_t> m_grid;
  std::vector<ArmResult> arms;
  int burn_in_index = 0;  ///< slope fits use T_grid[burn_in_index..]
  double theory_R = 0.0;
  std::int64_t burn_in_threshold_T = 0;  ///< theory burn-in threshold (prob form)
  int failed_cells = 0;
  std::string manifest;
};

/// Simulate / fit both arms / measure excess risk over the (T, rep) grid,
/// aggregate to means and normal-approximation CIs, fit post-burn-in slopes
/// and attach theory overlays. Deterministic for a fixed master seed and any
/// jobs count. Aborts when more than max_failed_frac of the cells fail.
RateReport rate_sweep(const SweepConfig& cfg);

/// Writes rates.csv, slopes.csv, plot.svg and manifest.txt into dir.
void emit_outputs(const RateReport& report, const std::string& dir);

// ---------------------------------------------------------------------------
// Unicycle experiment: Euler-discretized unicycle with a non-slip residual
// penalty estimated by Monte Carlo nodes, linear-in-basis predictor.
// ---------------------------------------------------------------------------

struct UnicycleConfig {
  double dt = 0.05;
  double sigma = 1.0;  ///< observation noise std on the next state
  double pos_halfwidth = 1.0;
  double nu_lo = 0.0, nu_hi = 1.0;
  double omega_max = 1.0;
  // fixed-resolution feature content in heading / speed
  int theta_harmonics = 3;
  int nu_harmonics = 2;
  int prod_harmonics = 2;  ///< nu x theta interaction cap
  // growing position-harmonic tail K(T)
  double K_coef = 0.00455;
  double K_pow = 0.8;
  std::int64_t K_min = 4;
  std::int64_t K_max = 60;
  double lambda = 3000.0;  ///< non-slip penalty level (regularized arm)
  double ridge = 1e-8;
  int n_nodes = 300;  ///< Monte Carlo nodes per penalty batch
  std::uint64_t node_seed = 1234;
  std::vector<std::int64_t> T_grid{6250, 12500, 25000, 50000, 100000};
  int n_reps = 20;
  std::int64_t T_eval = 2000;
  int n_traj = 2;
  std::uint64_t master_seed = 1;
  int jobs = 1;
  double burn_in_frac = 0.25;
  ProblemParams theory;  ///< defaults adjusted to dx=5, s=10 inside

  void validate() const;
};

RateReport unicycle_experiment(const UnicycleConfig& cfg);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int n = 0;
};

/// Monte Carlo estimate of the non-slip penalty ||q||^2 for a black-box
/// position predictor (g1, g2)(state, input), with its standard error.
McEstimate unicycle_penalty_mc(
    const UnicycleConfig& cfg,
    const std::function<Eigen::Vector2d(const Eigen::Vector3d&, const Eigen::Vector2d&)>& g12,
    int n_nodes, std::uint64_t seed);

/// The true Euler-discretized unicycle map.
Eigen::Vector3d unicycle_true_next(const Eigen::Vector3d& s, const Eigen::Vector2d& u, double dt);

}  // namespace pirem
