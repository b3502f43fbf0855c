// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pirem/fourier_space.hpp"

namespace pirem {

/// Autonomous system X_{t+1} = f*(X_t) + W_t on the cube [-L,L]^dx with
/// truncated sub-Gaussian noise. dy == dx in this state-identification
/// setting. Construction validates that f* maps the cube strictly inside
/// itself (positive margin) by dense sampling.
struct DynSystem {
  int dx = 1;
  int dy = 1;
  double L = 1.0;
  double noise_sigma = 0.1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fstar;
  std::optional<FourierCoeffs> fstar_coeffs;  ///< set when f* is basis-encoded

  enum class InitLaw { Dirac, UniformCube };
  InitLaw init_law = InitLaw::Dirac;
  Eigen::VectorXd x0;

  double margin = 0.0;  ///< min over samples of distance from f*(x) to the boundary

  static DynSystem make(int dx, double L, double noise_sigma,
                        std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fstar,
                        InitLaw init_law = InitLaw::Dirac,
                        const Eigen::VectorXd& x0 = Eigen::VectorXd());
  static DynSystem make(const FourierCoeffs& fstar, double noise_sigma,
                        InitLaw init_law = InitLaw::Dirac,
                        const Eigen::VectorXd& x0 = Eigen::VectorXd());
};

struct TrajectoryDataset {
  Eigen::MatrixXd X;  ///< T x dx
  Eigen::MatrixXd Y;  ///< T x dy, Y_t = X_{t+1}
  Eigen::MatrixXd W;  ///< T x dy realized noise (available in simulation)
  std::int64_t T = 0;
  std::uint64_t seed = 0;
  int dx = 1, dy = 1;
  double L = 1.0;
  double noise_sigma = 0.0;
};

/// Rolls the system forward T steps. The per-step noise is Gaussian
/// truncated to the symmetric interval [-r_t, r_t]^dy with
/// r_t = min(4 sigma, distance of f*(X_t) to the cube boundary), which keeps
/// the state inside the cube while preserving the martingale-difference and
/// sub-Gaussian structure. Bit-reproducible for a fixed (sys, T, seed).
TrajectoryDataset simulate_trajectory(const DynSystem& sys, std::int64_t T, std::uint64_t seed);

/// CSV columns: t, x_1..x_dx, y_1..y_dy (plus w_1..w_dy when with_noise).
void save_dataset_csv(const TrajectoryDataset& d, std::ostream& os, bool with_noise = false);
void save_dataset_csv(const TrajectoryDataset& d, const std::string& path, bool with_noise = false);
TrajectoryDataset load_dataset_csv(std::istream& is, double L);
TrajectoryDataset load_dataset_csv(const std::string& path, double L);

/// Finite-state Markov chain used as an exact test oracle for dependence.
struct FiniteChain {
  int n_states = 2;
  Eigen::VectorXd initial;    ///< length n_states
  Eigen::MatrixXd transition; ///< row-stochastic n_states x n_states
  int horizon = 2;            ///< T

  void validate() const;
};

struct DependenceMatrix {
  Eigen::MatrixXd gamma;  ///< T x T lower triangular, unit diagonal
  double norm2 = 0.0;     ///< spectral norm
};

/// Exact dependence matrix by path enumeration. Entry (i,j), i > j, is
/// sqrt(2 sup_A || P(X_{i-1:T-1} | A) - P(X_{i-1:T-1}) ||_TV) with the sup
/// over all events A of the sigma-algebra generated by (X_0..X_{j-1}); the
/// sup is realized by enumerating every union of prefix atoms and evaluating
/// TV as half the L1 distance over suffix paths. Guard: n_states^T <= 1e6
/// and at most 2^20 prefix-event subsets.
DependenceMatrix dependence_matrix_finite(const FiniteChain& chain);

struct PersistencePoint {
  double xi = 0.0;
  double lhs = 0.0;      ///< E exp(-xi sum ||f(X_t)||^2), Monte Carlo
  double lhs_se = 0.0;
  double rhs = 0.0;      ///< exp(-xi sum E||f||^2 + xi^2 S/2 sum E||f||^4)
  double rhs_se = 0.0;   ///< via delta method on the moment estimates
  bool holds = false;    ///< lhs <= rhs within quoted error
};

struct PersistenceReport {
  std::vector<PersistencePoint> points;
  double S_candidate = 1.0;
};

/// Monte Carlo probe of the one-sided exponential inequality that defines
/// S-persistence. Diagnostic only: the inequality is population-level, so
/// there is no hard pass/fail gate.
PersistenceReport persistence_probe(const FourierCoeffs& f, const DynSystem& sys, std::int64_t T,
                                    int n_mc, double S_candidate,
                                    const std::vector<double>& xi_grid, std::uint64_t seed);

struct SmallBallPoint {
  double u = 0.0;
  double freq = 0.0;     ///< empirical P{ (1/T) sum ||f-h||(X_t) >= u ||f-h||_L2 }
  double ci_lo = 0.0, ci_hi = 0.0;
  double bound = 0.0;    ///< (1-u^2)^2 / C
};

struct SmallBallReport {
  std::vector<SmallBallPoint> points;
  double l2_norm = 0.0;  ///< Monte Carlo trajectory norm of f-h
};

/// Paley-Zygmund style frequency probe. Throws when f == h.
SmallBallReport small_ball_probe(const FourierCoeffs& f, const FourierCoeffs& h,
                                 const DynSystem& sys, std::int64_t T, int n_mc,
                                 const std::vector<double>& u_grid, double C,
                                 std::uint64_t seed);

}  // namespace pirem
