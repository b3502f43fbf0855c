// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pirem/data_process.hpp"
#include "pirem/rng.hpp"
#include "pirem/theory_bounds.hpp"

using namespace pirem;

namespace {

DynSystem contraction_system(double L = 0.25, double sigma = 0.1) {
  return DynSystem::make(1, L, sigma, [](const Eigen::VectorXd& x) { return (0.5 * x).eval(); });
}

FiniteChain two_state_chain(double eps, int T) {
  // interpolation between the iid chain (eps = 0) and the copy chain (eps = 1)
  FiniteChain chain;
  chain.n_states = 2;
  chain.horizon = T;
  chain.initial = Eigen::Vector2d(0.5, 0.5);
  chain.transition.resize(2, 2);
  chain.transition << 0.5 + 0.5 * eps, 0.5 - 0.5 * eps, 0.5 - 0.5 * eps, 0.5 + 0.5 * eps;
  return chain;
}

}  // namespace

TEST_CASE("simulation determinism and dataset structure") {
  DynSystem sys = contraction_system();
  TrajectoryDataset a = simulate_trajectory(sys, 200, 99);
  TrajectoryDataset b = simulate_trajectory(sys, 200, 99);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.Y - b.Y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.W - b.W).cwiseAbs().maxCoeff() == 0.0);

  // Y_t = X_{t+1} along the realized path
  for (std::int64_t t = 0; t + 1 < a.T; ++t) CHECK(a.Y(t, 0) == a.X(t + 1, 0));
  // state containment
  CHECK(a.X.cwiseAbs().maxCoeff() <= sys.L);
  CHECK(a.Y.cwiseAbs().maxCoeff() <= sys.L);

  TrajectoryDataset c = simulate_trajectory(sys, 200, 100);
  CHECK((a.X - c.X).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("vanishing noise recovers the deterministic orbit") {
  DynSystem sys = DynSystem::make(1, 1.0, 1e-12,
                                  [](const Eigen::VectorXd& x) { return (0.5 * x).eval(); },
                                  DynSystem::InitLaw::Dirac, Eigen::VectorXd::Constant(1, 0.5));
  TrajectoryDataset d = simulate_trajectory(sys, 30, 4);
  double x = 0.5;
  for (std::int64_t t = 0; t < d.T; ++t) {
    CHECK(d.X(t, 0) == doctest::Approx(x).epsilon(1e-9));
    x *= 0.5;
  }
}

TEST_CASE("margin violation fails at construction") {
  CHECK_THROWS_AS(
      DynSystem::make(1, 1.0, 0.1, [](const Eigen::VectorXd& x) { return (1.2 * x).eval(); }),
      std::invalid_argument);
  CHECK_THROWS_AS(simulate_trajectory(contraction_system(), 1, 3), std::invalid_argument);
}

TEST_CASE("noise is conditionally centered (binned means)") {
  DynSystem sys = contraction_system(0.25, 0.1);
  TrajectoryDataset d = simulate_trajectory(sys, 100000, 12345);
  const int n_bins = 4;
  for (int bin = 0; bin < n_bins; ++bin) {
    double lo = -sys.L + 2.0 * sys.L * bin / n_bins;
    double hi = lo + 2.0 * sys.L / n_bins;
    double sum = 0.0, sum2 = 0.0;
    std::int64_t n = 0;
    for (std::int64_t t = 0; t < d.T; ++t) {
      if (d.X(t, 0) >= lo && d.X(t, 0) < hi) {
        sum += d.W(t, 0);
        sum2 += d.W(t, 0) * d.W(t, 0);
        ++n;
      }
    }
    REQUIRE(n > 100);
    double mean = sum / static_cast<double>(n);
    double sd = std::sqrt(std::max(sum2 / static_cast<double>(n) - mean * mean, 1e-12));
    CHECK(std::abs(mean) <= 4.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("dependence matrix: iid chain is exactly the identity") {
  for (int T : {1, 2, 3, 4}) {
    DependenceMatrix dm = dependence_matrix_finite(two_state_chain(0.0, T));
    CHECK((dm.gamma - Eigen::MatrixXd::Identity(T, T)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dm.norm2 == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("dependence matrix: copy chain saturates and exceeds one") {
  DependenceMatrix dm = dependence_matrix_finite(two_state_chain(1.0, 3));
  // conditioning on X_0 pins the whole path: TV = 1/2, entry = sqrt(2 * 1/2)
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double expected = i == j ? 1.0 : (i > j ? 1.0 : 0.0);
      CHECK(dm.gamma(i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  // spectral-norm oracle on the expected all-ones lower triangle
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) expect(i, j) = 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(expect);
  CHECK(dm.norm2 == doctest::Approx(svd.singularValues()[0]).epsilon(1e-12));
  CHECK(dm.norm2 > 1.0);
}

TEST_CASE("dependence matrix: structure and interpolation monotonicity") {
  double prev = 0.0;
  for (double eps : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    DependenceMatrix dm = dependence_matrix_finite(two_state_chain(eps, 4));
    for (int i = 0; i < 4; ++i) {
      CHECK(dm.gamma(i, i) == 1.0);
      for (int j = i + 1; j < 4; ++j) CHECK(dm.gamma(i, j) == 0.0);
    }
    CHECK(dm.norm2 >= prev - 1e-12);
    prev = dm.norm2;
  }
}

TEST_CASE("dependence matrix feasibility guard") {
  FiniteChain chain = two_state_chain(0.3, 25);  // 2^25 paths
  CHECK_THROWS_AS(dependence_matrix_finite(chain), std::invalid_argument);
}

TEST_CASE("persistence probe endpoints") {
  DynSystem sys = contraction_system(0.5, 0.2);
  FourierCoeffs f(1, 3, 1, 0.5);
  f.z(0, 1) = 0.7;
  PersistenceReport rep = persistence_probe(f, sys, 16, 150, 1.0, {0.0, 0.05, 0.2}, 5);
  CHECK(rep.points[0].lhs == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rep.points[0].rhs == doctest::Approx(1.0).epsilon(1e-14));

  FourierCoeffs zero(1, 3, 1, 0.5);
  PersistenceReport rz = persistence_probe(zero, sys, 16, 150, 1.0, {0.0, 0.3, 2.0}, 6);
  for (const auto& pt : rz.points) {
    CHECK(pt.lhs == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pt.rhs == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pt.holds);
  }
  CHECK_THROWS_AS(persistence_probe(f, sys, 16, 50, 1.0, {0.0}, 5), std::invalid_argument);
}

TEST_CASE("persistence probe holds for near-iid inputs at small xi") {
  // fstar = 0 makes the inputs an iid truncated-gaussian sequence
  DynSystem sys = DynSystem::make(
      1, 1.0, 0.4, [](const Eigen::VectorXd& x) { return (0.0 * x).eval(); });
  FourierCoeffs f(1, 2, 1, 1.0);
  f.z(0, 1) = 1.0;
  PersistenceReport rep = persistence_probe(f, sys, 8, 1500, 1.0, {0.01, 0.03, 0.1}, 77);
  for (const auto& pt : rep.points) CHECK(pt.holds);
}

TEST_CASE("small-ball probe endpoints and positivity") {
  DynSystem sys = contraction_system(0.5, 0.2);
  FourierCoeffs f(1, 3, 1, 0.5), h(1, 3, 1, 0.5);
  f.z(0, 0) = 0.4;  // constant difference
  SmallBallReport rep = small_ball_probe(f, h, sys, 12, 200, {0.0, 1.0}, 10.0, 3);
  CHECK(rep.points[0].freq == 1.0);                      // u = 0 is almost sure
  CHECK(rep.points[1].freq == doctest::Approx(1.0));     // constants meet u = 1 exactly
  CHECK_THROWS_AS(small_ball_probe(f, f, sys, 12, 200, {0.5}, 10.0, 3), std::invalid_argument);

  // hypercontractivity constant from the theory at the probe's norm scale
  FourierCoeffs g(1, 3, 1, 0.5);
  g.z(0, 1) = 0.8;
  ProblemParams theory;
  theory.L = 0.5;
  double C_theory = hyper_constant(0.5, theory);
  SmallBallReport r2 = small_ball_probe(g, h, sys, 12, 400, {0.5}, C_theory, 4);
  CHECK(r2.points[0].freq + 0.05 >= r2.points[0].bound);
}

TEST_CASE("dataset CSV round trip with noise columns") {
  DynSystem sys = contraction_system();
  TrajectoryDataset d = simulate_trajectory(sys, 40, 8);
  std::stringstream ss;
  save_dataset_csv(d, ss, true);
  TrajectoryDataset back = load_dataset_csv(ss, sys.L);
  CHECK(back.T == d.T);
  CHECK((back.X - d.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.Y - d.Y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.W - d.W).cwiseAbs().maxCoeff() == 0.0);
}
