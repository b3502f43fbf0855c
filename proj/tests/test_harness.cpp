// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pirem/config.hpp"
#include "pirem/expr.hpp"
#include "pirem/harness.hpp"
#include "pirem/rng.hpp"

using namespace pirem;

namespace {

SweepConfig small_sweep_config(std::uint64_t seed) {
  SweepConfig cfg;
  cfg.sys = DynSystem::make(1, 0.25, 0.1,
                            [](const Eigen::VectorXd& x) { return (0.5 * x).eval(); });
  cfg.op = LinearDiffOp::laplacian(1, 1);
  cfg.reg_measure.kind = RegMeasure::Kind::QuadratureOnX;
  cfg.T_grid = {64, 128, 256, 512};
  cfg.n_reps = 6;
  cfg.m_schedule = {1.5, 0.33, 8, 24};
  cfg.T_eval = 256;
  cfg.n_traj = 2;
  cfg.master_seed = seed;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("slope fit recovers exact power laws") {
  std::vector<std::pair<double, double>> pts;
  for (double T : {16.0, 32.0, 64.0, 128.0, 256.0}) pts.emplace_back(T, 1.0 / T);
  SlopeFit f = slope_fit(pts);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.rss < 1e-24);
  CHECK(f.ci_half < 1e-10);

  pts.clear();
  for (double T : {16.0, 32.0, 64.0, 128.0}) pts.emplace_back(T, 3.7 * std::pow(T, -0.8));
  SlopeFit g = slope_fit(pts);
  CHECK(g.slope == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(g.intercept == doctest::Approx(std::log(3.7)).epsilon(1e-10));

  CHECK_THROWS_AS(slope_fit({{16.0, 1.0}, {32.0, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(slope_fit({{16.0, 1.0}, {32.0, -0.5}, {64.0, 0.1}}), std::invalid_argument);
}

TEST_CASE("slope confidence interval covers the truth about 95 percent of the time") {
  Rng rng(2024);
  const double true_slope = -0.8;
  int covered = 0;
  const int resamples = 1000;
  for (int rep = 0; rep < resamples; ++rep) {
    std::vector<std::pair<double, double>> pts;
    for (double T : {16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0}) {
      double log_risk = 0.5 + true_slope * std::log(T) + 0.25 * rng.gaussian();
      pts.emplace_back(T, std::exp(log_risk));
    }
    SlopeFit f = slope_fit(pts);
    if (std::abs(f.slope - true_slope) <= f.ci_half) ++covered;
  }
  double rate = static_cast<double>(covered) / resamples;
  CHECK(rate > 0.93);
  CHECK(rate < 0.97);
}

TEST_CASE("t quantile table endpoints") {
  CHECK(t_quantile_975(1) == doctest::Approx(12.706));
  CHECK(t_quantile_975(30) == doctest::Approx(2.042));
  CHECK(t_quantile_975(1000) == doctest::Approx(1.96).epsilon(1e-2));
}

TEST_CASE("truncation schedule clamps") {
  TruncationSchedule sched{2.0, 0.5, 4, 32};
  CHECK(sched.at(1) == 4);
  CHECK(sched.at(100) == 20);
  CHECK(sched.at(100000) == 32);
}

TEST_CASE("sweep config validation") {
  SweepConfig cfg = small_sweep_config(1);
  cfg.T_grid = {64};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_sweep_config(1);
  cfg.n_reps = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_sweep_config(1);
  cfg.T_grid = {64, 64, 128, 256};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("sweep determinism across runs and worker counts") {
  SweepConfig cfg = small_sweep_config(33);
  RateReport a = rate_sweep(cfg);
  RateReport b = rate_sweep(cfg);
  cfg.jobs = 4;
  RateReport c = rate_sweep(cfg);
  for (std::size_t arm = 0; arm < 2; ++arm) {
    for (std::size_t ti = 0; ti < a.T_grid.size(); ++ti) {
      CHECK(a.arms[arm].cells[ti].mean == b.arms[arm].cells[ti].mean);
      CHECK(a.arms[arm].cells[ti].mean == c.arms[arm].cells[ti].mean);
    }
    CHECK(a.arms[arm].slope.slope == c.arms[arm].slope.slope);
  }
}

TEST_CASE("doubling the repetitions shrinks the confidence bands by about sqrt(2)") {
  SweepConfig cfg = small_sweep_config(91);
  cfg.n_reps = 12;
  RateReport narrow = rate_sweep(cfg);
  cfg.n_reps = 24;
  RateReport wide = rate_sweep(cfg);
  double w1 = 0.0, w2 = 0.0;
  for (std::size_t arm = 0; arm < 2; ++arm)
    for (std::size_t ti = 0; ti < narrow.T_grid.size(); ++ti) {
      w1 += narrow.arms[arm].cells[ti].ci_hi - narrow.arms[arm].cells[ti].ci_lo;
      w2 += wide.arms[arm].cells[ti].ci_hi - wide.arms[arm].cells[ti].ci_lo;
    }
  double ratio = w2 / w1;
  CHECK(ratio > 0.8 / std::sqrt(2.0));
  CHECK(ratio < 1.2 / std::sqrt(2.0));
}

TEST_CASE("emitted outputs: schema, determinism, failure path") {
  SweepConfig cfg = small_sweep_config(17);
  RateReport rep = rate_sweep(cfg);
  std::string dir1 = "/tmp/pirem_test_emit1";
  std::string dir2 = "/tmp/pirem_test_emit2";
  emit_outputs(rep, dir1);
  emit_outputs(rep, dir2);
  CHECK(slurp(dir1 + "/rates.csv") == slurp(dir2 + "/rates.csv"));
  CHECK(slurp(dir1 + "/slopes.csv") == slurp(dir2 + "/slopes.csv"));
  CHECK(slurp(dir1 + "/plot.svg") == slurp(dir2 + "/plot.svg"));

  std::istringstream rates(slurp(dir1 + "/rates.csv"));
  std::string header;
  std::getline(rates, header);
  CHECK(header == "T,arm,mean,ci_lo,ci_hi,bound");
  int rows = 0;
  std::string line;
  while (std::getline(rates, line))
    if (!line.empty()) ++rows;
  CHECK(rows == static_cast<int>(2 * rep.T_grid.size()));

  RateReport broken = rep;
  broken.T_grid = {64, 128, 256};
  CHECK_THROWS_AS(emit_outputs(broken, "/tmp/pirem_test_emit3"), std::invalid_argument);
}

TEST_CASE("aligned sweep: regularized arm dominates the unregularized one") {
  SweepConfig cfg = small_sweep_config(5);
  cfg.reg.lambda_T = 3e-3;
  RateReport rep = rate_sweep(cfg);
  for (std::size_t ti = static_cast<std::size_t>(rep.burn_in_index); ti < rep.T_grid.size(); ++ti)
    CHECK(rep.arms[0].cells[ti].mean <= rep.arms[1].cells[ti].mean);
  // bounds attached to every cell are positive and dominate the means
  for (const auto& arm : rep.arms)
    for (const auto& cell : arm.cells) {
      CHECK(cell.bound > 0.0);
      CHECK(cell.mean <= cell.bound);
    }
}

TEST_CASE("unicycle penalty: exact at the truth, stable across node counts") {
  UnicycleConfig cfg;
  auto truth = [&cfg](const Eigen::Vector3d& s, const Eigen::Vector2d& u) {
    Eigen::Vector3d nxt = unicycle_true_next(s, u, cfg.dt);
    return Eigen::Vector2d{nxt[0], nxt[1]};
  };
  McEstimate at_truth = unicycle_penalty_mc(cfg, truth, 300, 9);
  CHECK(at_truth.value <= 1e-25);  // the non-slip residual vanishes identically

  auto perturbed = [&cfg](const Eigen::Vector3d& s, const Eigen::Vector2d& u) {
    Eigen::Vector3d nxt = unicycle_true_next(s, u, cfg.dt);
    return Eigen::Vector2d{nxt[0] + 0.05 * std::sin(s[2]), nxt[1] - 0.02 * s[0]};
  };
  McEstimate small_batch = unicycle_penalty_mc(cfg, perturbed, 300, 9);
  McEstimate big_batch = unicycle_penalty_mc(cfg, perturbed, 3000, 10);
  CHECK(std::abs(small_batch.value - big_batch.value) <=
        3.0 * (small_batch.std_error + big_batch.std_error));
}

TEST_CASE("unicycle experiment: reduced run is deterministic and ordered") {
  UnicycleConfig cfg;
  cfg.T_grid = {800, 1600, 3200, 6400};
  cfg.n_reps = 5;
  cfg.T_eval = 500;
  cfg.K_min = 3;
  cfg.K_max = 8;
  cfg.master_seed = 3;
  RateReport a = unicycle_experiment(cfg);
  cfg.jobs = 3;
  RateReport b = unicycle_experiment(cfg);
  for (std::size_t arm = 0; arm < 2; ++arm)
    for (std::size_t ti = 0; ti < a.T_grid.size(); ++ti)
      CHECK(a.arms[arm].cells[ti].mean == b.arms[arm].cells[ti].mean);
  // the penalty can only help at matched complexity
  for (std::size_t ti = 0; ti < a.T_grid.size(); ++ti)
    CHECK(a.arms[0].cells[ti].mean <= a.arms[1].cells[ti].mean * 1.05);
}

TEST_CASE("config parsing: types, lists, repeats, errors") {
  Config cfg = Config::from_string(
      "a = 1.5\n"
      "b = 7\n"
      "name = hello # trailing comment\n"
      "grid = 1, 2, 4\n"
      "op = first\n"
      "op = second\n");
  CHECK(cfg.get_double("a") == 1.5);
  CHECK(cfg.get_int("b") == 7);
  CHECK(cfg.get_string("name") == "hello");
  CHECK(cfg.get_int_list("grid") == std::vector<std::int64_t>{1, 2, 4});
  CHECK(cfg.get_all("op") == std::vector<std::string>{"first", "second"});
  CHECK(cfg.get_double("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(cfg.get_double("name"), ConfigError);
  CHECK_THROWS_AS(Config::from_string("novalue\n"), ConfigError);
  CHECK(Config::from_string(cfg.echo()).get_double("a") == 1.5);
}

TEST_CASE("coefficient expression grammar") {
  auto f = parse_coeff_expr("1 + 0.5*sin(pi*x1) - x2^2", 2);
  Eigen::VectorXd x(2);
  x << 0.5, 2.0;
  CHECK(f(x) == doctest::Approx(1.0 + 0.5 * std::sin(3.14159265358979324 * 0.5) - 4.0));
  CHECK(eval_const_expr("2^3 + 1") == 9.0);
  CHECK(eval_const_expr("-(2+1)*4") == -12.0);
  CHECK_THROWS_AS(parse_coeff_expr("x3", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_coeff_expr("sin(1", 1), std::invalid_argument);
  CHECK_THROWS_AS(parse_coeff_expr("1 + * 2", 1), std::invalid_argument);
}
