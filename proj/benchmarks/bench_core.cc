// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "pirem/estimator.hpp"
#include "pirem/rng.hpp"

namespace {

using namespace pirem;

DynSystem bench_system() {
  return DynSystem::make(1, 0.25, 0.1,
                         [](const Eigen::VectorXd& x) { return (0.5 * x).eval(); });
}

void BM_basis_eval(benchmark::State& state) {
  const std::int64_t m = state.range(0);
  Eigen::VectorXd x(1);
  x << 0.17;
  double acc = 0.0;
  for (auto _ : state) {
    for (std::int64_t ell = 1; ell <= m; ++ell) acc += basis_eval(ell, x, 0.25);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_basis_eval)->Arg(16)->Arg(64);

void BM_simulate(benchmark::State& state) {
  DynSystem sys = bench_system();
  const std::int64_t T = state.range(0);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    TrajectoryDataset d = simulate_trajectory(sys, T, seed++);
    benchmark::DoNotOptimize(d.X.sum());
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_simulate)->Arg(1024)->Arg(16384);

void BM_design_matrix(benchmark::State& state) {
  DynSystem sys = bench_system();
  TrajectoryDataset d = simulate_trajectory(sys, state.range(0), 3);
  for (auto _ : state) {
    Eigen::MatrixXd Phi = design_matrix(d.X, 32, sys.L);
    benchmark::DoNotOptimize(Phi.sum());
  }
}
BENCHMARK(BM_design_matrix)->Arg(1024)->Arg(8192);

void BM_operator_gram(benchmark::State& state) {
  RegMeasure measure;
  measure.kind = RegMeasure::Kind::QuadratureOnX;
  for (auto _ : state) {
    OperatorGram gram =
        operator_gram(LinearDiffOp::laplacian(1, 1), state.range(0), 1, 0.25, measure);
    benchmark::DoNotOptimize(gram.Q[0].sum());
  }
}
BENCHMARK(BM_operator_gram)->Arg(16)->Arg(48);

void BM_fit_erm(benchmark::State& state) {
  DynSystem sys = bench_system();
  TrajectoryDataset d = simulate_trajectory(sys, state.range(0), 4);
  FitConfig cfg;
  cfg.m = 24;
  cfg.lambda_T = 3e-3;
  cfg.lambda_sob = 1e-9;
  RegMeasure measure;
  measure.kind = RegMeasure::Kind::QuadratureOnX;
  OperatorGram gram = operator_gram(LinearDiffOp::laplacian(1, 1), cfg.m, 1, sys.L, measure);
  for (auto _ : state) {
    FitResult fit = fit_erm(d, cfg, &gram);
    benchmark::DoNotOptimize(fit.objective);
  }
}
BENCHMARK(BM_fit_erm)->Arg(2048)->Arg(16384);

void BM_moc_linear(benchmark::State& state) {
  DynSystem sys = bench_system();
  TrajectoryDataset d = simulate_trajectory(sys, state.range(0), 5);
  Eigen::MatrixXd Phi = design_matrix(d.X, 16, sys.L);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_moc_linear(Phi, d.W));
  }
}
BENCHMARK(BM_moc_linear)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
