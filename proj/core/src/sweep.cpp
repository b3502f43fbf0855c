// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pirem/csv.hpp"
#include "pirem/harness.hpp"
#include "pirem/rng.hpp"
#include "pirem/svg.hpp"

namespace pirem {

namespace {

/// Fixed-partition parallel map: indices are dealt round-robin so the result
/// layout (and hence every downstream aggregate) is independent of the
/// worker count.
void parallel_for(std::int64_t n, int jobs, const std::function<void(std::int64_t)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr error;
  std::mutex error_mu;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&]() {
      for (;;) {
        std::int64_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

struct CellOutcome {
  double risk_reg = 0.0;
  double risk_unreg = 0.0;
  bool failed = false;
  std::string what;
};

}  // namespace

void SweepConfig::validate() const {
  if (T_grid.size() < 4) throw std::invalid_argument("SweepConfig: T grid needs >= 4 points");
  for (std::size_t i = 1; i < T_grid.size(); ++i)
    if (T_grid[i] <= T_grid[i - 1])
      throw std::invalid_argument("SweepConfig: T grid must be strictly increasing");
  if (n_reps < 5) throw std::invalid_argument("SweepConfig: n_reps must be >= 5");
  if (n_traj < 2) throw std::invalid_argument("SweepConfig: n_traj must be >= 2");
  if (!(burn_in_frac >= 0.0 && burn_in_frac < 1.0))
    throw std::invalid_argument("SweepConfig: burn_in_frac in [0,1)");
}

namespace {

/// Alignment level R(f*) for the theory overlays. The generator is a black
/// box, so R is measured at a penalty-smoothed projection onto the largest
/// basis: the plain least-squares projection is ill-conditioned on the data
/// cube and wiggles at the finest scale, which would overstate R.
double resolve_theory_R(const SweepConfig& cfg, const std::vector<std::int64_t>& m_grid,
                        const std::vector<OperatorGram>& grams) {
  double theory_R = cfg.theory_R;
  if (theory_R < 0.0) {
    if (cfg.sys.fstar_coeffs) {
      theory_R = regularizer_value(cfg.op, *cfg.sys.fstar_coeffs, cfg.reg_measure);
    } else {
      const std::size_t top = static_cast<std::size_t>(
          std::max_element(m_grid.begin(), m_grid.end()) - m_grid.begin());
      const std::int64_t m_top = m_grid[top];
      int per_axis = cfg.reg_measure.quad.nodes_per_axis > 0
                         ? cfg.reg_measure.quad.nodes_per_axis
                         : default_nodes_per_axis(m_top, cfg.sys.dx);
      TensorQuad q = tensor_gauss_legendre(per_axis, cfg.sys.dx, cfg.sys.L);
      Eigen::MatrixXd A(q.nodes.rows(), m_top);
      Eigen::MatrixXd Yt(q.nodes.rows(), cfg.sys.dy);
      for (Eigen::Index i = 0; i < q.nodes.rows(); ++i) {
        Eigen::VectorXd x = q.nodes.row(i);
        for (std::int64_t ell = 1; ell <= m_top; ++ell)
          A(i, static_cast<Eigen::Index>(ell - 1)) = basis_eval(ell, x, cfg.sys.L);
        Yt.row(i) = cfg.sys.fstar(x).transpose();
      }
      Eigen::MatrixXd Aw = q.weights.asDiagonal() * A;
      Eigen::MatrixXd G = A.transpose() * Aw;
      const double smooth = 1e-6;
      FourierCoeffs proj(cfg.sys.dy, m_top, cfg.sys.dx, cfg.sys.L);
      for (int i = 0; i < cfg.sys.dy; ++i) {
        Eigen::MatrixXd M =
            G + smooth * grams[top].Q[static_cast<std::size_t>(i)] +
            1e-12 * G.trace() / static_cast<double>(m_top) *
                Eigen::MatrixXd::Identity(m_top, m_top);
        proj.z.row(i) = M.ldlt().solve(Aw.transpose() * Yt.col(i)).transpose();
      }
      theory_R = regularizer_value(cfg.op, proj, cfg.reg_measure);
    }
    theory_R = std::max(theory_R, 1e-12);  // the rate bounds reject exact alignment
  }
  return theory_R;
}

/// Deterministic penalty-level search on a holdout tail: fit on the first
/// 75% of the trajectory for each grid level, score on the rest, keep the
/// level with the smallest validation error.
double validation_lambda(const TrajectoryDataset& data, const FitConfig& base,
                         const OperatorGram& gram) {
  static const double grid[] = {0.0,  1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  const std::int64_t T_train = std::max<std::int64_t>(base.m + 1, (3 * data.T) / 4);
  if (T_train >= data.T) return base.lambda_T;
  TrajectoryDataset train = data;
  train.T = T_train;
  train.X = data.X.topRows(T_train);
  train.Y = data.Y.topRows(T_train);
  train.W = data.W.topRows(T_train);
  Eigen::MatrixXd Phi_val = design_matrix(data.X.bottomRows(data.T - T_train), base.m, data.L);
  Eigen::MatrixXd Y_val = data.Y.bottomRows(data.T - T_train);
  double best_lambda = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    FitConfig cfg = base;
    cfg.lambda_T = lambda;
    FitResult fit = fit_erm(train, cfg, lambda > 0.0 ? &gram : nullptr);
    double err = (Y_val - Phi_val * fit.coeffs.z.transpose()).squaredNorm();
    if (err < best_err) {
      best_err = err;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace

RateReport rate_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto n_T = static_cast<std::int64_t>(cfg.T_grid.size());
  const std::int64_t n_cells = n_T * cfg.n_reps;

  // per-T operator grams, shared across cells
  std::vector<std::int64_t> m_grid;
  std::vector<OperatorGram> grams;
  m_grid.reserve(static_cast<std::size_t>(n_T));
  for (std::int64_t ti = 0; ti < n_T; ++ti) {
    std::int64_t m = cfg.m_schedule.at(cfg.T_grid[static_cast<std::size_t>(ti)]);
    m_grid.push_back(m);
    grams.push_back(operator_gram(cfg.op, m, cfg.sys.dx, cfg.sys.L, cfg.reg_measure));
  }

  const double theory_R = resolve_theory_R(cfg, m_grid, grams);

  // the penalty level of a Theory-policy arm depends only on T
  auto lambda_for = [&](const ArmSpec& spec, std::int64_t T) {
    if (spec.policy == ArmSpec::LambdaPolicy::Theory)
      return rate_bound_prob(static_cast<double>(T), theory_R, cfg.theory).lambda_min;
    return spec.lambda_T;
  };

  std::vector<CellOutcome> outcomes(static_cast<std::size_t>(n_cells));
  parallel_for(n_cells, cfg.jobs, [&](std::int64_t cell) {
    const std::int64_t ti = cell / cfg.n_reps;
    const std::int64_t rep = cell % cfg.n_reps;
    CellOutcome& out = outcomes[static_cast<std::size_t>(cell)];
    try {
      const std::int64_t T = cfg.T_grid[static_cast<std::size_t>(ti)];
      TrajectoryDataset data = simulate_trajectory(
          cfg.sys, T, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(ti),
                                  static_cast<std::uint64_t>(rep), 0));
      const std::uint64_t eval_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(ti),
                                                  static_cast<std::uint64_t>(rep), 1);
      for (int arm = 0; arm < 2; ++arm) {
        const ArmSpec& spec = arm == 0 ? cfg.reg : cfg.unreg;
        FitConfig fit_cfg;
        fit_cfg.m = m_grid[static_cast<std::size_t>(ti)];
        fit_cfg.lambda_T = lambda_for(spec, T);
        fit_cfg.lambda_sob = spec.lambda_sob;
        fit_cfg.s = cfg.s;
        if (spec.policy == ArmSpec::LambdaPolicy::Validation)
          fit_cfg.lambda_T = validation_lambda(data, fit_cfg, grams[static_cast<std::size_t>(ti)]);
        FitResult fit = fit_erm(data, fit_cfg,
                                fit_cfg.lambda_T > 0.0 ? &grams[static_cast<std::size_t>(ti)] : nullptr);
        RiskEstimate risk =
            excess_risk(fit.coeffs, cfg.sys.fstar, cfg.sys, cfg.T_eval, cfg.n_traj, eval_seed);
        (arm == 0 ? out.risk_reg : out.risk_unreg) = risk.estimate;
      }
    } catch (const std::exception& e) {
      out.failed = true;
      out.what = e.what();
    }
  });

  int failed = 0;
  for (const auto& o : outcomes)
    if (o.failed) ++failed;
  if (failed > cfg.max_failed_frac * static_cast<double>(n_cells)) {
    std::string first;
    for (const auto& o : outcomes)
      if (o.failed) {
        first = o.what;
        break;
      }
    throw std::runtime_error("rate_sweep: " + std::to_string(failed) + "/" +
                             std::to_string(n_cells) + " cells failed (first: " + first + ")");
  }

  RateReport report;
  report.T_grid = cfg.T_grid;
  report.m_grid = m_grid;
  report.theory_R = theory_R;
  report.failed_cells = failed;
  report.burn_in_index =
      std::min<int>(static_cast<int>(cfg.T_grid.size()) - 3,
                    static_cast<int>(std::floor(cfg.burn_in_frac * cfg.T_grid.size())));
  report.burn_in_index = std::max(report.burn_in_index, 0);

  for (int arm = 0; arm < 2; ++arm) {
    ArmResult res;
    res.name = (arm == 0 ? cfg.reg : cfg.unreg).name;
    std::vector<std::pair<double, double>> slope_points;
    for (std::int64_t ti = 0; ti < n_T; ++ti) {
      std::vector<double> risks;
      for (int rep = 0; rep < cfg.n_reps; ++rep) {
        const CellOutcome& o = outcomes[static_cast<std::size_t>(ti * cfg.n_reps + rep)];
        if (!o.failed) risks.push_back(arm == 0 ? o.risk_reg : o.risk_unreg);
      }
      CellStat stat;
      stat.n = static_cast<int>(risks.size());
      if (stat.n == 0) throw std::runtime_error("rate_sweep: every repetition failed at one T");
      double mean = 0.0;
      for (double v : risks) mean += v;
      mean /= stat.n;
      double var = 0.0;
      for (double v : risks) var += (v - mean) * (v - mean);
      var = stat.n > 1 ? var / (stat.n - 1) : 0.0;
      double half = 1.96 * std::sqrt(var / stat.n);
      stat.mean = mean;
      stat.ci_lo = mean - half;
      stat.ci_hi = mean + half;
      const double T = static_cast<double>(cfg.T_grid[static_cast<std::size_t>(ti)]);
      stat.bound = arm == 0 ? rate_bound_prob(T, theory_R, cfg.theory).bound
                            : noreg_rate(T, cfg.theory).bound_prob;
      res.cells.push_back(stat);
      if (ti >= report.burn_in_index) slope_points.emplace_back(T, mean);
    }
    res.slope = slope_fit(slope_points);
    report.arms.push_back(std::move(res));
  }

  report.burn_in_threshold_T = burn_in_threshold_prob(theory_R, cfg.theory);

  std::ostringstream man;
  man << "master_seed = " << cfg.master_seed << "\n";
  man << "n_reps = " << cfg.n_reps << "\n";
  man << "T_eval = " << cfg.T_eval << ", n_traj = " << cfg.n_traj << "\n";
  man << "m_schedule = clamp(round(" << cfg.m_schedule.coef << " * T^" << cfg.m_schedule.power
      << "), " << cfg.m_schedule.lo << ", " << cfg.m_schedule.hi << ")\n";
  auto policy_name = [](ArmSpec::LambdaPolicy p) {
    switch (p) {
      case ArmSpec::LambdaPolicy::Theory: return "theory";
      case ArmSpec::LambdaPolicy::Validation: return "validation";
      default: return "fixed";
    }
  };
  man << "arm " << cfg.reg.name << ": lambda_T = " << fmt_g17(cfg.reg.lambda_T)
      << ", lambda_sob = " << fmt_g17(cfg.reg.lambda_sob)
      << ", policy = " << policy_name(cfg.reg.policy) << "\n";
  man << "arm " << cfg.unreg.name << ": lambda_T = " << fmt_g17(cfg.unreg.lambda_T)
      << ", lambda_sob = " << fmt_g17(cfg.unreg.lambda_sob)
      << ", policy = " << policy_name(cfg.unreg.policy) << "\n";
  man << "theory_R = " << fmt_g17(theory_R) << "\n";
  man << "burn_in_index = " << report.burn_in_index << "\n";
  man << "failed_cells = " << failed << "\n";
  man << "# constants audit\n";
  for (const auto& c : audit_constants(cfg.theory))
    man << c.name << " = " << fmt_g17(c.value) << "  # " << c.formula << "\n";
  report.manifest = man.str();
  return report;
}

void emit_outputs(const RateReport& report, const std::string& dir) {
  if (report.T_grid.size() < 4)
    throw std::invalid_argument("emit_outputs: report needs >= 4 grid points");
  std::filesystem::create_directories(dir);

  {
    std::ofstream os(dir + "/rates.csv");
    if (!os) throw std::runtime_error("emit_outputs: cannot open rates.csv");
    CsvWriter csv(os, {"T", "arm", "mean", "ci_lo", "ci_hi", "bound"});
    for (const auto& arm : report.arms) {
      for (std::size_t ti = 0; ti < report.T_grid.size(); ++ti) {
        const CellStat& c = arm.cells[ti];
        csv.row({std::to_string(report.T_grid[ti]), arm.name, fmt_g17(c.mean), fmt_g17(c.ci_lo),
                 fmt_g17(c.ci_hi), fmt_g17(c.bound)});
      }
    }
  }
  {
    std::ofstream os(dir + "/slopes.csv");
    if (!os) throw std::runtime_error("emit_outputs: cannot open slopes.csv");
    CsvWriter csv(os, {"arm", "slope", "ci_lo", "ci_hi", "intercept", "n_points"});
    for (const auto& arm : report.arms)
      csv.row({arm.name, fmt_g17(arm.slope.slope), fmt_g17(arm.slope.slope - arm.slope.ci_half),
               fmt_g17(arm.slope.slope + arm.slope.ci_half), fmt_g17(arm.slope.intercept),
               std::to_string(arm.slope.n)});
  }
  {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::vector<SvgSeries> series;
    int idx = 0;
    for (const auto& arm : report.arms) {
      SvgSeries s;
      s.label = arm.name;
      s.color = colors[idx % 4];
      for (std::size_t ti = 0; ti < report.T_grid.size(); ++ti) {
        s.x.push_back(static_cast<double>(report.T_grid[ti]));
        s.y.push_back(arm.cells[ti].mean);
        s.band_lo.push_back(std::max(arm.cells[ti].ci_lo, 1e-300));
        s.band_hi.push_back(arm.cells[ti].ci_hi);
      }
      series.push_back(std::move(s));
      SvgSeries b;
      b.label = arm.name + " bound";
      b.color = colors[idx % 4];
      b.dashed = true;
      for (std::size_t ti = 0; ti < report.T_grid.size(); ++ti) {
        b.x.push_back(static_cast<double>(report.T_grid[ti]));
        b.y.push_back(arm.cells[ti].bound);
      }
      if (b.y.front() > 0.0) series.push_back(std::move(b));
      ++idx;
    }
    std::ofstream os(dir + "/plot.svg");
    if (!os) throw std::runtime_error("emit_outputs: cannot open plot.svg");
    os << svg_loglog_plot(series, "excess risk vs T", "T", "excess risk");
  }
  {
    std::ofstream os(dir + "/manifest.txt");
    if (!os) throw std::runtime_error("emit_outputs: cannot open manifest.txt");
    os << report.manifest;
    os << "burn_in_threshold_T = " << report.burn_in_threshold_T << "\n";
    for (const auto& arm : report.arms)
      os << "slope." << arm.name << " = " << fmt_g17(arm.slope.slope) << " +/- "
         << fmt_g17(arm.slope.ci_half) << "\n";
  }
}

}  // namespace pirem
