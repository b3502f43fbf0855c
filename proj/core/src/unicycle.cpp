// SPDX-License-Identifier: Apache-2.0
//
// Unicycle experiment: forward-Euler unicycle with uniform random inputs,
// noisy next-state observations, and the non-slip residual
//   q(s,u) = (x2' - x2) cos(theta) - (x1' - x1) sin(theta)
// as a Monte Carlo quadratic penalty on a linear-in-trig-features predictor.
//
// Feature protocol (recorded in the manifest): outputs 1 and 2 share a fixed
// block of heading/speed harmonics and nu x theta interactions, plus a
// growing tail of own-position harmonics K(T); output 3 (heading update) is
// a fixed small basis over (theta, omega). The non-slip penalty couples the
// position outputs, so the regularized arm solves one joint system for them.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pirem/csv.hpp"
#include "pirem/harness.hpp"
#include "pirem/rng.hpp"

namespace pirem {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = kPi / 2.0;

struct Scaled {
  double x1, x2, th, nu, om;  // all in [-1,1]
};

Scaled scale_point(const UnicycleConfig& cfg, const Eigen::Vector3d& s, const Eigen::Vector2d& u) {
  Scaled z;
  z.x1 = s[0] / cfg.pos_halfwidth;
  z.x2 = s[1] / cfg.pos_halfwidth;
  z.th = 4.0 * s[2] / kPi - 1.0;
  z.nu = cfg.nu_hi > cfg.nu_lo ? 2.0 * (u[0] - cfg.nu_lo) / (cfg.nu_hi - cfg.nu_lo) - 1.0 : 0.0;
  z.om = cfg.omega_max > 0.0 ? u[1] / cfg.omega_max : 0.0;
  return z;
}

/// Fixed feature block over (theta, nu) shared by the position outputs:
/// constant, theta harmonics, nu harmonics, nu x theta interaction pairs.
/// Returns the feature count.
int fixed_block_size(const UnicycleConfig& cfg) {
  return 1 + 2 * cfg.theta_harmonics + 2 * cfg.nu_harmonics +
         4 * cfg.prod_harmonics * cfg.prod_harmonics;
}

int position_feature_count(const UnicycleConfig& cfg, std::int64_t K) {
  return fixed_block_size(cfg) + 2 * static_cast<int>(K);
}

/// Features for a position output. `own` is the scaled own-position
/// coordinate (x1 for output 1, x2 for output 2).
void position_features(const UnicycleConfig& cfg, const Scaled& z, double own, std::int64_t K,
                       double* out) {
  int idx = 0;
  out[idx++] = 1.0;
  for (int k = 1; k <= cfg.theta_harmonics; ++k) {
    double ph = kHalfPi * k * z.th;
    out[idx++] = std::cos(ph);
    out[idx++] = std::sin(ph);
  }
  for (int k = 1; k <= cfg.nu_harmonics; ++k) {
    double ph = kHalfPi * k * z.nu;
    out[idx++] = std::cos(ph);
    out[idx++] = std::sin(ph);
  }
  for (int kn = 1; kn <= cfg.prod_harmonics; ++kn) {
    for (int kt = 1; kt <= cfg.prod_harmonics; ++kt) {
      for (int sign : {1, -1}) {
        double ph = kHalfPi * (kn * z.nu + sign * kt * z.th);
        out[idx++] = std::cos(ph);
        out[idx++] = std::sin(ph);
      }
    }
  }
  for (std::int64_t k = 1; k <= K; ++k) {
    double ph = kHalfPi * static_cast<double>(k) * own;
    out[idx++] = std::cos(ph);
    out[idx++] = std::sin(ph);
  }
}

constexpr int kHeadingFeatures = 9;  // constant + 2 harmonics each in theta, omega

void heading_features(const Scaled& z, double* out) {
  int idx = 0;
  out[idx++] = 1.0;
  for (int k = 1; k <= 2; ++k) {
    double ph = kHalfPi * k * z.th;
    out[idx++] = std::cos(ph);
    out[idx++] = std::sin(ph);
  }
  for (int k = 1; k <= 2; ++k) {
    double ph = kHalfPi * k * z.om;
    out[idx++] = std::cos(ph);
    out[idx++] = std::sin(ph);
  }
}

struct UniData {
  Eigen::MatrixXd S;  // T x 3 states
  Eigen::MatrixXd U;  // T x 2 inputs
  Eigen::MatrixXd Y;  // T x 3 noisy next states
};

bool in_box(const UnicycleConfig& cfg, const Eigen::Vector3d& s) {
  return std::abs(s[0]) <= cfg.pos_halfwidth && std::abs(s[1]) <= cfg.pos_halfwidth &&
         s[2] >= 0.0 && s[2] <= kHalfPi;
}

Eigen::Vector3d random_state(const UnicycleConfig& cfg, Rng& rng) {
  return {rng.uniform(-cfg.pos_halfwidth, cfg.pos_halfwidth),
          rng.uniform(-cfg.pos_halfwidth, cfg.pos_halfwidth), rng.uniform(0.0, kHalfPi)};
}

UniData simulate_unicycle(const UnicycleConfig& cfg, std::int64_t T, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xdeadbeefULL));
  UniData d;
  d.S.resize(T, 3);
  d.U.resize(T, 2);
  d.Y.resize(T, 3);
  Eigen::Vector3d s = random_state(cfg, rng);
  for (std::int64_t t = 0; t < T; ++t) {
    Eigen::Vector2d u{rng.uniform(cfg.nu_lo, cfg.nu_hi), rng.uniform(-cfg.omega_max, cfg.omega_max)};
    d.S.row(t) = s.transpose();
    d.U.row(t) = u.transpose();
    Eigen::Vector3d sn = unicycle_true_next(s, u, cfg.dt);
    for (int j = 0; j < 3; ++j) d.Y(t, j) = sn[j] + rng.gaussian(cfg.sigma);
    s = sn;
    if (!in_box(cfg, s)) s = random_state(cfg, rng);  // restart on leaving the training box
  }
  return d;
}

struct PenaltySystem {
  Eigen::MatrixXd Q;  // (2 m1) x (2 m1)
  Eigen::VectorXd b;  // linear part: penalty = z'Qz + 2 b'z + const
  int m1 = 0;
};

/// Penalty rows at uniform nodes: q = [-sin(th) phi1 | cos(th) phi2] z - c0.
PenaltySystem build_penalty(const UnicycleConfig& cfg, std::int64_t K, int n_nodes,
                            std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x9031ULL));
  const int m1 = position_feature_count(cfg, K);
  Eigen::MatrixXd A(n_nodes, 2 * m1);
  Eigen::VectorXd c0(n_nodes);
  std::vector<double> f1(static_cast<std::size_t>(m1)), f2(static_cast<std::size_t>(m1));
  for (int n = 0; n < n_nodes; ++n) {
    Eigen::Vector3d s = random_state(cfg, rng);
    Eigen::Vector2d u{rng.uniform(cfg.nu_lo, cfg.nu_hi), rng.uniform(-cfg.omega_max, cfg.omega_max)};
    Scaled z = scale_point(cfg, s, u);
    position_features(cfg, z, z.x1, K, f1.data());
    position_features(cfg, z, z.x2, K, f2.data());
    double cth = std::cos(s[2]), sth = std::sin(s[2]);
    for (int j = 0; j < m1; ++j) {
      A(n, j) = -sth * f1[static_cast<std::size_t>(j)];
      A(n, m1 + j) = cth * f2[static_cast<std::size_t>(j)];
    }
    c0[n] = -(s[1] * cth) + s[0] * sth;  // q = A zs + (-c0 offset folded below)
  }
  PenaltySystem sys;
  sys.m1 = m1;
  sys.Q = A.transpose() * A / n_nodes;
  sys.b = A.transpose() * c0 / n_nodes;
  return sys;
}

struct UniFit {
  Eigen::VectorXd z1, z2, z3;
  std::int64_t K = 0;
};

UniFit fit_unicycle(const UnicycleConfig& cfg, const UniData& d, std::int64_t K, double lambda,
                    const PenaltySystem& pen) {
  const std::int64_t T = d.S.rows();
  const int m1 = position_feature_count(cfg, K);
  Eigen::MatrixXd P1(T, m1), P2(T, m1), P3(T, kHeadingFeatures);
  std::vector<double> buf(static_cast<std::size_t>(m1));
  double h3[kHeadingFeatures];
  for (std::int64_t t = 0; t < T; ++t) {
    Eigen::Vector3d s = d.S.row(t);
    Eigen::Vector2d u = d.U.row(t);
    Scaled z = scale_point(cfg, s, u);
    position_features(cfg, z, z.x1, K, buf.data());
    for (int j = 0; j < m1; ++j) P1(t, j) = buf[static_cast<std::size_t>(j)];
    position_features(cfg, z, z.x2, K, buf.data());
    for (int j = 0; j < m1; ++j) P2(t, j) = buf[static_cast<std::size_t>(j)];
    heading_features(z, h3);
    for (int j = 0; j < kHeadingFeatures; ++j) P3(t, j) = h3[j];
  }

  // joint normal equations for the coupled position outputs
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * m1, 2 * m1);
  M.topLeftCorner(m1, m1) = P1.transpose() * P1 / static_cast<double>(T);
  M.bottomRightCorner(m1, m1) = P2.transpose() * P2 / static_cast<double>(T);
  Eigen::VectorXd rhs(2 * m1);
  rhs.head(m1) = P1.transpose() * d.Y.col(0) / static_cast<double>(T);
  rhs.tail(m1) = P2.transpose() * d.Y.col(1) / static_cast<double>(T);
  if (lambda > 0.0) {
    M += lambda * pen.Q;
    rhs -= lambda * pen.b;
  }
  M += cfg.ridge * Eigen::MatrixXd::Identity(2 * m1, 2 * m1);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("unicycle fit: position system factorization failed");
  Eigen::VectorXd z12 = ldlt.solve(rhs);

  Eigen::MatrixXd M3 = P3.transpose() * P3 / static_cast<double>(T) +
                       cfg.ridge * Eigen::MatrixXd::Identity(kHeadingFeatures, kHeadingFeatures);
  Eigen::VectorXd z3 = M3.ldlt().solve(P3.transpose() * d.Y.col(2) / static_cast<double>(T));

  UniFit fit;
  fit.K = K;
  fit.z1 = z12.head(m1);
  fit.z2 = z12.tail(m1);
  fit.z3 = z3;
  return fit;
}

double unicycle_risk(const UnicycleConfig& cfg, const UniFit& fit, std::int64_t T_eval, int n_traj,
                     std::uint64_t seed) {
  const int m1 = position_feature_count(cfg, fit.K);
  std::vector<double> f(static_cast<std::size_t>(m1));
  double h3[kHeadingFeatures];
  double total = 0.0;
  for (int j = 0; j < n_traj; ++j) {
    UniData d = simulate_unicycle(cfg, T_eval, derive_seed(seed, 0xe7, static_cast<std::uint64_t>(j)));
    double acc = 0.0;
    for (std::int64_t t = 0; t < T_eval; ++t) {
      Eigen::Vector3d s = d.S.row(t);
      Eigen::Vector2d u = d.U.row(t);
      Eigen::Vector3d truth = unicycle_true_next(s, u, cfg.dt);
      Scaled z = scale_point(cfg, s, u);
      position_features(cfg, z, z.x1, fit.K, f.data());
      double g1 = 0.0;
      for (int k = 0; k < m1; ++k) g1 += f[static_cast<std::size_t>(k)] * fit.z1[k];
      position_features(cfg, z, z.x2, fit.K, f.data());
      double g2 = 0.0;
      for (int k = 0; k < m1; ++k) g2 += f[static_cast<std::size_t>(k)] * fit.z2[k];
      heading_features(z, h3);
      double g3 = 0.0;
      for (int k = 0; k < kHeadingFeatures; ++k) g3 += h3[k] * fit.z3[k];
      acc += (g1 - truth[0]) * (g1 - truth[0]) + (g2 - truth[1]) * (g2 - truth[1]) +
             (g3 - truth[2]) * (g3 - truth[2]);
    }
    total += acc / static_cast<double>(T_eval);
  }
  return total / n_traj;
}

void cell_parallel(std::int64_t n, int jobs, const std::function<void(std::int64_t)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr error;
  std::mutex error_mu;
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

}  // namespace

Eigen::Vector3d unicycle_true_next(const Eigen::Vector3d& s, const Eigen::Vector2d& u, double dt) {
  return {s[0] + u[0] * std::cos(s[2]) * dt, s[1] + u[0] * std::sin(s[2]) * dt, s[2] + u[1] * dt};
}

void UnicycleConfig::validate() const {
  if (T_grid.size() < 4) throw std::invalid_argument("UnicycleConfig: T grid needs >= 4 points");
  for (std::size_t i = 1; i < T_grid.size(); ++i)
    if (T_grid[i] <= T_grid[i - 1])
      throw std::invalid_argument("UnicycleConfig: T grid must be strictly increasing");
  if (n_reps < 5) throw std::invalid_argument("UnicycleConfig: n_reps must be >= 5");
  if (!(dt > 0.0) || !(sigma > 0.0) || !(pos_halfwidth > 0.0))
    throw std::invalid_argument("UnicycleConfig: dt, sigma, pos_halfwidth must be > 0");
  if (n_nodes < 10) throw std::invalid_argument("UnicycleConfig: n_nodes must be >= 10");
}

McEstimate unicycle_penalty_mc(
    const UnicycleConfig& cfg,
    const std::function<Eigen::Vector2d(const Eigen::Vector3d&, const Eigen::Vector2d&)>& g12,
    int n_nodes, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x9031ULL));
  double sum = 0.0, sum2 = 0.0;
  for (int n = 0; n < n_nodes; ++n) {
    Eigen::Vector3d s{rng.uniform(-cfg.pos_halfwidth, cfg.pos_halfwidth),
                      rng.uniform(-cfg.pos_halfwidth, cfg.pos_halfwidth),
                      rng.uniform(0.0, kHalfPi)};
    Eigen::Vector2d u{rng.uniform(cfg.nu_lo, cfg.nu_hi), rng.uniform(-cfg.omega_max, cfg.omega_max)};
    Eigen::Vector2d g = g12(s, u);
    double q = (g[1] - s[1]) * std::cos(s[2]) - (g[0] - s[0]) * std::sin(s[2]);
    sum += q * q;
    sum2 += q * q * q * q;
  }
  McEstimate est;
  est.n = n_nodes;
  est.value = sum / n_nodes;
  est.std_error = std::sqrt(std::max(0.0, sum2 / n_nodes - est.value * est.value) / n_nodes);
  return est;
}

RateReport unicycle_experiment(const UnicycleConfig& cfg) {
  cfg.validate();
  const auto n_T = static_cast<std::int64_t>(cfg.T_grid.size());
  const std::int64_t n_cells = n_T * cfg.n_reps;

  std::vector<std::int64_t> K_grid;
  for (std::int64_t ti = 0; ti < n_T; ++ti) {
    double raw = cfg.K_coef * std::pow(static_cast<double>(cfg.T_grid[static_cast<std::size_t>(ti)]),
                                       cfg.K_pow);
    K_grid.push_back(std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(raw)),
                                              cfg.K_min, cfg.K_max));
  }
  std::vector<PenaltySystem> penalties;
  penalties.reserve(static_cast<std::size_t>(n_T));
  for (std::int64_t ti = 0; ti < n_T; ++ti)
    penalties.push_back(
        build_penalty(cfg, K_grid[static_cast<std::size_t>(ti)], cfg.n_nodes, cfg.node_seed));

  struct Outcome {
    double reg = 0.0, unreg = 0.0;
    bool failed = false;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(n_cells));
  cell_parallel(n_cells, cfg.jobs, [&](std::int64_t cell) {
    const std::int64_t ti = cell / cfg.n_reps;
    const std::int64_t rep = cell % cfg.n_reps;
    Outcome& out = outcomes[static_cast<std::size_t>(cell)];
    try {
      const std::int64_t T = cfg.T_grid[static_cast<std::size_t>(ti)];
      const std::int64_t K = K_grid[static_cast<std::size_t>(ti)];
      UniData data = simulate_unicycle(
          cfg, T, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(ti),
                              static_cast<std::uint64_t>(rep), 10));
      std::uint64_t eval_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(ti),
                                            static_cast<std::uint64_t>(rep), 11);
      UniFit reg = fit_unicycle(cfg, data, K, cfg.lambda, penalties[static_cast<std::size_t>(ti)]);
      UniFit unreg = fit_unicycle(cfg, data, K, 0.0, penalties[static_cast<std::size_t>(ti)]);
      out.reg = unicycle_risk(cfg, reg, cfg.T_eval, cfg.n_traj, eval_seed);
      out.unreg = unicycle_risk(cfg, unreg, cfg.T_eval, cfg.n_traj, eval_seed);
    } catch (const std::exception&) {
      out.failed = true;
    }
  });

  int failed = 0;
  for (const auto& o : outcomes)
    if (o.failed) ++failed;
  if (failed > 0.2 * static_cast<double>(n_cells))
    throw std::runtime_error("unicycle_experiment: too many failed cells");

  // theory parameters for the overlays: 5 scaled inputs, minimal admissible
  // smoothness s = 2 dx
  ProblemParams theory = cfg.theory;
  theory.dx = 5;
  theory.s = std::max(theory.s, 10);
  theory.dy = 3;
  theory.sigma_w = cfg.sigma;
  theory.L = 1.0;
  theory.validate();

  // alignment proxy: Monte Carlo penalty of the projected truth at the top K
  double R_proxy;
  {
    const std::int64_t K = K_grid.back();
    UniData big = simulate_unicycle(cfg, 20000, derive_seed(cfg.master_seed, 0x77, 0, 0));
    // replace the noisy observations with the exact next state
    for (std::int64_t t = 0; t < big.S.rows(); ++t) {
      Eigen::Vector3d s = big.S.row(t);
      Eigen::Vector2d u = big.U.row(t);
      big.Y.row(t) = unicycle_true_next(s, u, cfg.dt).transpose();
    }
    UniFit proj = fit_unicycle(cfg, big, K, 0.0, penalties.back());
    const int m1 = position_feature_count(cfg, K);
    std::vector<double> f(static_cast<std::size_t>(m1));
    auto g12 = [&](const Eigen::Vector3d& s, const Eigen::Vector2d& u) {
      Scaled z = scale_point(cfg, s, u);
      position_features(cfg, z, z.x1, K, f.data());
      double g1 = 0.0;
      for (int k = 0; k < m1; ++k) g1 += f[static_cast<std::size_t>(k)] * proj.z1[k];
      position_features(cfg, z, z.x2, K, f.data());
      double g2 = 0.0;
      for (int k = 0; k < m1; ++k) g2 += f[static_cast<std::size_t>(k)] * proj.z2[k];
      return Eigen::Vector2d{g1, g2};
    };
    R_proxy = std::max(unicycle_penalty_mc(cfg, g12, 4000, cfg.node_seed + 1).value, 1e-12);
  }

  RateReport report;
  report.T_grid = cfg.T_grid;
  for (std::int64_t K : K_grid) report.m_grid.push_back(position_feature_count(cfg, K));
  report.theory_R = R_proxy;
  report.failed_cells = failed;
  report.burn_in_index =
      std::max(0, std::min<int>(static_cast<int>(cfg.T_grid.size()) - 3,
                                static_cast<int>(std::floor(cfg.burn_in_frac * cfg.T_grid.size()))));

  for (int arm = 0; arm < 2; ++arm) {
    ArmResult res;
    res.name = arm == 0 ? "reg" : "unreg";
    std::vector<std::pair<double, double>> slope_points;
    for (std::int64_t ti = 0; ti < n_T; ++ti) {
      std::vector<double> risks;
      for (int rep = 0; rep < cfg.n_reps; ++rep) {
        const Outcome& o = outcomes[static_cast<std::size_t>(ti * cfg.n_reps + rep)];
        if (!o.failed) risks.push_back(arm == 0 ? o.reg : o.unreg);
      }
      CellStat stat;
      stat.n = static_cast<int>(risks.size());
      if (stat.n == 0) throw std::runtime_error("unicycle_experiment: empty cell");
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
      double T = static_cast<double>(cfg.T_grid[static_cast<std::size_t>(ti)]);
      stat.bound = arm == 0 ? rate_bound_exp(T, R_proxy, theory).bound
                            : noreg_rate(T, theory).bound_exp;
      res.cells.push_back(stat);
      if (ti >= report.burn_in_index) slope_points.emplace_back(T, mean);
    }
    res.slope = slope_fit(slope_points);
    report.arms.push_back(std::move(res));
  }
  report.burn_in_threshold_T = burn_in_threshold_exp(R_proxy, theory);

  std::ostringstream man;
  man << "experiment = unicycle\n";
  man << "master_seed = " << cfg.master_seed << "\n";
  man << "dt = " << cfg.dt << ", sigma = " << cfg.sigma << "\n";
  man << "input law: nu ~ U[" << cfg.nu_lo << "," << cfg.nu_hi << "], omega ~ U[-"
      << cfg.omega_max << "," << cfg.omega_max << "], restart on leaving the box\n";
  man << "feature protocol: fixed block " << fixed_block_size(cfg)
      << " (theta<=" << cfg.theta_harmonics << ", nu<=" << cfg.nu_harmonics << ", products<="
      << cfg.prod_harmonics << "), growing own-position harmonics K(T) = clamp(round("
      << cfg.K_coef << "*T^" << cfg.K_pow << "), " << cfg.K_min << ", " << cfg.K_max << ")\n";
  man << "heading output basis = " << kHeadingFeatures << " features over (theta, omega)\n";
  man << "lambda = " << fmt_g17(cfg.lambda) << ", ridge = " << fmt_g17(cfg.ridge)
      << ", penalty nodes = " << cfg.n_nodes << "\n";
  man << "alignment proxy R = " << fmt_g17(R_proxy) << "\n";
  man << "n_reps = " << cfg.n_reps << ", T_eval = " << cfg.T_eval << ", n_traj = " << cfg.n_traj
      << "\n";
  report.manifest = man.str();
  return report;
}

}  // namespace pirem
