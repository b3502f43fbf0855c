// SPDX-License-Identifier: Apache-2.0
#include "pirem/data_process.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pirem/csv.hpp"
#include "pirem/rng.hpp"

namespace pirem {

namespace {

/// Distance of a point to the boundary of [-L,L]^d (negative outside).
double boundary_margin(const Eigen::VectorXd& y, double L) {
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < y.size(); ++j) margin = std::min(margin, L - std::abs(y[j]));
  return margin;
}

/// Smallest margin of f* over a deterministic grid plus seeded interior
/// samples. Deliberately dense: a margin violation must fail construction,
/// not a later simulation.
double validate_margin(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fstar, int dx,
                       double L) {
  double margin = std::numeric_limits<double>::infinity();
  int per_axis = std::max(3, static_cast<int>(std::ceil(std::pow(3000.0, 1.0 / dx))));
  per_axis = std::min(per_axis, 65);
  std::vector<int> idx(static_cast<std::size_t>(dx), 0);
  const auto total = static_cast<std::int64_t>(std::pow(static_cast<double>(per_axis), dx));
  Eigen::VectorXd x(dx);
  for (std::int64_t n = 0; n < total; ++n) {
    for (int j = 0; j < dx; ++j)
      x[j] = -L + 2.0 * L * idx[static_cast<std::size_t>(j)] / (per_axis - 1);
    margin = std::min(margin, boundary_margin(fstar(x), L));
    for (int j = dx - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < per_axis) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  Rng rng(derive_seed(0xfacadeULL, static_cast<std::uint64_t>(dx)));
  for (int n = 0; n < 2000; ++n) {
    for (int j = 0; j < dx; ++j) x[j] = rng.uniform(-L, L);
    margin = std::min(margin, boundary_margin(fstar(x), L));
  }
  return margin;
}

}  // namespace

DynSystem DynSystem::make(int dx, double L, double noise_sigma,
                          std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fstar,
                          InitLaw init_law, const Eigen::VectorXd& x0) {
  if (dx < 1 || L <= 0.0) throw std::invalid_argument("DynSystem: need dx >= 1 and L > 0");
  if (noise_sigma <= 0.0) throw std::invalid_argument("DynSystem: noise_sigma must be > 0");
  if (!fstar) throw std::invalid_argument("DynSystem: fstar is required");
  DynSystem sys;
  sys.dx = dx;
  sys.dy = dx;
  sys.L = L;
  sys.noise_sigma = noise_sigma;
  sys.fstar = std::move(fstar);
  sys.init_law = init_law;
  sys.x0 = x0.size() ? x0 : Eigen::VectorXd::Zero(dx);
  if (sys.x0.size() != dx) throw std::invalid_argument("DynSystem: x0 dimension mismatch");
  if (boundary_margin(sys.x0, L) < 0.0) throw std::invalid_argument("DynSystem: x0 outside the cube");
  sys.margin = validate_margin(sys.fstar, dx, L);
  if (sys.margin <= 0.0)
    throw std::invalid_argument(
        "DynSystem: fstar does not map the cube strictly into its interior (margin violation)");
  return sys;
}

DynSystem DynSystem::make(const FourierCoeffs& fstar, double noise_sigma, InitLaw init_law,
                          const Eigen::VectorXd& x0) {
  if (fstar.dy != fstar.dx)
    throw std::invalid_argument("DynSystem: basis-encoded fstar needs dy == dx");
  FourierCoeffs copy = fstar;
  DynSystem sys = make(
      fstar.dx, fstar.L, noise_sigma,
      [copy](const Eigen::VectorXd& x) { return copy.evaluate(x); }, init_law, x0);
  sys.fstar_coeffs = fstar;
  return sys;
}

TrajectoryDataset simulate_trajectory(const DynSystem& sys, std::int64_t T, std::uint64_t seed) {
  if (T < 2) throw std::invalid_argument("simulate_trajectory: T must be >= 2");
  Rng rng(derive_seed(seed, 0x7261a3ULL));

  TrajectoryDataset data;
  data.T = T;
  data.seed = seed;
  data.dx = sys.dx;
  data.dy = sys.dy;
  data.L = sys.L;
  data.noise_sigma = sys.noise_sigma;
  data.X.resize(T, sys.dx);
  data.Y.resize(T, sys.dy);
  data.W.resize(T, sys.dy);

  Eigen::VectorXd x(sys.dx);
  if (sys.init_law == DynSystem::InitLaw::Dirac) {
    x = sys.x0;
  } else {
    for (int j = 0; j < sys.dx; ++j) x[j] = rng.uniform(-sys.L, sys.L);
  }

  for (std::int64_t t = 0; t < T; ++t) {
    data.X.row(t) = x.transpose();
    Eigen::VectorXd fx = sys.fstar(x);
    double radius = std::min(4.0 * sys.noise_sigma, boundary_margin(fx, sys.L));
    Eigen::VectorXd w(sys.dy);
    for (int j = 0; j < sys.dy; ++j) w[j] = rng.truncated_gaussian(sys.noise_sigma, radius);
    Eigen::VectorXd y = fx + w;
    data.W.row(t) = w.transpose();
    data.Y.row(t) = y.transpose();
    x = y;
  }
  return data;
}

void save_dataset_csv(const TrajectoryDataset& d, std::ostream& os, bool with_noise) {
  os << "t";
  for (int j = 1; j <= d.dx; ++j) os << ",x_" << j;
  for (int j = 1; j <= d.dy; ++j) os << ",y_" << j;
  if (with_noise)
    for (int j = 1; j <= d.dy; ++j) os << ",w_" << j;
  os << "\n";
  for (std::int64_t t = 0; t < d.T; ++t) {
    os << t;
    for (int j = 0; j < d.dx; ++j) os << "," << fmt_g17(d.X(t, j));
    for (int j = 0; j < d.dy; ++j) os << "," << fmt_g17(d.Y(t, j));
    if (with_noise)
      for (int j = 0; j < d.dy; ++j) os << "," << fmt_g17(d.W(t, j));
    os << "\n";
  }
}

void save_dataset_csv(const TrajectoryDataset& d, const std::string& path, bool with_noise) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_dataset_csv: cannot open " + path);
  save_dataset_csv(d, os, with_noise);
}

TrajectoryDataset load_dataset_csv(std::istream& is, double L) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("load_dataset_csv: empty input");
  auto head = csv_split(line);
  int dx = 0, dy = 0, dw = 0;
  for (const auto& h : head) {
    if (h.rfind("x_", 0) == 0) ++dx;
    else if (h.rfind("y_", 0) == 0) ++dy;
    else if (h.rfind("w_", 0) == 0) ++dw;
  }
  if (dx < 1 || dy < 1) throw std::runtime_error("load_dataset_csv: missing x_/y_ columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = csv_split(line);
    if (cells.size() != head.size()) throw std::runtime_error("load_dataset_csv: ragged row");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(std::stod(c));
    rows.push_back(std::move(row));
  }
  TrajectoryDataset d;
  d.T = static_cast<std::int64_t>(rows.size());
  d.dx = dx;
  d.dy = dy;
  d.L = L;
  d.X.resize(d.T, dx);
  d.Y.resize(d.T, dy);
  d.W = Eigen::MatrixXd::Zero(d.T, dy);
  for (std::int64_t t = 0; t < d.T; ++t) {
    const auto& row = rows[static_cast<std::size_t>(t)];
    for (int j = 0; j < dx; ++j) d.X(t, j) = row[static_cast<std::size_t>(1 + j)];
    for (int j = 0; j < dy; ++j) d.Y(t, j) = row[static_cast<std::size_t>(1 + dx + j)];
    if (dw == dy)
      for (int j = 0; j < dy; ++j) d.W(t, j) = row[static_cast<std::size_t>(1 + dx + dy + j)];
  }
  return d;
}

TrajectoryDataset load_dataset_csv(const std::string& path, double L) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_dataset_csv: cannot open " + path);
  return load_dataset_csv(is, L);
}

void FiniteChain::validate() const {
  if (n_states < 1 || horizon < 1) throw std::invalid_argument("FiniteChain: bad sizes");
  if (initial.size() != n_states || transition.rows() != n_states || transition.cols() != n_states)
    throw std::invalid_argument("FiniteChain: shape mismatch");
  if (std::abs(initial.sum() - 1.0) > 1e-12 || initial.minCoeff() < -1e-15)
    throw std::invalid_argument("FiniteChain: initial distribution not a probability vector");
  for (int i = 0; i < n_states; ++i) {
    if (std::abs(transition.row(i).sum() - 1.0) > 1e-12 || transition.row(i).minCoeff() < -1e-15)
      throw std::invalid_argument("FiniteChain: transition row " + std::to_string(i) +
                                  " not a probability vector");
  }
}

DependenceMatrix dependence_matrix_finite(const FiniteChain& chain) {
  chain.validate();
  const int T = chain.horizon;
  const int n = chain.n_states;
  double path_count = std::pow(static_cast<double>(n), T);
  if (path_count > 1e6)
    throw std::invalid_argument(
        "dependence_matrix_finite: n_states^T exceeds 1e6; use a smaller chain or horizon");

  DependenceMatrix result;
  result.gamma = Eigen::MatrixXd::Identity(T, T);
  if (T == 1) {
    result.norm2 = 1.0;
    return result;
  }

  const auto n_paths = static_cast<std::int64_t>(path_count + 0.5);
  // joint probability of every full path, path encoded base-n with X_0 most
  // significant
  std::vector<double> joint(static_cast<std::size_t>(n_paths));
  std::vector<int> states(static_cast<std::size_t>(T));
  for (std::int64_t p = 0; p < n_paths; ++p) {
    std::int64_t code = p;
    for (int t = T - 1; t >= 0; --t) {
      states[static_cast<std::size_t>(t)] = static_cast<int>(code % n);
      code /= n;
    }
    double prob = chain.initial[states[0]];
    for (int t = 1; t < T; ++t) prob *= chain.transition(states[static_cast<std::size_t>(t - 1)],
                                                         states[static_cast<std::size_t>(t)]);
    joint[static_cast<std::size_t>(p)] = prob;
  }

  // entry (row i, col j), 1-based, i > j: prefix = (X_0..X_{j-1}),
  // suffix = (X_{i-1}..X_{T-1})
  for (int col = 1; col < T; ++col) {
    const auto n_prefix = static_cast<std::int64_t>(std::pow(static_cast<double>(n), col) + 0.5);
    for (int row = col + 1; row <= T; ++row) {
      const int suffix_len = T - (row - 1);
      const auto n_suffix =
          static_cast<std::int64_t>(std::pow(static_cast<double>(n), suffix_len) + 0.5);
      // M(a, b) = P(prefix atom a, suffix path b), marginalizing the middle
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_prefix, n_suffix);
      const auto n_mid = static_cast<std::int64_t>(
          std::pow(static_cast<double>(n), T - col - suffix_len) + 0.5);
      for (std::int64_t p = 0; p < n_paths; ++p) {
        std::int64_t a = p / (n_mid * n_suffix);
        std::int64_t b = p % n_suffix;
        M(a, b) += joint[static_cast<std::size_t>(p)];
      }
      Eigen::VectorXd marginal = M.colwise().sum();  // law of the suffix
      Eigen::VectorXd atom_mass = M.rowwise().sum();

      // sup over all events A (unions of prefix atoms) of
      // TV(P(suffix | A), P(suffix)) via the half-L1 identity
      double sup_tv = 0.0;
      std::vector<std::int64_t> atoms;
      for (std::int64_t a = 0; a < n_prefix; ++a)
        if (atom_mass[a] > 0.0) atoms.push_back(a);
      if (atoms.size() > 20)
        throw std::invalid_argument(
            "dependence_matrix_finite: more than 2^20 prefix events; use a smaller chain or "
            "horizon");
      const auto n_events = (std::int64_t{1} << atoms.size()) - 1;
      for (std::int64_t mask = 1; mask <= n_events; ++mask) {
        double pa = 0.0;
        Eigen::VectorXd cond = Eigen::VectorXd::Zero(n_suffix);
        for (std::size_t bit = 0; bit < atoms.size(); ++bit) {
          if (mask & (std::int64_t{1} << bit)) {
            pa += atom_mass[atoms[bit]];
            cond += M.row(atoms[bit]).transpose();
          }
        }
        double tv = 0.5 * (cond / pa - marginal).lpNorm<1>();
        sup_tv = std::max(sup_tv, tv);
      }
      result.gamma(row - 1, col - 1) = std::sqrt(2.0 * sup_tv);
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(result.gamma);
  result.norm2 = svd.singularValues()[0];
  return result;
}

PersistenceReport persistence_probe(const FourierCoeffs& f, const DynSystem& sys, std::int64_t T,
                                    int n_mc, double S_candidate,
                                    const std::vector<double>& xi_grid, std::uint64_t seed) {
  if (n_mc < 100) throw std::invalid_argument("persistence_probe: n_mc must be >= 100");
  // one pass collects sum_t ||f||^2 per trajectory plus the per-time moments
  std::vector<double> sums(static_cast<std::size_t>(n_mc), 0.0);
  double sum2 = 0.0, sum4 = 0.0;           // accumulate sum_t E||f||^2, E||f||^4
  double sum2_var = 0.0, sum4_var = 0.0;   // second moments for SEs
  for (int mc = 0; mc < n_mc; ++mc) {
    TrajectoryDataset d = simulate_trajectory(sys, T, derive_seed(seed, 0x9e12, static_cast<std::uint64_t>(mc)));
    double s2 = 0.0, s4 = 0.0;
    for (std::int64_t t = 0; t < T; ++t) {
      double nrm2 = f.evaluate(d.X.row(t).transpose()).squaredNorm();
      sums[static_cast<std::size_t>(mc)] += nrm2;
      s2 += nrm2;
      s4 += nrm2 * nrm2;
    }
    sum2 += s2;
    sum4 += s4;
    sum2_var += s2 * s2;
    sum4_var += s4 * s4;
  }
  double mean2 = sum2 / n_mc;  // estimates sum_t E ||f(X_t)||^2
  double mean4 = sum4 / n_mc;
  double se2 = std::sqrt(std::max(0.0, sum2_var / n_mc - mean2 * mean2) / n_mc);
  double se4 = std::sqrt(std::max(0.0, sum4_var / n_mc - mean4 * mean4) / n_mc);

  PersistenceReport report;
  report.S_candidate = S_candidate;
  for (double xi : xi_grid) {
    PersistencePoint pt;
    pt.xi = xi;
    double acc = 0.0, acc2 = 0.0;
    for (double s : sums) {
      double e = std::exp(-xi * s);
      acc += e;
      acc2 += e * e;
    }
    pt.lhs = acc / n_mc;
    pt.lhs_se = std::sqrt(std::max(0.0, acc2 / n_mc - pt.lhs * pt.lhs) / n_mc);
    pt.rhs = std::exp(-xi * mean2 + 0.5 * xi * xi * S_candidate * mean4);
    // delta method: d rhs / d mean2 = -xi rhs, d rhs / d mean4 = xi^2 S/2 rhs
    pt.rhs_se = pt.rhs * std::sqrt(xi * xi * se2 * se2 +
                                   std::pow(0.5 * xi * xi * S_candidate * se4, 2.0));
    pt.holds = pt.lhs <= pt.rhs + 2.0 * (pt.lhs_se + pt.rhs_se);
    report.points.push_back(pt);
  }
  return report;
}

SmallBallReport small_ball_probe(const FourierCoeffs& f, const FourierCoeffs& h,
                                 const DynSystem& sys, std::int64_t T, int n_mc,
                                 const std::vector<double>& u_grid, double C,
                                 std::uint64_t seed) {
  if (f.z == h.z) throw std::invalid_argument("small_ball_probe: f == h (zero denominator)");
  FourierCoeffs diff = f;
  diff.z = f.z - h.z;

  std::vector<double> avg_norm(static_cast<std::size_t>(n_mc), 0.0);
  double sq_total = 0.0;
  for (int mc = 0; mc < n_mc; ++mc) {
    TrajectoryDataset d = simulate_trajectory(sys, T, derive_seed(seed, 0x5ba1, static_cast<std::uint64_t>(mc)));
    double s1 = 0.0, s2 = 0.0;
    for (std::int64_t t = 0; t < T; ++t) {
      double nrm = diff.evaluate(d.X.row(t).transpose()).norm();
      s1 += nrm;
      s2 += nrm * nrm;
    }
    avg_norm[static_cast<std::size_t>(mc)] = s1 / static_cast<double>(T);
    sq_total += s2 / static_cast<double>(T);
  }
  SmallBallReport report;
  report.l2_norm = std::sqrt(sq_total / n_mc);

  for (double u : u_grid) {
    SmallBallPoint pt;
    pt.u = u;
    int hits = 0;
    double threshold = u * report.l2_norm;
    for (double v : avg_norm)
      if (v >= threshold * (1.0 - 1e-12)) ++hits;
    pt.freq = static_cast<double>(hits) / n_mc;
    double se = std::sqrt(std::max(pt.freq * (1.0 - pt.freq), 1.0 / n_mc) / n_mc);
    pt.ci_lo = std::max(0.0, pt.freq - 1.96 * se);
    pt.ci_hi = std::min(1.0, pt.freq + 1.96 * se);
    pt.bound = std::pow(1.0 - u * u, 2.0) / C;
    report.points.push_back(pt);
  }
  return report;
}

}  // namespace pirem
