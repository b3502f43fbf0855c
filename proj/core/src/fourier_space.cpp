// SPDX-License-Identifier: Apache-2.0
#include "pirem/fourier_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pirem/csv.hpp"

namespace pirem {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// true when the first nonzero component is positive (pair representative)
bool is_representative(const std::vector<int>& k) {
  for (int v : k) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;  // zero vector handled separately
}

int inf_norm(const std::vector<int>& k) {
  int h = 0;
  for (int v : k) h = std::max(h, std::abs(v));
  return h;
}

}  // namespace

BasisIndexMap::BasisIndexMap(int dx) : dx_(dx) {
  if (dx < 1) throw std::invalid_argument("BasisIndexMap: dx must be >= 1");
  shell_rep_start_.push_back(0);  // shell 1 starts at rep 0
  shells_done_ = 0;
}

void BasisIndexMap::extend_shell(int shell) const {
  // enumerate the representatives of {k : ||k||_inf == shell} in
  // lexicographic order over k
  std::vector<int> k(dx_, -shell);
  for (;;) {
    if (inf_norm(k) == shell && is_representative(k)) reps_.push_back(k);
    int j = dx_ - 1;
    for (; j >= 0; --j) {
      if (++k[j] <= shell) break;
      k[j] = -shell;
    }
    if (j < 0) break;
  }
  shell_rep_start_.push_back(static_cast<std::int64_t>(reps_.size()));
  shells_done_ = shell;
}

void BasisIndexMap::extend_to_rep(std::int64_t rep_count) const {
  while (static_cast<std::int64_t>(reps_.size()) < rep_count) extend_shell(shells_done_ + 1);
}

std::vector<int> BasisIndexMap::frequency_of(std::int64_t ell) const {
  if (ell < 1) throw std::invalid_argument("frequency_of: ell must be >= 1");
  if (ell == 1) return std::vector<int>(dx_, 0);
  std::int64_t pair = (ell - 2) / 2;  // 0-based representative index
  extend_to_rep(pair + 1);
  std::vector<int> k = reps_[static_cast<std::size_t>(pair)];
  if ((ell - 2) % 2 == 1) {
    for (int& v : k) v = -v;  // sine member carries the negated label
  }
  return k;
}

std::int64_t BasisIndexMap::index_of(const std::vector<int>& k) const {
  if (static_cast<int>(k.size()) != dx_) throw std::invalid_argument("index_of: dimension mismatch");
  int h = inf_norm(k);
  if (h == 0) return 1;
  bool rep = is_representative(k);
  std::vector<int> r = k;
  if (!rep) {
    for (int& v : r) v = -v;
  }
  while (shells_done_ < h) extend_shell(shells_done_ + 1);
  auto lo = reps_.begin() + shell_rep_start_[h - 1];
  auto hi = reps_.begin() + shell_rep_start_[h];
  auto it = std::lower_bound(lo, hi, r);
  if (it == hi || *it != r) throw std::logic_error("index_of: representative not found");
  std::int64_t pair = it - reps_.begin();
  return 2 + 2 * pair + (rep ? 0 : 1);
}

const BasisIndexMap& index_map(int dx) {
  // thread-local instances: the map grows lazily, so sharing across threads
  // would need locking on every lookup
  thread_local std::map<int, BasisIndexMap> local;
  auto it = local.find(dx);
  if (it == local.end()) it = local.emplace(dx, BasisIndexMap(dx)).first;
  return it->second;
}

std::vector<int> frequency_index(std::int64_t ell, int dx) {
  return index_map(dx).frequency_of(ell);
}

namespace {

void check_domain(const Eigen::Ref<const Eigen::VectorXd>& x, double L) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::abs(x[j]) > 2.0 * L + 1e-12)
      throw std::domain_error("basis_eval: point outside the medium cube [-2L,2L]^dx");
  }
}

double phase_of(const std::vector<int>& k, const Eigen::Ref<const Eigen::VectorXd>& x, double L) {
  double dot = 0.0;
  for (std::size_t j = 0; j < k.size(); ++j) dot += k[j] * x[static_cast<Eigen::Index>(j)];
  return kPi / (2.0 * L) * dot;
}

}  // namespace

double basis_eval(std::int64_t ell, const Eigen::Ref<const Eigen::VectorXd>& x, double L) {
  check_domain(x, L);
  if (ell == 1) return 1.0;
  std::vector<int> k = frequency_index(ell, static_cast<int>(x.size()));
  bool cosine = is_representative(k);
  if (!cosine) {
    for (int& v : k) v = -v;  // evaluate against the representative
  }
  double ph = phase_of(k, x, L);
  return cosine ? std::cos(ph) : std::sin(ph);
}

double basis_eval_deriv(std::int64_t ell, const std::vector<int>& alpha,
                        const Eigen::Ref<const Eigen::VectorXd>& x, double L) {
  check_domain(x, L);
  int dx = static_cast<int>(x.size());
  if (static_cast<int>(alpha.size()) != dx)
    throw std::invalid_argument("basis_eval_deriv: alpha dimension mismatch");
  int total = 0;
  for (int a : alpha) {
    if (a < 0) throw std::invalid_argument("basis_eval_deriv: negative multi-index");
    total += a;
  }
  if (ell == 1) return total == 0 ? 1.0 : 0.0;
  std::vector<int> k = frequency_index(ell, dx);
  bool cosine = is_representative(k);
  if (!cosine) {
    for (int& v : k) v = -v;
  }
  double mult = 1.0;
  for (int j = 0; j < dx; ++j) mult *= std::pow(static_cast<double>(k[j]), alpha[j]);
  mult *= std::pow(kPi / (2.0 * L), total);
  double ph = phase_of(k, x, L);
  // d^a cos = Re(i^a e^{i ph}) * ..., cycling with the derivative order
  int r = total % 4;
  double val;
  if (cosine) {
    switch (r) {
      case 0: val = std::cos(ph); break;
      case 1: val = -std::sin(ph); break;
      case 2: val = -std::cos(ph); break;
      default: val = std::sin(ph); break;
    }
  } else {
    switch (r) {
      case 0: val = std::sin(ph); break;
      case 1: val = std::cos(ph); break;
      case 2: val = -std::sin(ph); break;
      default: val = -std::cos(ph); break;
    }
  }
  return mult * val;
}

double basis_norm_sq(std::int64_t ell, int dx, double L) {
  double vol = std::pow(4.0 * L, dx);
  return ell == 1 ? vol : 0.5 * vol;
}

FourierCoeffs::FourierCoeffs(int dy_, std::int64_t m_, int dx_, double L_)
    : dy(dy_), dx(dx_), m(m_), L(L_), z(Eigen::MatrixXd::Zero(dy_, m_)) {
  validate();
}

void FourierCoeffs::validate() const {
  if (m < 1 || dy < 1 || dx < 1 || L <= 0.0)
    throw std::invalid_argument("FourierCoeffs: need m >= 1, dy >= 1, dx >= 1, L > 0");
  if (z.rows() != dy || z.cols() != m)
    throw std::invalid_argument("FourierCoeffs: coefficient matrix shape mismatch");
  if (!z.allFinite()) throw std::invalid_argument("FourierCoeffs: non-finite coefficient");
}

Eigen::VectorXd FourierCoeffs::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dx) throw std::invalid_argument("FourierCoeffs::evaluate: dimension mismatch");
  Eigen::VectorXd basis(m);
  for (std::int64_t ell = 1; ell <= m; ++ell)
    basis[static_cast<Eigen::Index>(ell - 1)] = basis_eval(ell, x, L);
  return z * basis;
}

double sobolev_weight(std::int64_t ell, int s, int dx) {
  return std::pow(static_cast<double>(ell), 2.0 * s / dx);
}

double sobolev_norm_sq(const FourierCoeffs& f, int s) {
  if (s < 2 * f.dx)
    std::cerr << "pirem warning: sobolev_norm_sq called with s=" << s << " < 2*dx=" << 2 * f.dx
              << "\n";
  double total = 0.0;
  for (std::int64_t ell = 1; ell <= f.m; ++ell) {
    double w = sobolev_weight(ell, s, f.dx);
    total += w * f.z.col(static_cast<Eigen::Index>(ell - 1)).squaredNorm();
  }
  return total;
}

double l2_norm_sq_lebesgue(const FourierCoeffs& f) {
  double total = 0.0;
  for (std::int64_t ell = 1; ell <= f.m; ++ell)
    total += basis_norm_sq(ell, f.dx, f.L) * f.z.col(static_cast<Eigen::Index>(ell - 1)).squaredNorm();
  return total;
}

double l2_norm_sq_trajectory(const FourierCoeffs& f, const FourierCoeffs& g,
                             const std::vector<Eigen::MatrixXd>& trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("l2_norm_sq_trajectory: empty trajectory set");
  if (f.dx != g.dx || f.dy != g.dy) throw std::invalid_argument("l2_norm_sq_trajectory: shape mismatch");
  const Eigen::Index T = trajectories.front().rows();
  double total = 0.0;
  for (const Eigen::MatrixXd& X : trajectories) {
    if (X.rows() != T) throw std::invalid_argument("l2_norm_sq_trajectory: unequal trajectory lengths");
    double acc = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      Eigen::VectorXd x = X.row(t);
      acc += (f.evaluate(x) - g.evaluate(x)).squaredNorm();
    }
    total += acc / static_cast<double>(T);
  }
  return total / static_cast<double>(trajectories.size());
}

FourierCoeffs project_function(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& target,
                               int dy, std::int64_t m, double L, int dx,
                               const QuadratureSpec& quad, double box_halfwidth) {
  double half = box_halfwidth > 0.0 ? box_halfwidth : L;
  int per_axis = quad.nodes_per_axis > 0 ? quad.nodes_per_axis : default_nodes_per_axis(m, dx);
  TensorQuad q = tensor_gauss_legendre(per_axis, dx, half);
  const Eigen::Index n = q.nodes.rows();
  if (n < m) throw std::invalid_argument("project_function: fewer quadrature nodes than basis members");

  Eigen::MatrixXd A(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd x = q.nodes.row(i);
    for (std::int64_t ell = 1; ell <= m; ++ell)
      A(i, static_cast<Eigen::Index>(ell - 1)) = basis_eval(ell, x, L);
  }
  Eigen::MatrixXd Aw = q.weights.asDiagonal() * A;
  Eigen::MatrixXd G = A.transpose() * Aw;

  Eigen::MatrixXd Yt(n, dy);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd x = q.nodes.row(i);
    Eigen::VectorXd v = target(x);
    if (v.size() != dy) throw std::invalid_argument("project_function: target output dimension mismatch");
    Yt.row(i) = v.transpose();
  }
  Eigen::MatrixXd rhs = Aw.transpose() * Yt;  // m x dy

  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() < 1e-12 * ldlt.vectorD().maxCoeff())
    throw std::runtime_error("project_function: singular quadrature Gram (m too large for node count)");

  FourierCoeffs f(dy, m, dx, L);
  f.z = ldlt.solve(rhs).transpose();
  return f;
}

void save_coeffs_csv(const FourierCoeffs& f, std::ostream& os) {
  os << f.dy << "," << f.m << "," << f.dx << "," << fmt_g17(f.L) << "\n";
  for (int i = 0; i < f.dy; ++i) {
    for (std::int64_t ell = 0; ell < f.m; ++ell) {
      if (ell) os << ",";
      os << fmt_g17(f.z(i, static_cast<Eigen::Index>(ell)));
    }
    os << "\n";
  }
}

void save_coeffs_csv(const FourierCoeffs& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_coeffs_csv: cannot open " + path);
  save_coeffs_csv(f, os);
}

FourierCoeffs load_coeffs_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("load_coeffs_csv: empty input");
  auto head = csv_split(line);
  if (head.size() != 4) throw std::runtime_error("load_coeffs_csv: bad header");
  FourierCoeffs f(std::stoi(head[0]), std::stoll(head[1]), std::stoi(head[2]), std::stod(head[3]));
  for (int i = 0; i < f.dy; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("load_coeffs_csv: truncated rows");
    auto cells = csv_split(line);
    if (static_cast<std::int64_t>(cells.size()) != f.m)
      throw std::runtime_error("load_coeffs_csv: wrong column count");
    for (std::int64_t ell = 0; ell < f.m; ++ell)
      f.z(i, static_cast<Eigen::Index>(ell)) = std::stod(cells[static_cast<std::size_t>(ell)]);
  }
  f.validate();
  return f;
}

FourierCoeffs load_coeffs_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_coeffs_csv: cannot open " + path);
  return load_coeffs_csv(is);
}

}  // namespace pirem
