// SPDX-License-Identifier: Apache-2.0
#include "pirem/pde_operator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pirem/rng.hpp"

namespace pirem {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int DiffTerm::order() const {
  int total = 0;
  for (int a : alpha) total += a;
  return total;
}

bool LinearDiffOp::constant_coefficient() const {
  for (const auto& out : terms)
    for (const auto& t : out)
      if (!t.is_constant()) return false;
  return true;
}

void LinearDiffOp::validate() const {
  if (dy < 1 || dx < 1 || order < 0) throw std::invalid_argument("LinearDiffOp: bad dimensions");
  if (static_cast<int>(terms.size()) != dy)
    throw std::invalid_argument("LinearDiffOp: terms must have one list per output");
  for (const auto& out : terms)
    for (const auto& t : out) {
      if (static_cast<int>(t.alpha.size()) != dx)
        throw std::invalid_argument("LinearDiffOp: multi-index dimension mismatch");
      if (t.order() > order)
        throw std::invalid_argument("LinearDiffOp: term order exceeds declared operator order");
      for (int a : t.alpha)
        if (a < 0) throw std::invalid_argument("LinearDiffOp: negative multi-index entry");
    }
}

LinearDiffOp LinearDiffOp::identity(int dy, int dx) {
  LinearDiffOp op;
  op.dy = dy;
  op.dx = dx;
  op.order = 0;
  op.terms.assign(dy, {DiffTerm{std::vector<int>(dx, 0), 1.0, nullptr, ""}});
  return op;
}

LinearDiffOp LinearDiffOp::laplacian(int dy, int dx) {
  LinearDiffOp op;
  op.dy = dy;
  op.dx = dx;
  op.order = 2;
  std::vector<DiffTerm> per_output;
  for (int j = 0; j < dx; ++j) {
    std::vector<int> alpha(dx, 0);
    alpha[j] = 2;
    per_output.push_back(DiffTerm{alpha, 1.0, nullptr, ""});
  }
  op.terms.assign(dy, per_output);
  return op;
}

LinearDiffOp LinearDiffOp::single_term(const std::vector<int>& alpha, int dy, int dx) {
  LinearDiffOp op;
  op.dy = dy;
  op.dx = dx;
  op.order = 0;
  for (int a : alpha) op.order += a;
  op.terms.assign(dy, {DiffTerm{alpha, 1.0, nullptr, ""}});
  return op;
}

namespace {

/// m extended so that the last frequency pair is complete (a cosine member at
/// even m would otherwise lose its sine partner under the operator rotation).
std::int64_t pair_complete(std::int64_t m) { return (m >= 2 && m % 2 == 0) ? m + 1 : m; }

/// Applies a constant-coefficient operator with the output truncated at m_out
/// (>= f.m). At m_out == pair_complete(f.m) the result is exact.
FourierCoeffs apply_multiplier(const LinearDiffOp& op, const FourierCoeffs& f,
                               std::int64_t m_out) {
  FourierCoeffs out(f.dy, m_out, f.dx, f.L);
  const BasisIndexMap& map = index_map(f.dx);
  const double theta0 = kPi / (2.0 * f.L);

  // the operator maps each (cos, sin) pair to itself: with complex
  // coefficient c - i s, each term alpha contributes the multiplier
  // (i theta0)^{|alpha|} prod_j k_j^{alpha_j}
  for (std::int64_t ell = 1; ell <= f.m; ell += (ell == 1 ? 1 : 2)) {
    std::vector<int> k = map.frequency_of(ell);
    bool zero_freq = true;
    for (int v : k) zero_freq &= (v == 0);
    std::int64_t ell_cos = ell;
    std::int64_t ell_sin = zero_freq ? 0 : ell + 1;

    for (int i = 0; i < op.dy; ++i) {
      double A = 0.0, B = 0.0;  // multiplier A + iB
      for (const DiffTerm& t : op.terms[static_cast<std::size_t>(i)]) {
        double prod = 1.0;
        for (int j = 0; j < op.dx; ++j) prod *= std::pow(static_cast<double>(k[j]), t.alpha[j]);
        double mag = t.coeff * prod * std::pow(theta0, t.order());
        switch (t.order() % 4) {  // i^{|alpha|}
          case 0: A += mag; break;
          case 1: B += mag; break;
          case 2: A -= mag; break;
          default: B -= mag; break;
        }
      }
      double c = f.z(i, static_cast<Eigen::Index>(ell_cos - 1));
      double s = (ell_sin && ell_sin <= f.m) ? f.z(i, static_cast<Eigen::Index>(ell_sin - 1)) : 0.0;
      // (c - i s)(A + i B) = (cA + sB) - i (sA - cB)
      double c_new = c * A + s * B;
      double s_new = s * A - c * B;
      out.z(i, static_cast<Eigen::Index>(ell_cos - 1)) = c_new;
      if (ell_sin && ell_sin <= m_out) out.z(i, static_cast<Eigen::Index>(ell_sin - 1)) = s_new;
    }
  }
  return out;
}

void require_multiplier_path(const LinearDiffOp& op, const FourierCoeffs& f) {
  op.validate();
  if (!op.constant_coefficient())
    throw std::invalid_argument(
        "apply_operator: variable-coefficient operators have no Fourier multiplier; use "
        "operator_gram");
  if (op.dx != f.dx || op.dy != f.dy) throw std::invalid_argument("apply_operator: shape mismatch");
}

}  // namespace

FourierCoeffs apply_operator(const LinearDiffOp& op, const FourierCoeffs& f) {
  require_multiplier_path(op, f);
  return apply_multiplier(op, f, f.m);
}

namespace {

/// (D f)_i at a point, by differentiating the basis.
double apply_pointwise(const LinearDiffOp& op, const FourierCoeffs& f, int i,
                       const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (const DiffTerm& t : op.terms[static_cast<std::size_t>(i)]) {
    double coeff = t.is_constant() ? t.coeff : t.coeff_fn(x);
    double dsum = 0.0;
    for (std::int64_t ell = 1; ell <= f.m; ++ell)
      dsum += f.z(i, static_cast<Eigen::Index>(ell - 1)) * basis_eval_deriv(ell, t.alpha, x, f.L);
    acc += coeff * dsum;
  }
  return acc;
}

TensorQuad measure_grid(const RegMeasure& measure, std::int64_t m, int dx, double L) {
  double half = measure.kind == RegMeasure::Kind::LebesgueCube ? 2.0 * L : L;
  int per_axis = measure.quad.nodes_per_axis > 0 ? measure.quad.nodes_per_axis
                                                 : default_nodes_per_axis(m, dx);
  int needed = static_cast<int>(std::ceil(std::pow(4.0 * static_cast<double>(m), 1.0 / dx)));
  if (per_axis < needed)
    throw std::invalid_argument("operator quadrature: nodes per axis below the (4m)^(1/dx) heuristic");
  return tensor_gauss_legendre(per_axis, dx, half);
}

}  // namespace

double regularizer_value_quadrature(const LinearDiffOp& op, const FourierCoeffs& f,
                                    const RegMeasure& measure) {
  op.validate();
  TensorQuad q = measure_grid(measure, f.m, f.dx, f.L);
  double total = 0.0;
  for (Eigen::Index n = 0; n < q.nodes.rows(); ++n) {
    Eigen::VectorXd x = q.nodes.row(n);
    double w = q.weights[n];
    if (measure.weight) w *= measure.weight(x);
    double sq = 0.0;
    for (int i = 0; i < f.dy; ++i) {
      double v = apply_pointwise(op, f, i, x);
      sq += v * v;
    }
    total += w * sq;
  }
  return total;
}

double regularizer_value(const LinearDiffOp& op, const FourierCoeffs& f, const RegMeasure& measure) {
  if (measure.kind == RegMeasure::Kind::LebesgueCube && op.constant_coefficient() &&
      !measure.weight) {
    require_multiplier_path(op, f);
    // pad to a complete pair so the rotated image is captured exactly
    return l2_norm_sq_lebesgue(apply_multiplier(op, f, pair_complete(f.m)));
  }
  return regularizer_value_quadrature(op, f, measure);
}

OperatorGram operator_gram(const LinearDiffOp& op, std::int64_t m, int dx, double L,
                           const RegMeasure& measure) {
  op.validate();
  if (op.dx != dx) throw std::invalid_argument("operator_gram: dx mismatch");
  OperatorGram gram;
  gram.m = m;
  gram.dy = op.dy;
  gram.measure = measure.kind;
  gram.Q.reserve(static_cast<std::size_t>(op.dy));

  if (measure.kind == RegMeasure::Kind::LebesgueCube && op.constant_coefficient() &&
      !measure.weight) {
    // closed form: Q_i = M_i' N M_i with M_i the (2x2-block) multiplier
    // matrix in the pair-complete extension and N the diagonal normalization
    const std::int64_t m_ext = pair_complete(m);
    for (int i = 0; i < op.dy; ++i) {
      Eigen::MatrixXd Mi = Eigen::MatrixXd::Zero(m_ext, m);
      FourierCoeffs unit(1, m, dx, L);
      LinearDiffOp scalar_op = op;
      scalar_op.dy = 1;
      scalar_op.terms = {op.terms[static_cast<std::size_t>(i)]};
      for (std::int64_t ell = 1; ell <= m; ++ell) {
        unit.z.setZero();
        unit.z(0, static_cast<Eigen::Index>(ell - 1)) = 1.0;
        FourierCoeffs img = apply_multiplier(scalar_op, unit, m_ext);
        Mi.col(static_cast<Eigen::Index>(ell - 1)) = img.z.row(0).transpose();
      }
      Eigen::VectorXd norms(m_ext);
      for (std::int64_t ell = 1; ell <= m_ext; ++ell)
        norms[static_cast<Eigen::Index>(ell - 1)] = basis_norm_sq(ell, dx, L);
      Eigen::MatrixXd Q = Mi.transpose() * norms.asDiagonal() * Mi;
      gram.Q.push_back(0.5 * (Q + Q.transpose()));
    }
    return gram;
  }

  TensorQuad q = measure_grid(measure, m, dx, L);
  const Eigen::Index n = q.nodes.rows();
  for (int i = 0; i < op.dy; ++i) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, m);
    for (Eigen::Index node = 0; node < n; ++node) {
      Eigen::VectorXd x = q.nodes.row(node);
      for (const DiffTerm& t : op.terms[static_cast<std::size_t>(i)]) {
        double coeff = t.is_constant() ? t.coeff : t.coeff_fn(x);
        for (std::int64_t ell = 1; ell <= m; ++ell)
          B(node, static_cast<Eigen::Index>(ell - 1)) += coeff * basis_eval_deriv(ell, t.alpha, x, L);
      }
    }
    Eigen::VectorXd w = q.weights;
    if (measure.weight)
      for (Eigen::Index node = 0; node < n; ++node) {
        Eigen::VectorXd x = q.nodes.row(node);
        w[node] *= measure.weight(x);
      }
    Eigen::MatrixXd Q = B.transpose() * w.asDiagonal() * B;
    gram.Q.push_back(0.5 * (Q + Q.transpose()));
  }
  return gram;
}

EllipticityReport ellipticity_check(const LinearDiffOp& op, int n_directions, std::uint64_t seed,
                                    double L) {
  op.validate();
  if (n_directions < 1) throw std::invalid_argument("ellipticity_check: n_directions must be >= 1");
  Rng rng(derive_seed(seed, 0x5e11u));
  EllipticityReport report;
  report.n_directions = n_directions;
  double min_abs = std::numeric_limits<double>::infinity();
  const bool constant = op.constant_coefficient();
  const int n_points = constant ? 1 : 16;

  // the coordinate axes are probed first: degenerate symbols (for instance a
  // pure mixed derivative) vanish exactly there and random directions miss
  for (int trial = -op.dx; trial < n_directions; ++trial) {
    Eigen::VectorXd xi(op.dx);
    if (trial < 0) {
      xi.setZero();
      xi[-trial - 1] = 1.0;
    } else {
      do {
        for (int j = 0; j < op.dx; ++j) xi[j] = rng.gaussian();
      } while (xi.norm() < 1e-8);
    }
    xi.normalize();
    for (int pt = 0; pt < n_points; ++pt) {
      Eigen::VectorXd x(op.dx);
      for (int j = 0; j < op.dx; ++j) x[j] = rng.uniform(-L, L);
      for (int i = 0; i < op.dy; ++i) {
        double symbol = 0.0;
        for (const DiffTerm& t : op.terms[static_cast<std::size_t>(i)]) {
          if (t.order() != op.order) continue;  // top-order symbol only
          double coeff = t.is_constant() ? t.coeff : t.coeff_fn(x);
          double prod = 1.0;
          for (int j = 0; j < op.dx; ++j) prod *= std::pow(xi[j], t.alpha[j]);
          symbol += coeff * prod;
        }
        min_abs = std::min(min_abs, std::abs(symbol));
      }
    }
  }
  report.min_abs_symbol = std::isfinite(min_abs) ? min_abs : 0.0;
  report.elliptic = report.min_abs_symbol > 1e-9;
  return report;
}

ProperRegularizerReport proper_regularizer_probe(const LinearDiffOp& op, const FourierCoeffs& f,
                                                 const FourierCoeffs& h, double a,
                                                 const RegMeasure& measure) {
  if (a < 0.0 || a > 1.0) throw std::invalid_argument("proper_regularizer_probe: a must be in [0,1]");
  const double slack = 1e-10;
  auto R = [&](const FourierCoeffs& g) { return regularizer_value(op, g, measure); };

  double Rf = R(f), Rh = R(h);
  FourierCoeffs sum = f;
  sum.z = f.z + h.z;
  FourierCoeffs scaled = f;
  scaled.z = a * f.z;
  FourierCoeffs neg = f;
  neg.z = -f.z;
  FourierCoeffs zero = f;
  zero.z.setZero();

  double scale = 1.0 + Rf + Rh;
  ProperRegularizerReport rep;
  rep.triangle_ok = R(sum) <= 2.0 * (Rf + Rh) + slack * scale;
  rep.scaling_ok = R(scaled) <= a * a * Rf + slack * scale;
  rep.even_ok = std::abs(R(neg) - Rf) <= slack * scale;
  rep.zero_ok = R(zero) <= slack;
  return rep;
}

}  // namespace pirem
