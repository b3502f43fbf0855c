// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "pirem/pde_operator.hpp"
#include "pirem/rng.hpp"

using namespace pirem;

namespace {

constexpr double kPi = 3.14159265358979323846;

FourierCoeffs random_coeffs(int dy, std::int64_t m, int dx, double L, std::uint64_t seed) {
  FourierCoeffs f(dy, m, dx, L);
  Rng rng(seed);
  for (int i = 0; i < dy; ++i)
    for (std::int64_t ell = 0; ell < m; ++ell)
      f.z(i, static_cast<Eigen::Index>(ell)) = rng.uniform(-1.0, 1.0);
  return f;
}

/// Central finite differences of a scalar callable, |alpha| <= 2.
double central_diff(const std::function<double(const Eigen::VectorXd&)>& g,
                    const std::vector<int>& alpha, Eigen::VectorXd x, double h) {
  int total = 0;
  int first = -1, second = -1;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    total += alpha[j];
    for (int rep = 0; rep < alpha[j]; ++rep) (first < 0 ? first : second) = static_cast<int>(j);
  }
  if (total == 0) return g(x);
  if (total == 1) {
    Eigen::VectorXd xp = x, xm = x;
    xp[first] += h;
    xm[first] -= h;
    return (g(xp) - g(xm)) / (2.0 * h);
  }
  if (first == second) {
    Eigen::VectorXd xp = x, xm = x;
    xp[first] += h;
    xm[first] -= h;
    return (g(xp) - 2.0 * g(x) + g(xm)) / (h * h);
  }
  Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
  xpp[first] += h; xpp[second] += h;
  xpm[first] += h; xpm[second] -= h;
  xmp[first] -= h; xmp[second] += h;
  xmm[first] -= h; xmm[second] -= h;
  return (g(xpp) - g(xpm) - g(xmp) + g(xmm)) / (4.0 * h * h);
}

}  // namespace

TEST_CASE("identity operator leaves coefficients unchanged") {
  FourierCoeffs f = random_coeffs(2, 7, 1, 0.5, 3);
  FourierCoeffs out = apply_operator(LinearDiffOp::identity(2, 1), f);
  CHECK((out.z - f.z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first derivative rotates the cosine pair") {
  double L = 0.75;
  FourierCoeffs f(1, 3, 1, L);
  f.z(0, 1) = 1.0;  // cos(pi x / 2L)
  FourierCoeffs out = apply_operator(LinearDiffOp::single_term({1}, 1, 1), f);
  double theta = kPi / (2.0 * L);
  CHECK(out.z(0, 0) == doctest::Approx(0.0));
  CHECK(out.z(0, 1) == doctest::Approx(0.0));
  CHECK(out.z(0, 2) == doctest::Approx(-theta).epsilon(1e-14));  // -theta sin
}

TEST_CASE("laplacian multiplier on a 2d shell frequency") {
  double L = 1.0;
  FourierCoeffs f(1, 9, 2, L);
  const BasisIndexMap& map = index_map(2);
  std::int64_t ell = map.index_of({1, 1});
  f.z(0, static_cast<Eigen::Index>(ell - 1)) = 1.0;
  FourierCoeffs out = apply_operator(LinearDiffOp::laplacian(1, 2), f);
  double theta2 = std::pow(kPi / (2.0 * L), 2.0);
  // multiplier -theta^2 ||k||^2 with ||k||^2 = 2
  CHECK(out.z(0, static_cast<Eigen::Index>(ell - 1)) ==
        doctest::Approx(-2.0 * theta2).epsilon(1e-14));
  for (std::int64_t j = 1; j <= 9; ++j)
    if (j != ell) CHECK(std::abs(out.z(0, static_cast<Eigen::Index>(j - 1))) < 1e-14);
}

TEST_CASE("apply_operator is linear in the coefficients") {
  LinearDiffOp op = LinearDiffOp::laplacian(1, 2);
  FourierCoeffs f = random_coeffs(1, 11, 2, 0.8, 5);
  FourierCoeffs h = random_coeffs(1, 11, 2, 0.8, 6);
  FourierCoeffs combo = f;
  combo.z = 1.7 * f.z - 0.3 * h.z;
  Eigen::MatrixXd expect = 1.7 * apply_operator(op, f).z - 0.3 * apply_operator(op, h).z;
  CHECK((apply_operator(op, combo).z - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fourier multiplier derivative matches central finite differences") {
  double L = 1.0;
  Rng rng(9);
  for (int dx : {1, 2}) {
    std::int64_t m = dx == 1 ? 9 : 13;
    FourierCoeffs f = random_coeffs(1, m, dx, L, 20 + static_cast<std::uint64_t>(dx));
    std::vector<std::vector<int>> alphas;
    if (dx == 1) alphas = {{1}, {2}};
    else alphas = {{1, 0}, {0, 2}, {1, 1}};
    for (const auto& alpha : alphas) {
      FourierCoeffs img = apply_operator(LinearDiffOp::single_term(alpha, 1, dx), f);
      auto g = [&f](const Eigen::VectorXd& x) { return f.evaluate(x)[0]; };
      for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd x(dx);
        for (int j = 0; j < dx; ++j) x[j] = rng.uniform(-0.8 * L, 0.8 * L);
        double exact = img.evaluate(x)[0];
        double fd = central_diff(g, alpha, x, 1e-3);
        double scale = std::max(std::abs(exact), 1e-3);
        CHECK(std::abs(exact - fd) / scale < 1e-4);
      }
    }
  }
}

TEST_CASE("regularizer value: identity, kernel element, parseval vs quadrature") {
  double L = 0.6;
  FourierCoeffs f = random_coeffs(2, 8, 1, L, 31);
  CHECK(regularizer_value(LinearDiffOp::identity(2, 1), f) ==
        doctest::Approx(l2_norm_sq_lebesgue(f)).epsilon(1e-12));

  // constants are the exact kernel of the second-derivative penalty
  FourierCoeffs c(1, 1, 1, L);
  c.z(0, 0) = 0.5;
  CHECK(regularizer_value(LinearDiffOp::laplacian(1, 1), c) == 0.0);

  LinearDiffOp lap = LinearDiffOp::laplacian(1, 1);
  FourierCoeffs g = random_coeffs(1, 8, 1, L, 32);
  RegMeasure lebesgue;  // medium-cube closed form
  double fast = regularizer_value(lap, g, lebesgue);
  RegMeasure quad = lebesgue;
  quad.quad.nodes_per_axis = 96;
  double slow = regularizer_value_quadrature(lap, g, quad);
  CHECK(std::abs(fast - slow) / fast < 1e-8);
}

TEST_CASE("operator gram: diagonal forms, quadratic-form consistency, PSD") {
  double L = 0.5;
  SUBCASE("identity gives the normalization diagonal") {
    OperatorGram gram = operator_gram(LinearDiffOp::identity(1, 1), 5, 1, L);
    for (std::int64_t a = 1; a <= 5; ++a)
      for (std::int64_t b = 1; b <= 5; ++b)
        CHECK(gram.Q[0](a - 1, b - 1) ==
              doctest::Approx(a == b ? basis_norm_sq(a, 1, L) : 0.0).epsilon(1e-12));
  }
  SUBCASE("second derivative gives theta^4 k^4 times the normalization") {
    OperatorGram gram = operator_gram(LinearDiffOp::laplacian(1, 1), 5, 1, L);
    double theta4 = std::pow(kPi / (2.0 * L), 4.0);
    for (std::int64_t ell = 1; ell <= 5; ++ell) {
      double k = ell == 1 ? 0.0 : static_cast<double>((ell - 2) / 2 + 1);
      CHECK(gram.Q[0](ell - 1, ell - 1) ==
            doctest::Approx(theta4 * std::pow(k, 4.0) * basis_norm_sq(ell, 1, L)).epsilon(1e-12));
    }
  }
  SUBCASE("quadratic form equals the regularizer on both measures") {
    LinearDiffOp lap = LinearDiffOp::laplacian(1, 1);
    for (auto kind : {RegMeasure::Kind::LebesgueCube, RegMeasure::Kind::QuadratureOnX}) {
      RegMeasure measure;
      measure.kind = kind;
      measure.quad.nodes_per_axis = 80;
      OperatorGram gram = operator_gram(lap, 8, 1, L, measure);
      CHECK((gram.Q[0] - gram.Q[0].transpose()).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram.Q[0]);
      CHECK(eig.eigenvalues().minCoeff() > -1e-10 * std::abs(eig.eigenvalues().maxCoeff()));
      for (int trial = 0; trial < 5; ++trial) {
        FourierCoeffs f = random_coeffs(1, 8, 1, L, 100 + static_cast<std::uint64_t>(trial));
        double via_gram = f.z.row(0) * gram.Q[0] * f.z.row(0).transpose();
        double direct = kind == RegMeasure::Kind::LebesgueCube
                            ? regularizer_value(lap, f)
                            : regularizer_value_quadrature(lap, f, measure);
        CHECK(std::abs(via_gram - direct) <= 1e-8 * std::max(1.0, direct));
      }
    }
  }
  SUBCASE("insufficient nodes are rejected") {
    RegMeasure measure;
    measure.quad.nodes_per_axis = 4;
    measure.kind = RegMeasure::Kind::QuadratureOnX;
    CHECK_THROWS(operator_gram(LinearDiffOp::laplacian(1, 1), 32, 1, L, measure));
  }
}

TEST_CASE("variable-coefficient operators take the quadrature path only") {
  LinearDiffOp op;
  op.dy = 1;
  op.dx = 1;
  op.order = 2;
  DiffTerm t;
  t.alpha = {2};
  t.coeff_fn = [](const Eigen::VectorXd& x) { return 1.0 + 0.5 * std::sin(x[0]); };
  op.terms = {{t}};
  FourierCoeffs f = random_coeffs(1, 6, 1, 1.0, 55);
  CHECK_THROWS_AS(apply_operator(op, f), std::invalid_argument);

  RegMeasure measure;
  measure.kind = RegMeasure::Kind::QuadratureOnX;
  measure.quad.nodes_per_axis = 64;
  OperatorGram gram = operator_gram(op, 6, 1, 1.0, measure);
  double via_gram = f.z.row(0) * gram.Q[0] * f.z.row(0).transpose();
  double direct = regularizer_value(op, f, measure);
  CHECK(std::abs(via_gram - direct) <= 1e-8 * std::max(1.0, direct));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram.Q[0]);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("ellipticity certification by sampled symbols") {
  CHECK(ellipticity_check(LinearDiffOp::laplacian(1, 2), 64, 1).elliptic);

  LinearDiffOp mixed = LinearDiffOp::single_term({1, 1}, 1, 2);
  CHECK_FALSE(ellipticity_check(mixed, 256, 1).elliptic);  // symbol xi1 xi2 vanishes on axes

  LinearDiffOp low;  // first-order term declared with operator order 2
  low.dy = 1;
  low.dx = 2;
  low.order = 2;
  low.terms = {{DiffTerm{{1, 0}, 1.0, nullptr, ""}}};
  EllipticityReport rep = ellipticity_check(low, 16, 1);
  CHECK_FALSE(rep.elliptic);
  CHECK(rep.min_abs_symbol == 0.0);  // empty top order
}

TEST_CASE("2-proper regularizer probe") {
  LinearDiffOp lap = LinearDiffOp::laplacian(1, 1);
  FourierCoeffs zero(1, 6, 1, 1.0);
  auto rep = proper_regularizer_probe(lap, zero, zero, 0.5);
  CHECK(rep.all());

  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    FourierCoeffs f = random_coeffs(1, 6, 1, 1.0, 200 + static_cast<std::uint64_t>(trial));
    FourierCoeffs h = random_coeffs(1, 6, 1, 1.0, 500 + static_cast<std::uint64_t>(trial));
    double a = rng.uniform01();
    CHECK(proper_regularizer_probe(lap, f, h, a).all());
  }
  // a = 1 holds with equality
  FourierCoeffs f = random_coeffs(1, 6, 1, 1.0, 901);
  CHECK(proper_regularizer_probe(lap, f, f, 1.0).scaling_ok);
}
