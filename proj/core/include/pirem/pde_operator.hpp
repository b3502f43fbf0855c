// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pirem/fourier_space.hpp"
#include "pirem/quadrature.hpp"

namespace pirem {

/// One term p_alpha * d^alpha of a linear differential operator. A term is
/// constant-coefficient when coeff_fn is empty.
struct DiffTerm {
  std::vector<int> alpha;
  double coeff = 1.0;
  std::function<double(const Eigen::VectorXd&)> coeff_fn;  ///< empty => constant
  std::string coeff_expr;                                  ///< source text, for config echo

  bool is_constant() const { return !coeff_fn; }
  int order() const;
};

/// Component-wise operator: [D(f)]_i = sum_alpha p_{i,alpha} d^alpha f_i.
struct LinearDiffOp {
  int dy = 1;
  int dx = 1;
  int order = 0;  ///< declared top order s_op
  std::vector<std::vector<DiffTerm>> terms;  ///< size dy

  bool constant_coefficient() const;
  void validate() const;

  static LinearDiffOp identity(int dy, int dx);
  /// d^2/dx_j^2 summed over axes (negated sign convention does not matter
  /// for the squared-norm regularizer).
  static LinearDiffOp laplacian(int dy, int dx);
  /// Single term d^alpha with unit coefficient on every output.
  static LinearDiffOp single_term(const std::vector<int>& alpha, int dy, int dx);
};

/// Measure under which ||D(f)||^2 is evaluated.
struct RegMeasure {
  enum class Kind {
    LebesgueCube,   ///< Lebesgue on the medium cube [-2L,2L]^dx (closed form)
    QuadratureOnX,  ///< tensor quadrature on the data cube [-L,L]^dx
  };
  Kind kind = Kind::LebesgueCube;
  QuadratureSpec quad;
  std::function<double(const Eigen::VectorXd&)> weight;  ///< optional density, QuadratureOnX only
};

/// Quadratic form of the regularizer on the truncated basis, one m x m block
/// per output (the operator acts component-wise, so blocks are independent).
struct OperatorGram {
  std::vector<Eigen::MatrixXd> Q;  ///< size dy, each m x m symmetric PSD
  std::int64_t m = 0;
  int dy = 0;
  RegMeasure::Kind measure = RegMeasure::Kind::LebesgueCube;
};

/// Coefficients of D(f) in the same basis. Constant-coefficient operators
/// act as exact Fourier multipliers (shell-preserving, no truncation error).
/// Variable-coefficient operators throw; use operator_gram instead.
FourierCoeffs apply_operator(const LinearDiffOp& op, const FourierCoeffs& f);

/// ||D(f)||^2 under the given measure. Constant coefficients + LebesgueCube
/// goes through apply_operator + Parseval; anything else through quadrature.
double regularizer_value(const LinearDiffOp& op, const FourierCoeffs& f,
                         const RegMeasure& measure = {});

/// Forced quadrature route (test oracle for the Parseval fast path).
double regularizer_value_quadrature(const LinearDiffOp& op, const FourierCoeffs& f,
                                    const RegMeasure& measure);

OperatorGram operator_gram(const LinearDiffOp& op, std::int64_t m, int dx, double L,
                           const RegMeasure& measure = {});

struct EllipticityReport {
  bool elliptic = false;
  double min_abs_symbol = 0.0;
  int n_directions = 0;
};

/// Samples unit directions (and interior points for variable coefficients)
/// and checks the top-order symbol against tolerance 1e-9.
EllipticityReport ellipticity_check(const LinearDiffOp& op, int n_directions,
                                    std::uint64_t seed, double L = 1.0);

struct ProperRegularizerReport {
  bool triangle_ok = false;  ///< R(f+h) <= 2 (R(f)+R(h))
  bool scaling_ok = false;   ///< R(a f)  <= a^2 R(f), a in [0,1]
  bool even_ok = false;      ///< R(-f)   == R(f)
  bool zero_ok = false;      ///< R(0)    == 0
  bool all() const { return triangle_ok && scaling_ok && even_ok && zero_ok; }
};

/// Checks the norm-squared regularizer properties at slack 1e-10.
ProperRegularizerReport proper_regularizer_probe(const LinearDiffOp& op, const FourierCoeffs& f,
                                                 const FourierCoeffs& h, double a,
                                                 const RegMeasure& measure = {});

}  // namespace pirem
