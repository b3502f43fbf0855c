// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pirem {

// Closed-form evaluation of every theoretical quantity: rates, covering
// numbers, hypercontractivity constants, martingale-offset-complexity
// bounds, lower-isometry probabilities, admissible penalty levels and
// burn-in times. Everything here is a pure function of ProblemParams; each
// derived constant is reported with a formula string so it can be recomputed
// and audited from the raw parameters.

struct ProblemParams {
  int s = 2;
  int dx = 1;
  int dy = 1;
  double sigma_w = 0.1;      ///< sub-Gaussian noise scale
  double theta = 9.0;        ///< lower-isometry parameter, > 8
  double S = 1.0;            ///< persistence constant, >= 1
  double rho_f_tilde = 1.0;  ///< scaled Sobolev radius (proportionality fixed to 1)
  double rho_f = 1.0;        ///< raw Sobolev radius (no-regularization bounds)
  double C_c = 1.0;          ///< covering constant of the effective class (existence only; default 1)
  double C_c_prime = 1.0;    ///< covering constant of the plain Sobolev ball
  double delta = 0.05;       ///< failure probability
  double L = 1.0;            ///< cube half-width; Lambda(X) = (2L)^dx
  double B_sup = 1.0;        ///< sup-norm bound of the hypothesis class

  void validate() const;
  double lebesgue_volume() const;  ///< (2L)^dx
};

struct SobolevRates {
  double d = 0.0;        ///< 2s / (2s + dx)
  double d_prime = 0.0;  ///< 2dx / (2s + dx), so d = 1 - d'/2
};

SobolevRates sobolev_rates(int s, int dx);

/// Smallest integer m with m >= (16 rho~^2 dx / ((2s-dx) eps^2))^(dx/(2s-dx)),
/// floored at 1.
std::int64_t m_eps(double rho_f_tilde, int s, int dx, double eps);

/// Same quantity before the ceiling; the covering / hypercontractivity
/// formulas use this real-valued shell count so that the two algebraic
/// routes agree exactly.
double m_eps_real(double rho_f_tilde, int s, int dx, double eps);

/// Named constant with the formula it was computed from.
struct NamedConstant {
  std::string name;
  double value = 0.0;
  std::string formula;
};

/// Constants of the boundary-covering / lower-isometry estimates.
struct IsometryConstants {
  double C_m = 0.0;  ///< shell-count coefficient, m_{r/sqrt(theta)} = C_m (1/r)^(2dx/(2s-dx))
  double C_M = 0.0;  ///< C_m * dy
  double C_L = 0.0;  ///< 8 rho~ dy sqrt(theta) C_m^(s/dx)
  double C_h = 0.0;  ///< hypercontractivity coefficient, C(r) = C_h (1/r)^(4dx/(2s-dx))
};

IsometryConstants isometry_constants(const ProblemParams& p);

struct CoveringBoundary {
  double log_covering = 0.0;
  std::int64_t m_r = 1;  ///< integer shell count at resolution r/sqrt(theta)
};

/// log N_inf(dB(r), r/sqrt(theta)) <= dy C_m (1/r)^(2dx/(2s-dx)) *
/// log(C_L (1/r)^((4s-dx)/(2s-dx)) + 1). Monotone non-increasing in r.
CoveringBoundary covering_boundary(double r, double theta, const ProblemParams& p);

/// Two-route oracle: the same bound evaluated through the eps-cover formula
/// (8 rho~ m^(s/dx) dy / eps + 1)^(m dy) at eps = r/sqrt(theta).
double covering_boundary_via_claim(double r, double theta, const ProblemParams& p);

/// Metric entropy of the effective hypothesis class:
/// log N <= C_c dy^((2s+dx)/(2s)) (sqrt(rho)/eps)^(dx/s).
double covering_effective_class(double rho, double eps, const ProblemParams& p);

/// C(r) = C_h (1/r)^(4dx/(2s-dx)).
double hyper_constant(double r, const ProblemParams& p);

/// C(eps) assembled directly from the Lebesgue volume and a shell count m.
double hyper_constant_from(double lebesgue_volume, double m);

struct LowerIsometryProb {
  double value = 0.0;    ///< clamped to [0,1]
  double raw = 0.0;      ///< unclamped (may overflow to +inf)
  double log_raw = 0.0;  ///< log of the raw value, always finite
  bool overflow = false;
};

/// P(lower-isometry failure) <=
///   (C_L (1/r)^((4s-dx)/(2s-dx)) + 1)^(dy C_m (1/r)^(2dx/(2s-dx)))
///   * exp(-8 T r^(4dx/(2s-dx)) / (theta^2 C_h S)), clamped to [0,1].
LowerIsometryProb lower_isometry_prob(double r, double T, const ProblemParams& p);

struct BoundReport {
  double value = 0.0;
  bool overflow = false;
  std::vector<NamedConstant> constants;
  /// value of the constant called `name`; throws if absent
  double constant(const std::string& name) const;
};

/// High-probability martingale offset complexity bound:
///   C_I sigma^(1+d) T^-(1+d)/2 (sqrt(rho))^(d'/2)
/// + (C_II + C_IV) sigma^(2d) T^-d (sqrt(rho))^(d')
/// + C_III sigma log(1/delta) / T,  C_III = 64.
BoundReport moc_bound_prob(double T, double rho, const ProblemParams& p);

/// Expectation bound: (C_I + C_II) (sigma/T)^d (sqrt(rho))^d'.
BoundReport moc_bound_exp(double T, double rho, const ProblemParams& p);

struct RateBound {
  double bound = 0.0;
  double slow_term = 0.0;
  double fast_term = 0.0;
  double C_slow = 0.0;
  double C_fast = 0.0;
  double lambda_min = 0.0;  ///< minimal admissible penalty level at this T
  double rho = 0.0;         ///< effective-class radius, 10 R(f*)
  double r_sq = 0.0;        ///< critical radius squared used in the burn-in
  bool burn_in_ok = false;  ///< T clears the burn-in inequality
  double burn_in_rhs = 0.0; ///< right-hand side of the burn-in inequality at this T
  bool overflow = false;
  std::vector<NamedConstant> constants;
  double constant(const std::string& name) const;
};

/// High-probability excess-risk rate:
///   C_slow max{R^(d'/4), R^(d'/2)} / T^d + C_fast sigma log(1/delta) / T,
/// with the admissible lambda_T and the burn-in check at
/// r^2 = lambda_T R + sigma/T. Throws when R_fstar == 0 (the lambda_T
/// condition divides by R(f*)).
RateBound rate_bound_prob(double T, double R_fstar, const ProblemParams& p);

/// Expectation rate: C_slow R^(d'/2) / T^d + 2 sigma / T, burn-in at
/// r^2 = 2 lambda_T R + sigma/T.
RateBound rate_bound_exp(double T, double R_fstar, const ProblemParams& p);

/// Smallest integer T whose burn-in inequality holds (monotone scan +
/// bisection; capped at 2^62 and flagged as overflow beyond).
std::int64_t burn_in_threshold_prob(double R_fstar, const ProblemParams& p);
std::int64_t burn_in_threshold_exp(double R_fstar, const ProblemParams& p);

struct NoRegBound {
  double bound_prob = 0.0;
  double bound_exp = 0.0;
  double C_slow_prob = 0.0, C_fast_prob = 0.0;
  double C_slow_exp = 0.0, C_fast_exp = 0.0;
  std::vector<NamedConstant> constants;
  double constant(const std::string& name) const;
};

/// Baseline without physics regularization: C'_slow / T^d + C'_fast sigma/T
/// in both regimes. The slow term carries no alignment modulation.
NoRegBound noreg_rate(double T, const ProblemParams& p);

/// Every derived constant with its defining formula, for the audit file.
std::vector<NamedConstant> audit_constants(const ProblemParams& p);

}  // namespace pirem
