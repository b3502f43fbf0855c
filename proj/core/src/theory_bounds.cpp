// SPDX-License-Identifier: Apache-2.0
#include "pirem/theory_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pirem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log1p_safe(double x) { return std::log1p(x); }

}  // namespace

void ProblemParams::validate() const {
  if (s < 1 || dx < 1 || dy < 1) throw std::invalid_argument("ProblemParams: bad dimensions");
  if (s < 2 * dx)
    throw std::invalid_argument("ProblemParams: Sobolev order must satisfy s >= 2*dx");
  if (!(sigma_w > 0.0)) throw std::invalid_argument("ProblemParams: sigma_w must be > 0");
  if (!(theta > 8.0)) throw std::invalid_argument("ProblemParams: theta must exceed 8");
  if (!(S >= 1.0)) throw std::invalid_argument("ProblemParams: S must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("ProblemParams: delta in (0,1)");
  if (!(rho_f_tilde > 0.0) || !(rho_f > 0.0))
    throw std::invalid_argument("ProblemParams: radii must be > 0");
  if (!(C_c > 0.0) || !(C_c_prime > 0.0))
    throw std::invalid_argument("ProblemParams: covering constants must be > 0");
  if (!(L > 0.0)) throw std::invalid_argument("ProblemParams: L must be > 0");
  if (!(B_sup > 0.0)) throw std::invalid_argument("ProblemParams: B_sup must be > 0");
}

double ProblemParams::lebesgue_volume() const { return std::pow(2.0 * L, dx); }

SobolevRates sobolev_rates(int s, int dx) {
  if (s < 1 || dx < 1) throw std::invalid_argument("sobolev_rates: s, dx must be >= 1");
  SobolevRates r;
  r.d = 2.0 * s / (2.0 * s + dx);
  r.d_prime = 2.0 * dx / (2.0 * s + dx);
  return r;
}

double m_eps_real(double rho_f_tilde, int s, int dx, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("m_eps: eps must be > 0");
  double base = 16.0 * rho_f_tilde * rho_f_tilde * dx / ((2.0 * s - dx) * eps * eps);
  return std::pow(base, static_cast<double>(dx) / (2.0 * s - dx));
}

std::int64_t m_eps(double rho_f_tilde, int s, int dx, double eps) {
  double v = m_eps_real(rho_f_tilde, s, dx, eps);
  if (!(v < 9.0e18)) return std::numeric_limits<std::int64_t>::max();
  auto m = static_cast<std::int64_t>(std::ceil(v));
  return std::max<std::int64_t>(1, m);
}

double hyper_constant_from(double lebesgue_volume, double m) {
  double lam = lebesgue_volume;
  return lam / 32.0 + 8.0 * lam * m * m * std::pow(lam / 8.0 + 2.0, 2.0);
}

namespace {

IsometryConstants isometry_constants_at(const ProblemParams& p, double theta) {
  IsometryConstants c;
  double expo = static_cast<double>(p.dx) / (2.0 * p.s - p.dx);
  c.C_m = std::pow(16.0 * p.rho_f_tilde * p.rho_f_tilde * p.dx * theta / (2.0 * p.s - p.dx), expo);
  c.C_M = c.C_m * p.dy;
  c.C_L = 8.0 * p.rho_f_tilde * p.dy * std::sqrt(theta) * std::pow(c.C_m, static_cast<double>(p.s) / p.dx);
  c.C_h = hyper_constant_from(p.lebesgue_volume(), c.C_m);
  return c;
}

}  // namespace

IsometryConstants isometry_constants(const ProblemParams& p) {
  p.validate();
  return isometry_constants_at(p, p.theta);
}

CoveringBoundary covering_boundary(double r, double theta, const ProblemParams& p) {
  p.validate();
  if (!(r > 0.0)) throw std::invalid_argument("covering_boundary: r must be > 0");
  IsometryConstants c = isometry_constants_at(p, theta);
  double inv_r = 1.0 / r;
  double m_real = c.C_m * std::pow(inv_r, 2.0 * p.dx / (2.0 * p.s - p.dx));
  CoveringBoundary out;
  out.log_covering =
      p.dy * m_real * log1p_safe(c.C_L * std::pow(inv_r, (4.0 * p.s - p.dx) / (2.0 * p.s - p.dx)));
  out.m_r = m_eps(p.rho_f_tilde, p.s, p.dx, r / std::sqrt(theta));
  return out;
}

double covering_boundary_via_claim(double r, double theta, const ProblemParams& p) {
  p.validate();
  double eps = r / std::sqrt(theta);
  double m = m_eps_real(p.rho_f_tilde, p.s, p.dx, eps);
  double radius = 8.0 * p.rho_f_tilde * std::pow(m, static_cast<double>(p.s) / p.dx) * p.dy / eps;
  return p.dy * m * log1p_safe(radius);
}

double covering_effective_class(double rho, double eps, const ProblemParams& p) {
  p.validate();
  if (!(rho > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("covering_effective_class: rho, eps must be > 0");
  double dy_pow = std::pow(static_cast<double>(p.dy), (2.0 * p.s + p.dx) / (2.0 * p.s));
  return p.C_c * dy_pow * std::pow(std::sqrt(rho) / eps, static_cast<double>(p.dx) / p.s);
}

double hyper_constant(double r, const ProblemParams& p) {
  p.validate();
  if (!(r > 0.0)) throw std::invalid_argument("hyper_constant: r must be > 0");
  IsometryConstants c = isometry_constants_at(p, p.theta);
  return c.C_h * std::pow(1.0 / r, 4.0 * p.dx / (2.0 * p.s - p.dx));
}

LowerIsometryProb lower_isometry_prob(double r, double T, const ProblemParams& p) {
  p.validate();
  if (!(r > 0.0)) throw std::invalid_argument("lower_isometry_prob: r must be > 0");
  if (T < 0.0) throw std::invalid_argument("lower_isometry_prob: T must be >= 0");
  IsometryConstants c = isometry_constants_at(p, p.theta);
  double inv_r = 1.0 / r;
  double log_cover =
      p.dy * c.C_m * std::pow(inv_r, 2.0 * p.dx / (2.0 * p.s - p.dx)) *
      log1p_safe(c.C_L * std::pow(inv_r, (4.0 * p.s - p.dx) / (2.0 * p.s - p.dx)));
  double decay = 8.0 * T * std::pow(r, 4.0 * p.dx / (2.0 * p.s - p.dx)) /
                 (p.theta * p.theta * c.C_h * p.S);
  LowerIsometryProb out;
  out.log_raw = log_cover - decay;
  out.raw = std::exp(out.log_raw);
  out.overflow = !std::isfinite(out.raw);
  if (out.overflow) out.raw = kInf;
  out.value = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

double BoundReport::constant(const std::string& name) const {
  for (const auto& c : constants)
    if (c.name == name) return c.value;
  throw std::invalid_argument("BoundReport: no constant named " + name);
}

double RateBound::constant(const std::string& name) const {
  for (const auto& c : constants)
    if (c.name == name) return c.value;
  throw std::invalid_argument("RateBound: no constant named " + name);
}

double NoRegBound::constant(const std::string& name) const {
  for (const auto& c : constants)
    if (c.name == name) return c.value;
  throw std::invalid_argument("NoRegBound: no constant named " + name);
}

namespace {

struct MocProbConstants {
  double C_I, C_II, C_III, C_IV;
};

MocProbConstants moc_prob_constants(const ProblemParams& p) {
  SobolevRates rates = sobolev_rates(p.s, p.dx);
  double d = rates.d;
  double dy_inv_d = std::pow(static_cast<double>(p.dy), 1.0 / d);  // dy^((2s+dx)/(2s))
  double group = 8.0 * p.C_c * dy_inv_d;
  MocProbConstants c;
  c.C_I = 8.0 * (1.0 + std::sqrt(2.0 * std::log(1.0 / p.delta))) * std::pow(group, d / 2.0);
  c.C_II = (2.0 * p.s / (2.0 * p.s - p.dx)) * 8.0 * std::sqrt(p.C_c * dy_inv_d) *
           std::pow(group, (2.0 * p.s - p.dx) / (2.0 * (2.0 * p.s + p.dx)));
  c.C_III = 64.0;
  c.C_IV = 8.0 * std::pow(group, d);
  return c;
}

struct MocExpConstants {
  double C_I, C_II;
};

MocExpConstants moc_exp_constants(const ProblemParams& p) {
  SobolevRates rates = sobolev_rates(p.s, p.dx);
  double d = rates.d;
  double dy_inv_d = std::pow(static_cast<double>(p.dy), 1.0 / d);
  double dy_d = std::pow(static_cast<double>(p.dy), d);
  double group = 8.0 * p.C_c * dy_inv_d;
  MocExpConstants c;
  c.C_I = 8.0 * std::sqrt(p.C_c * dy_d) / (1.0 - p.dx / (2.0 * p.s)) *
          std::pow(group, (2.0 * p.s - p.dx) / (2.0 * (2.0 * p.s + p.dx)));
  c.C_II = 8.0 * std::pow(group, d);
  return c;
}

void flag_overflow(BoundReport& rep) { rep.overflow = !std::isfinite(rep.value); }

}  // namespace

BoundReport moc_bound_prob(double T, double rho, const ProblemParams& p) {
  p.validate();
  if (!(T >= 1.0)) throw std::invalid_argument("moc_bound_prob: T must be >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("moc_bound_prob: rho must be > 0");
  SobolevRates rates = sobolev_rates(p.s, p.dx);
  double d = rates.d, dp = rates.d_prime;
  MocProbConstants c = moc_prob_constants(p);
  double sigma = p.sigma_w;

  double term1 = c.C_I * std::pow(sigma, 1.0 + d) * std::pow(T, -(1.0 + d) / 2.0) *
                 std::pow(rho, dp / 4.0);
  double term2 = (c.C_II + c.C_IV) * std::pow(sigma, 2.0 * d) * std::pow(T, -d) *
                 std::pow(rho, dp / 2.0);
  double term3 = c.C_III * sigma * std::log(1.0 / p.delta) / T;
  double group = 8.0 * p.C_c * std::pow(static_cast<double>(p.dy), 1.0 / d);
  double gamma_star =
      std::pow(group, d / 2.0) * std::pow(sigma / T, d / 2.0) * std::pow(rho, dp / 4.0);

  BoundReport rep;
  rep.value = term1 + term2 + term3;
  rep.constants = {
      {"C_I", c.C_I, "8*(1+sqrt(2*log(1/delta)))*(8*C_c*dy^(1/d))^(d/2)"},
      {"C_II", c.C_II,
       "(2*s/(2*s-dx))*8*sqrt(C_c*dy^(1/d))*(8*C_c*dy^(1/d))^((2*s-dx)/(2*(2*s+dx)))"},
      {"C_III", c.C_III, "64"},
      {"C_IV", c.C_IV, "8*(8*C_c*dy^(1/d))^d"},
      {"gamma", gamma_star, "(8*C_c*dy^(1/d))^(d/2)*(sigma/T)^(d/2)*rho^(d'/4)"},
      {"term_I", term1, "C_I*sigma^(1+d)*T^(-(1+d)/2)*rho^(d'/4)"},
      {"term_II_IV", term2, "(C_II+C_IV)*sigma^(2d)*T^(-d)*rho^(d'/2)"},
      {"term_III", term3, "C_III*sigma*log(1/delta)/T"},
  };
  flag_overflow(rep);
  return rep;
}

BoundReport moc_bound_exp(double T, double rho, const ProblemParams& p) {
  p.validate();
  if (!(T >= 1.0)) throw std::invalid_argument("moc_bound_exp: T must be >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("moc_bound_exp: rho must be > 0");
  SobolevRates rates = sobolev_rates(p.s, p.dx);
  MocExpConstants c = moc_exp_constants(p);
  BoundReport rep;
  rep.value = (c.C_I + c.C_II) * std::pow(p.sigma_w / T, rates.d) *
              std::pow(rho, rates.d_prime / 2.0);
  rep.constants = {
      {"C_I", c.C_I,
       "(8*sqrt(C_c*dy^d)/(1-dx/(2*s)))*(8*C_c*dy^(1/d))^((2*s-dx)/(2*(2*s+dx)))"},
      {"C_II", c.C_II, "8*(8*C_c*dy^(1/d))^d"},
  };
  flag_overflow(rep);
  return rep;
}

namespace {

double burn_in_rhs_prob(double r_sq, const ProblemParams& p, const IsometryConstants& c) {
  double inv_r = 1.0 / std::sqrt(r_sq);
  double e1 = 6.0 * p.dx / (2.0 * p.s - p.dx);
  double e2 = (4.0 * p.s - p.dx) / (2.0 * p.s - p.dx);
  double e3 = 4.0 * p.dx / (2.0 * p.s - p.dx);
  return p.theta * p.theta * c.C_h * p.S / 8.0 *
         (c.C_M * std::pow(inv_r, e1) * log1p_safe(c.C_L * std::pow(inv_r, e2)) +
          std::pow(inv_r, e3) * std::log(1.0 / p.delta));
}

double burn_in_rhs_exp(double r_sq, double T, const ProblemParams& p,
                       const IsometryConstants& c) {
  double inv_r = 1.0 / std::sqrt(r_sq);
  double e2 = (4.0 * p.s - p.dx) / (2.0 * p.s - p.dx);
  double e3 = 4.0 * p.dx / (2.0 * p.s - p.dx);
  double e4 = 2.0 * p.dx / (2.0 * p.s - p.dx);
  double inner = c.C_M * std::pow(inv_r, e4) *
                     std::log(4.0 * p.B_sup * p.B_sup *
                              (1.0 + c.C_L * std::pow(inv_r, e2))) +
                 std::log(p.sigma_w / T);
  return p.theta * p.theta * c.C_h * p.S / 8.0 * std::pow(inv_r, e3) * inner;
}

}  // namespace

RateBound rate_bound_prob(double T, double R_fstar, const ProblemParams& p) {
  p.validate();
  if (!(T >= 1.0)) throw std::invalid_argument("rate_bound_prob: T must be >= 1");
  if (!(R_fstar > 0.0))
    throw std::invalid_argument(
        "rate_bound_prob: R(fstar) must be > 0 (the admissible lambda_T diverges at exact "
        "alignment)");
  SobolevRates rates = sobolev_rates(p.s, p.dx);
  double d = rates.d, dp = rates.d_prime;
  MocProbConstants c = moc_prob_constants(p);
  IsometryConstants iso = isometry_constants_at(p, p.theta);
  double sigma = p.sigma_w;
  double logd = std::log(1.0 / p.delta);

  RateBound rb;
  rb.C_slow = (p.theta + 4.0) * (c.C_I * std::pow(10.0, dp / 4.0) * std::pow(sigma, 1.0 + d) +
                                 c.C_II * std::pow(10.0, dp / 2.0) * std::pow(sigma, 2.0 * d) +
                                 c.C_IV * std::pow(sigma, 2.0 * d) * std::pow(10.0, dp / 2.0));
  rb.C_fast = (p.theta + 4.0) * c.C_III + 1.0;
  rb.slow_term =
      rb.C_slow * std::max(std::pow(R_fstar, dp / 4.0), std::pow(R_fstar, dp / 2.0)) /
      std::pow(T, d);
  rb.fast_term = rb.C_fast * sigma * logd / T;
  rb.bound = rb.slow_term + rb.fast_term;
  rb.rho = 10.0 * R_fstar;
  rb.lambda_min =
      4.0 / (3.0 * std::pow(T, d)) *
      (c.C_I * std::pow(sigma, 1.0 + d) / std::pow(R_fstar, 1.0 - dp / 4.0) +
       (c.C_II + c.C_IV) * std::pow(sigma, 2.0 * d) / std::pow(R_fstar, 1.0 - dp / 2.0) +
       c.C_III * sigma * logd / R_fstar);
  rb.r_sq = rb.lambda_min * R_fstar + sigma / T;
  rb.burn_in_rhs = burn_in_rhs_prob(rb.r_sq, p, iso);
  rb.burn_in_ok = T >= rb.burn_in_rhs;
  rb.constants = {
      {"C_I", c.C_I, "8*(1+sqrt(2*log(1/delta)))*(8*C_c*dy^(1/d))^(d/2)"},
      {"C_II", c.C_II,
       "(2*s/(2*s-dx))*8*sqrt(C_c*dy^(1/d))*(8*C_c*dy^(1/d))^((2*s-dx)/(2*(2*s+dx)))"},
      {"C_III", c.C_III, "64"},
      {"C_IV", c.C_IV, "8*(8*C_c*dy^(1/d))^d"},
      {"C_slow", rb.C_slow,
       "(theta+4)*(C_I*10^(d'/4)*sigma^(1+d)+C_II*10^(d'/2)*sigma^(2d)+C_IV*10^(d'/2)*sigma^(2d))"},
      {"C_fast", rb.C_fast, "(theta+4)*C_III+1"},
      {"C_m", iso.C_m, "(16*rho~^2*dx*theta/(2*s-dx))^(dx/(2*s-dx))"},
      {"C_M", iso.C_M, "C_m*dy"},
      {"C_L", iso.C_L, "8*rho~*dy*sqrt(theta)*C_m^(s/dx)"},
      {"C_h", iso.C_h, "Lambda/32+8*Lambda*C_m^2*(Lambda/8+2)^2"},
      {"rho", rb.rho, "10*R(fstar)"},
  };
  rb.overflow = !std::isfinite(rb.bound);
  return rb;
}

RateBound rate_bound_exp(double T, double R_fstar, const ProblemParams& p) {
  p.validate();
  if (!(T >= 1.0)) throw std::invalid_argument("rate_bound_exp: T must be >= 1");
  if (!(R_fstar > 0.0))
    throw std::invalid_argument(
        "rate_bound_exp: R(fstar) must be > 0 (the admissible lambda_T diverges at exact "
        "alignment)");
  SobolevRates rates = sobolev_rates(p.s, p.dx);
  double d = rates.d, dp = rates.d_prime;
  MocExpConstants c = moc_exp_constants(p);
  IsometryConstants iso = isometry_constants_at(p, p.theta);
  double sigma = p.sigma_w;

  RateBound rb;
  rb.C_slow = (p.theta + 4.0) * std::pow(10.0, dp / 2.0) * (c.C_I + c.C_II) * std::pow(sigma, d);
  rb.C_fast = 2.0;
  rb.slow_term = rb.C_slow * std::pow(R_fstar, dp / 2.0) / std::pow(T, d);
  rb.fast_term = rb.C_fast * sigma / T;
  rb.bound = rb.slow_term + rb.fast_term;
  rb.rho = 10.0 * R_fstar;
  rb.lambda_min = 4.0 * (c.C_I + c.C_II) * std::pow(sigma, d) /
                  (3.0 * T * std::pow(R_fstar, 1.0 - dp / 2.0));
  rb.r_sq = 2.0 * rb.lambda_min * R_fstar + sigma / T;
  rb.burn_in_rhs = burn_in_rhs_exp(rb.r_sq, T, p, iso);
  rb.burn_in_ok = T >= rb.burn_in_rhs;
  rb.constants = {
      {"C_I", c.C_I,
       "(8*sqrt(C_c*dy^d)/(1-dx/(2*s)))*(8*C_c*dy^(1/d))^((2*s-dx)/(2*(2*s+dx)))"},
      {"C_II", c.C_II, "8*(8*C_c*dy^(1/d))^d"},
      {"C_slow", rb.C_slow, "(theta+4)*10^(d'/2)*(C_I+C_II)*sigma^d"},
      {"C_fast", rb.C_fast, "2"},
      {"C_m", iso.C_m, "(16*rho~^2*dx*theta/(2*s-dx))^(dx/(2*s-dx))"},
      {"C_M", iso.C_M, "C_m*dy"},
      {"C_L", iso.C_L, "8*rho~*dy*sqrt(theta)*C_m^(s/dx)"},
      {"C_h", iso.C_h, "Lambda/32+8*Lambda*C_m^2*(Lambda/8+2)^2"},
      {"rho", rb.rho, "10*R(fstar)"},
  };
  rb.overflow = !std::isfinite(rb.bound);
  return rb;
}

namespace {

template <typename OkAtT>
std::int64_t burn_in_threshold(OkAtT ok) {
  // find an ok point by doubling, then bisect the crossing
  std::int64_t hi = 1;
  const std::int64_t cap = std::int64_t{1} << 62;
  while (!ok(hi)) {
    if (hi >= cap) return cap;
    hi *= 2;
  }
  std::int64_t lo = hi / 2;  // lo == 0 when hi == 1
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

std::int64_t burn_in_threshold_prob(double R_fstar, const ProblemParams& p) {
  return burn_in_threshold([&](std::int64_t T) {
    return rate_bound_prob(static_cast<double>(T), R_fstar, p).burn_in_ok;
  });
}

std::int64_t burn_in_threshold_exp(double R_fstar, const ProblemParams& p) {
  return burn_in_threshold([&](std::int64_t T) {
    return rate_bound_exp(static_cast<double>(T), R_fstar, p).burn_in_ok;
  });
}

NoRegBound noreg_rate(double T, const ProblemParams& p) {
  p.validate();
  if (!(T >= 1.0)) throw std::invalid_argument("noreg_rate: T must be >= 1");
  SobolevRates rates = sobolev_rates(p.s, p.dx);
  double d = rates.d;
  double sigma = p.sigma_w;
  double logd = std::log(1.0 / p.delta);
  double dy_inv_d = std::pow(static_cast<double>(p.dy), 1.0 / d);
  double group = 8.0 * p.C_c_prime * dy_inv_d;
  double rho = p.rho_f;

  // high-probability constants
  double CpI = 8.0 * std::pow(group, p.s / (2.0 * p.s + p.dx)) *
               (1.0 + std::sqrt(2.0 * logd)) * std::pow(rho, p.dx / (2.0 * p.s + p.dx));
  double CpII = 8.0 * std::sqrt(p.C_c_prime * dy_inv_d) / (1.0 - p.dx / (2.0 * p.s)) *
                std::pow(group, (2.0 * p.s - p.dx) / (2.0 * (2.0 * p.s + p.dx))) *
                std::pow(rho, 2.0 * p.dx / (2.0 * p.s + p.dx));
  double CpIII = 64.0;
  double CpIV = 8.0 * std::pow(group, 2.0 * p.s / (2.0 * p.s + p.dx)) *
                std::pow(rho, 2.0 * p.dx / (2.0 * p.s + p.dx));

  // expectation constants (the gamma balance folds rho_f into the group)
  double group_e = group * std::pow(rho, static_cast<double>(p.dx) / p.s);
  double CpI_e = 8.0 * std::sqrt(p.C_c_prime * dy_inv_d) / (1.0 - p.dx / (2.0 * p.s)) *
                 std::pow(group_e, p.s / (2.0 * p.s + p.dx)) *
                 std::pow(rho, static_cast<double>(p.dx) / p.s + p.dx / (2.0 * p.s + p.dx));
  double CpII_e = 8.0 * std::pow(group_e, 2.0 * p.s / (2.0 * p.s + p.dx));

  NoRegBound nb;
  nb.C_slow_prob = p.theta * (CpI + CpII + CpIV) *
                   std::max(std::pow(sigma, 1.0 + d), std::pow(sigma, 2.0 * d));
  nb.C_fast_prob = 1.0 + p.theta * CpIII;
  nb.bound_prob = nb.C_slow_prob / std::pow(T, d) + nb.C_fast_prob * sigma * logd / T;
  nb.C_slow_exp = p.theta * (CpI_e + CpII_e) * std::pow(sigma, d);
  nb.C_fast_exp = 2.0;
  nb.bound_exp = nb.C_slow_exp / std::pow(T, d) + nb.C_fast_exp * sigma / T;
  nb.constants = {
      {"Cp_I", CpI, "8*(8*Cc'*dy^(1/d))^(s/(2s+dx))*(1+sqrt(2*log(1/delta)))*rho_f^(dx/(2s+dx))"},
      {"Cp_II", CpII,
       "8*sqrt(Cc'*dy^(1/d))/(1-dx/(2s))*(8*Cc'*dy^(1/d))^((2s-dx)/(2*(2s+dx)))*rho_f^(2dx/(2s+dx))"},
      {"Cp_III", CpIII, "64"},
      {"Cp_IV", CpIV, "8*(8*Cc'*dy^(1/d))^(2s/(2s+dx))*rho_f^(2dx/(2s+dx))"},
      {"Cp_I_exp", CpI_e,
       "8*sqrt(Cc'*dy^(1/d))/(1-dx/(2s))*(8*Cc'*dy^(1/d)*rho_f^(dx/s))^(s/(2s+dx))*rho_f^(dx/s+dx/(2s+dx))"},
      {"Cp_II_exp", CpII_e, "8*(8*Cc'*dy^(1/d)*rho_f^(dx/s))^(2s/(2s+dx))"},
      {"C_slow_prob", nb.C_slow_prob,
       "theta*(Cp_I+Cp_II+Cp_IV)*max(sigma^(1+d),sigma^(2d))"},
      {"C_fast_prob", nb.C_fast_prob, "1+theta*Cp_III"},
      {"C_slow_exp", nb.C_slow_exp, "theta*(Cp_I_exp+Cp_II_exp)*sigma^d"},
      {"C_fast_exp", nb.C_fast_exp, "2"},
  };
  return nb;
}

std::vector<NamedConstant> audit_constants(const ProblemParams& p) {
  p.validate();
  std::vector<NamedConstant> all;
  SobolevRates rates = sobolev_rates(p.s, p.dx);
  all.push_back({"d", rates.d, "2*s/(2*s+dx)"});
  all.push_back({"d_prime", rates.d_prime, "2*dx/(2*s+dx)"});
  IsometryConstants iso = isometry_constants(p);
  all.push_back({"C_m", iso.C_m, "(16*rho~^2*dx*theta/(2*s-dx))^(dx/(2*s-dx))"});
  all.push_back({"C_M", iso.C_M, "C_m*dy"});
  all.push_back({"C_L", iso.C_L, "8*rho~*dy*sqrt(theta)*C_m^(s/dx)"});
  all.push_back({"C_h", iso.C_h, "Lambda/32+8*Lambda*C_m^2*(Lambda/8+2)^2"});
  auto is_constant = [](const std::string& name) {
    return name.rfind("term", 0) != 0 && name != "gamma" && name != "rho";
  };
  for (const auto& c : moc_bound_prob(2.0, 1.0, p).constants)
    if (is_constant(c.name)) all.push_back({"moc_prob." + c.name, c.value, c.formula});
  for (const auto& c : moc_bound_exp(2.0, 1.0, p).constants)
    if (is_constant(c.name)) all.push_back({"moc_exp." + c.name, c.value, c.formula});
  for (const auto& c : rate_bound_prob(2.0, 1.0, p).constants)
    if (is_constant(c.name) && c.name.rfind("C_", 0) == 0)
      all.push_back({"rate_prob." + c.name, c.value, c.formula});
  for (const auto& c : rate_bound_exp(2.0, 1.0, p).constants)
    if (is_constant(c.name) && c.name.rfind("C_", 0) == 0)
      all.push_back({"rate_exp." + c.name, c.value, c.formula});
  for (const auto& c : noreg_rate(2.0, p).constants)
    all.push_back({"noreg." + c.name, c.value, c.formula});
  return all;
}

}  // namespace pirem
