// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: simulate / fit / sweep / bounds / moc / unicycle.
// Runs are driven by a key-value config file (see README for the key
// reference); --seed, --jobs and --out override the config. Exit codes:
// 0 success, 2 config error, 3 numerical failure.

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "pirem/config.hpp"
#include "pirem/csv.hpp"
#include "pirem/expr.hpp"
#include "pirem/harness.hpp"

namespace {

using namespace pirem;

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "pirem_out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
};

Config load_config(const GlobalOpts& g) {
  Config cfg = g.config_path.empty() ? Config() : Config::from_file(g.config_path);
  if (g.seed_set) cfg.set("seed", std::to_string(g.seed));
  cfg.set("jobs", std::to_string(g.jobs));
  cfg.set("out", g.out_dir);
  return cfg;
}

LinearDiffOp operator_from_config(const Config& cfg, int dy, int dx) {
  auto lines = cfg.get_all("operator.term");
  if (lines.empty()) {
    // default prior: second derivative in each axis (Laplacian)
    LinearDiffOp op = LinearDiffOp::laplacian(dy, dx);
    return op;
  }
  LinearDiffOp op;
  op.dy = dy;
  op.dx = dx;
  op.order = static_cast<int>(cfg.get_int("operator.order", 2));
  op.terms.assign(static_cast<std::size_t>(dy), {});
  for (const auto& line : lines) {
    // format: <output> | <alpha comma-separated> | <coeff number or expression>
    auto bar1 = line.find('|');
    auto bar2 = line.find('|', bar1 == std::string::npos ? 0 : bar1 + 1);
    if (bar1 == std::string::npos || bar2 == std::string::npos)
      throw ConfigError("operator.term needs 'output | alpha.. | coeff': " + line);
    int out = std::stoi(line.substr(0, bar1));
    if (out < 0 || out >= dy) throw ConfigError("operator.term output index out of range: " + line);
    DiffTerm term;
    {
      std::string alpha_text = line.substr(bar1 + 1, bar2 - bar1 - 1);
      std::replace(alpha_text.begin(), alpha_text.end(), ',', ' ');
      std::istringstream is(alpha_text);
      int a;
      while (is >> a) term.alpha.push_back(a);
      if (static_cast<int>(term.alpha.size()) != dx)
        throw ConfigError("operator.term alpha must have dx entries: " + line);
    }
    std::string coeff = line.substr(bar2 + 1);
    try {
      std::size_t used = 0;
      term.coeff = std::stod(coeff, &used);
      while (used < coeff.size() && std::isspace(static_cast<unsigned char>(coeff[used]))) ++used;
      if (used != coeff.size()) throw std::invalid_argument("expression");
    } catch (const std::exception&) {
      term.coeff_fn = parse_coeff_expr(coeff, dx);
      term.coeff_expr = coeff;
      term.coeff = 1.0;
    }
    op.terms[static_cast<std::size_t>(out)].push_back(std::move(term));
  }
  op.validate();
  return op;
}

DynSystem system_from_config(const Config& cfg) {
  int dx = static_cast<int>(cfg.get_int("system.dx", 1));
  double L = cfg.get_double("system.L", 0.25);
  double sigma = cfg.get_double("system.sigma", 0.1);
  auto exprs = cfg.get_all("system.fstar");
  if (exprs.empty()) exprs.assign(static_cast<std::size_t>(dx), "0.5*x1");
  if (static_cast<int>(exprs.size()) != dx)
    throw ConfigError("system.fstar needs one expression per state coordinate");
  std::vector<std::function<double(const Eigen::VectorXd&)>> fns;
  for (const auto& e : exprs) fns.push_back(parse_coeff_expr(e, dx));
  auto fstar = [fns, dx](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(dx);
    for (int i = 0; i < dx; ++i) y[i] = fns[static_cast<std::size_t>(i)](x);
    return y;
  };
  auto init = cfg.get_string("system.init", "dirac") == "uniform" ? DynSystem::InitLaw::UniformCube
                                                                  : DynSystem::InitLaw::Dirac;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dx);
  if (cfg.has("system.x0")) {
    auto vals = cfg.get_double_list("system.x0");
    if (static_cast<int>(vals.size()) != dx) throw ConfigError("system.x0 needs dx entries");
    for (int i = 0; i < dx; ++i) x0[i] = vals[static_cast<std::size_t>(i)];
  }
  return DynSystem::make(dx, L, sigma, fstar, init, x0);
}

ProblemParams theory_from_config(const Config& cfg, int dx_default) {
  ProblemParams p;
  p.dx = static_cast<int>(cfg.get_int("theory.dx", dx_default));
  p.s = static_cast<int>(cfg.get_int("theory.s", 2 * p.dx));
  p.dy = static_cast<int>(cfg.get_int("theory.dy", p.dx));
  p.sigma_w = cfg.get_double("theory.sigma_w", cfg.get_double("system.sigma", 0.1));
  p.theta = cfg.get_double("theory.theta", 9.0);
  p.S = cfg.get_double("theory.S", 1.0);
  p.rho_f_tilde = cfg.get_double("theory.rho_f_tilde", 1.0);
  p.rho_f = cfg.get_double("theory.rho_f", 1.0);
  p.C_c = cfg.get_double("theory.C_c", 1.0);
  p.C_c_prime = cfg.get_double("theory.C_c_prime", 1.0);
  p.delta = cfg.get_double("theory.delta", 0.05);
  p.L = cfg.get_double("theory.L", cfg.get_double("system.L", 1.0));
  p.B_sup = cfg.get_double("theory.B_sup", 1.0);
  p.validate();
  return p;
}

RegMeasure measure_from_config(const Config& cfg) {
  RegMeasure m;
  std::string kind = cfg.get_string("regularizer.measure", "quadrature_x");
  if (kind == "lebesgue") m.kind = RegMeasure::Kind::LebesgueCube;
  else if (kind == "quadrature_x") m.kind = RegMeasure::Kind::QuadratureOnX;
  else throw ConfigError("regularizer.measure must be lebesgue or quadrature_x");
  m.quad.nodes_per_axis = static_cast<int>(cfg.get_int("regularizer.nodes", 0));
  return m;
}

int cmd_simulate(const Config& cfg) {
  DynSystem sys = system_from_config(cfg);
  std::int64_t T = cfg.get_int("simulate.T", 1024);
  std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  TrajectoryDataset data = simulate_trajectory(sys, T, seed);
  std::string out = cfg.get_string("out");
  std::filesystem::create_directories(out);
  save_dataset_csv(data, out + "/dataset.csv", cfg.get_bool("simulate.with_noise", false));
  std::cout << "wrote " << out << "/dataset.csv (T=" << T << ", dx=" << sys.dx << ")\n";
  return 0;
}

int cmd_fit(const Config& cfg) {
  double L = cfg.get_double("system.L", 0.25);
  TrajectoryDataset data = load_dataset_csv(cfg.get_string("fit.dataset"), L);
  FitConfig fc;
  fc.m = cfg.get_int("fit.m", 16);
  fc.lambda_T = cfg.get_double("fit.lambda_T", 0.0);
  fc.lambda_sob = cfg.get_double("fit.lambda_sob", 1e-9);
  fc.s = static_cast<int>(cfg.get_int("fit.s", 2 * data.dx));
  LinearDiffOp op = operator_from_config(cfg, data.dy, data.dx);
  RegMeasure measure = measure_from_config(cfg);
  OperatorGram gram;
  const OperatorGram* gram_ptr = nullptr;
  if (fc.lambda_T > 0.0) {
    gram = operator_gram(op, fc.m, data.dx, L, measure);
    gram_ptr = &gram;
  }
  FitResult fit = fit_erm(data, fc, gram_ptr);
  std::string out = cfg.get_string("out");
  std::filesystem::create_directories(out);
  save_coeffs_csv(fit.coeffs, out + "/coeffs.csv");
  {
    std::ofstream os(out + "/fit_summary.csv");
    CsvWriter csv(os, {"m", "lambda_T", "lambda_sob", "objective", "residual_norm", "gram_cond",
                       "sobolev_norm_sq", "regularizer"});
    csv.row({std::to_string(fc.m), fmt_g17(fc.lambda_T), fmt_g17(fc.lambda_sob),
             fmt_g17(fit.objective), fmt_g17(fit.residual_norm), fmt_g17(fit.gram_cond),
             fmt_g17(fit.sobolev_norm_sq), fmt_g17(fit.regularizer)});
  }
  std::cout << "objective " << fit.objective << ", residual " << fit.residual_norm << ", wrote "
            << out << "/coeffs.csv\n";
  return 0;
}

int cmd_sweep(const Config& cfg) {
  SweepConfig sc;
  sc.sys = system_from_config(cfg);
  sc.op = operator_from_config(cfg, sc.sys.dy, sc.sys.dx);
  sc.reg_measure = measure_from_config(cfg);
  sc.s = static_cast<int>(cfg.get_int("fit.s", 2 * sc.sys.dx));
  if (cfg.has("sweep.T_grid")) sc.T_grid = cfg.get_int_list("sweep.T_grid");
  else sc.T_grid = {128, 256, 512, 1024, 2048, 4096, 8192, 16384};
  sc.n_reps = static_cast<int>(cfg.get_int("sweep.reps", 20));
  sc.m_schedule.coef = cfg.get_double("sweep.m_coef", 1.5);
  sc.m_schedule.power = cfg.get_double("sweep.m_pow", 0.33);
  sc.m_schedule.lo = cfg.get_int("sweep.m_min", 10);
  sc.m_schedule.hi = cfg.get_int("sweep.m_max", 48);
  sc.reg.lambda_T = cfg.get_double("sweep.lambda_reg", 3e-3);
  sc.reg.lambda_sob = cfg.get_double("sweep.lambda_sob", 1e-9);
  sc.unreg.lambda_sob = sc.reg.lambda_sob;
  std::string policy = cfg.get_string("sweep.lambda_policy", "fixed");
  if (policy == "theory") sc.reg.policy = ArmSpec::LambdaPolicy::Theory;
  else if (policy == "validation") sc.reg.policy = ArmSpec::LambdaPolicy::Validation;
  else if (policy != "fixed")
    throw ConfigError("sweep.lambda_policy must be fixed, theory or validation");
  sc.T_eval = cfg.get_int("sweep.T_eval", 2048);
  sc.n_traj = static_cast<int>(cfg.get_int("sweep.n_traj", 4));
  sc.master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  sc.jobs = static_cast<int>(cfg.get_int("jobs", 1));
  sc.burn_in_frac = cfg.get_double("sweep.burn_in_frac", 0.25);
  sc.theory = theory_from_config(cfg, sc.sys.dx);
  sc.theory_R = cfg.get_double("sweep.theory_R", -1.0);

  RateReport report = rate_sweep(sc);
  std::string out = cfg.get_string("out");
  report.manifest = "# config echo\n" + cfg.echo() + "# derived\n" + report.manifest;
  emit_outputs(report, out);
  for (const auto& arm : report.arms)
    std::cout << arm.name << " slope " << arm.slope.slope << " +/- " << arm.slope.ci_half << "\n";
  std::cout << "wrote " << out << "/{rates.csv,slopes.csv,plot.svg,manifest.txt}\n";
  return 0;
}

int cmd_bounds(const Config& cfg) {
  ProblemParams p = theory_from_config(cfg, static_cast<int>(cfg.get_int("theory.dx", 1)));
  std::vector<std::int64_t> T_grid = cfg.has("bounds.T_grid")
                                         ? cfg.get_int_list("bounds.T_grid")
                                         : std::vector<std::int64_t>{128, 512, 2048, 8192, 32768};
  double rho = cfg.get_double("bounds.rho", 1.0);
  double R = cfg.get_double("bounds.R", 0.1);
  double r = cfg.get_double("bounds.r", 0.5);
  std::string out = cfg.get_string("out");
  std::filesystem::create_directories(out);
  {
    std::ofstream os(out + "/bounds.csv");
    CsvWriter csv(os, {"T", "moc_prob", "moc_exp", "rate_prob", "rate_exp", "noreg_prob",
                       "noreg_exp", "lambda_min_prob", "lambda_min_exp", "burn_in_ok_prob",
                       "lower_isometry_prob"});
    for (std::int64_t T : T_grid) {
      auto mp = moc_bound_prob(static_cast<double>(T), rho, p);
      auto me = moc_bound_exp(static_cast<double>(T), rho, p);
      auto rp = rate_bound_prob(static_cast<double>(T), R, p);
      auto re = rate_bound_exp(static_cast<double>(T), R, p);
      auto nr = noreg_rate(static_cast<double>(T), p);
      auto iso = lower_isometry_prob(r, static_cast<double>(T), p);
      csv.row({std::to_string(T), fmt_g17(mp.value), fmt_g17(me.value), fmt_g17(rp.bound),
               fmt_g17(re.bound), fmt_g17(nr.bound_prob), fmt_g17(nr.bound_exp),
               fmt_g17(rp.lambda_min), fmt_g17(re.lambda_min), rp.burn_in_ok ? "1" : "0",
               fmt_g17(iso.value)});
    }
  }
  {
    std::ofstream os(out + "/constants_audit.txt");
    os << "# every derived constant with its defining formula\n";
    for (const auto& c : audit_constants(p))
      os << c.name << " = " << fmt_g17(c.value) << "  # " << c.formula << "\n";
  }
  if (cfg.has("chain.transition")) {
    // finite-chain dependence diagnostics: the spectral norm is reported next
    // to (never folded into) the persistence parameter S
    FiniteChain chain;
    chain.n_states = static_cast<int>(cfg.get_int("chain.n_states", 2));
    chain.horizon = static_cast<int>(cfg.get_int("chain.horizon", 4));
    auto init = cfg.has("chain.initial")
                    ? cfg.get_double_list("chain.initial")
                    : std::vector<double>(static_cast<std::size_t>(chain.n_states),
                                          1.0 / chain.n_states);
    auto trans = cfg.get_double_list("chain.transition");  // row-major
    if (static_cast<int>(init.size()) != chain.n_states ||
        static_cast<int>(trans.size()) != chain.n_states * chain.n_states)
      throw ConfigError("chain.initial/transition sizes must match chain.n_states");
    chain.initial.resize(chain.n_states);
    chain.transition.resize(chain.n_states, chain.n_states);
    for (int i = 0; i < chain.n_states; ++i) {
      chain.initial[i] = init[static_cast<std::size_t>(i)];
      for (int j = 0; j < chain.n_states; ++j)
        chain.transition(i, j) = trans[static_cast<std::size_t>(i * chain.n_states + j)];
    }
    DependenceMatrix dm = dependence_matrix_finite(chain);
    std::ofstream os(out + "/dependence.csv");
    CsvWriter csv(os, {"row", "col", "gamma"});
    for (int i = 0; i < chain.horizon; ++i)
      for (int j = 0; j < chain.horizon; ++j)
        csv.row({std::to_string(i + 1), std::to_string(j + 1), fmt_g17(dm.gamma(i, j))});
    std::cout << "dependence matrix spectral norm " << dm.norm2 << " (written to dependence.csv)\n";
  }
  std::cout << "wrote " << out << "/bounds.csv and constants_audit.txt\n";
  return 0;
}

int cmd_moc(const Config& cfg) {
  double L = cfg.get_double("system.L", 0.25);
  TrajectoryDataset data = load_dataset_csv(cfg.get_string("moc.dataset"), L);
  if (data.W.isZero(0.0))
    std::cerr << "warning: dataset has no noise columns; empirical MOC uses zeros\n";
  std::int64_t m = cfg.get_int("moc.m", 8);
  Eigen::MatrixXd Phi = design_matrix(data.X, m, L);
  double emp = empirical_moc_linear(Phi, data.W);
  ProblemParams p = theory_from_config(cfg, data.dx);
  double rho = cfg.get_double("bounds.rho", 1.0);
  auto mp = moc_bound_prob(static_cast<double>(data.T), rho, p);
  auto me = moc_bound_exp(static_cast<double>(data.T), rho, p);
  std::string out = cfg.get_string("out");
  std::filesystem::create_directories(out);
  std::ofstream os(out + "/moc.csv");
  CsvWriter csv(os, {"T", "m", "empirical_moc_linear", "moc_bound_prob", "moc_bound_exp"});
  csv.row({std::to_string(data.T), std::to_string(m), fmt_g17(emp), fmt_g17(mp.value),
           fmt_g17(me.value)});
  std::cout << "empirical MOC " << emp << " vs bounds (prob " << mp.value << ", exp " << me.value
            << ")\n";
  return 0;
}

int cmd_unicycle(const Config& cfg) {
  UnicycleConfig uc;
  uc.dt = cfg.get_double("unicycle.dt", 0.05);
  uc.sigma = cfg.get_double("unicycle.sigma", 1.0);
  uc.pos_halfwidth = cfg.get_double("unicycle.pos_halfwidth", 1.0);
  uc.nu_lo = cfg.get_double("unicycle.nu_lo", 0.0);
  uc.nu_hi = cfg.get_double("unicycle.nu_hi", 1.0);
  uc.omega_max = cfg.get_double("unicycle.omega_max", 1.0);
  uc.lambda = cfg.get_double("unicycle.lambda", 3000.0);
  uc.n_nodes = static_cast<int>(cfg.get_int("unicycle.nodes", 300));
  if (cfg.has("unicycle.T_grid")) uc.T_grid = cfg.get_int_list("unicycle.T_grid");
  uc.n_reps = static_cast<int>(cfg.get_int("unicycle.reps", 20));
  uc.K_coef = cfg.get_double("unicycle.K_coef", 0.00455);
  uc.K_pow = cfg.get_double("unicycle.K_pow", 0.8);
  uc.K_min = cfg.get_int("unicycle.K_min", 4);
  uc.K_max = cfg.get_int("unicycle.K_max", 60);
  uc.T_eval = cfg.get_int("unicycle.T_eval", 2000);
  uc.n_traj = static_cast<int>(cfg.get_int("unicycle.n_traj", 2));
  uc.master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  uc.jobs = static_cast<int>(cfg.get_int("jobs", 1));
  RateReport report = unicycle_experiment(uc);
  std::string out = cfg.get_string("out");
  report.manifest = "# config echo\n" + cfg.echo() + "# derived\n" + report.manifest;
  emit_outputs(report, out);
  for (const auto& arm : report.arms)
    std::cout << arm.name << " slope " << arm.slope.slope << " +/- " << arm.slope.ci_half << "\n";
  std::cout << "wrote " << out << "/{rates.csv,slopes.csv,plot.svg,manifest.txt}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physics-informed regularized regression over trajectory data"};
  app.require_subcommand(1);

  GlobalOpts glob;
  app.add_option("--config", glob.config_path, "key-value run configuration file");
  app.add_option("--out", glob.out_dir, "output directory");
  app.add_option("--jobs", glob.jobs, "worker count (1 reproduces parallel runs exactly)");
  auto* seed_opt = app.add_option("--seed", glob.seed, "master seed override");

  auto* c_sim = app.add_subcommand("simulate", "generate a trajectory dataset CSV");
  auto* c_fit = app.add_subcommand("fit", "fit coefficients from a dataset CSV");
  auto* c_sweep = app.add_subcommand("sweep", "rate sweep over T with both arms");
  auto* c_bounds = app.add_subcommand("bounds", "evaluate every theoretical bound on a grid");
  auto* c_moc = app.add_subcommand("moc", "empirical martingale offset complexity vs bounds");
  auto* c_uni = app.add_subcommand("unicycle", "non-slip unicycle experiment");
  for (auto* sub : {c_sim, c_fit, c_sweep, c_bounds, c_moc, c_uni}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    glob.seed_set = seed_opt->count() > 0;
    Config cfg = load_config(glob);
    if (c_sim->parsed()) return cmd_simulate(cfg);
    if (c_fit->parsed()) return cmd_fit(cfg);
    if (c_sweep->parsed()) return cmd_sweep(cfg);
    if (c_bounds->parsed()) return cmd_bounds(cfg);
    if (c_moc->parsed()) return cmd_moc(cfg);
    if (c_uni->parsed()) return cmd_unicycle(cfg);
    return 2;
  } catch (const pirem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
