#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaspower/adjoint.hpp"
#include "gaspower/error.hpp"
#include "gaspower/gas.hpp"
#include "gaspower/io.hpp"
#include "gaspower/opt.hpp"
#include "gaspower/sim.hpp"

namespace {

using namespace gaspower;

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitInput = 2;

std::string defaults_footer() {
  const NewtonSettings n;
  const OptimizerSettings o;
  const ControlBounds b;
  const CompressorCostModel c;
  const GasConstants g;
  std::ostringstream os;
  os << "Defaults (overridable in the scenario file unless noted):\n"
     << "  gas: kappa = c^2 = " << g.kappa << " Pa m^3/kg, gamma = " << g.gamma << ", eta = " << g.eta
     << " kg/(m s), pipe diameter " << kDefaultDiameter << " m, roughness " << kDefaultRoughness
     << " m, cell length ~" << kNominalCellLength / 1000.0 << " km\n"
     << "  friction: Colebrook fixed point, tol " << gas::kColebrookTolerance << ", max "
     << gas::kColebrookMaxIterations << " iterations, rough limit below Re = " << gas::kRoughLimitReynolds
     << " (fixed)\n"
     << "  Newton: tol " << n.tol << ", steady tol " << n.steady_tol << ", max " << n.max_iter
     << " iterations, max " << n.max_halvings << " step halvings; residual scaling q_ref = "
     << kReferenceFlux << " kg/(m^2 s) (fixed)\n"
     << "  optimizer: mu0 " << o.mu0 << ", mu factor " << o.mu_factor << ", mu_min " << o.mu_min << ", tol "
     << o.tol << ", max passes " << o.max_outer << ", max inner " << o.max_inner << ", L-BFGS memory "
     << o.lbfgs_memory << ", objective scale 1/3600 (cost-hours)\n"
     << "  feasible start: constant u in steps of " << o.start_step_bar << " bar until margin > "
     << o.start_margin_bar << " bar; feasibility tol " << o.feasibility_tol_bar << " bar\n"
     << "  control bounds: " << b.min / kPascalPerBar << " <= u <= " << b.max / kPascalPerBar << " bar\n"
     << "  compressor cost: d0 + d1 P + d2 P^2 with P the isothermal shaft power in MW, (d0, d1, d2) = ("
     << c.d0 << ", " << c.d1 << ", " << c.d2 << ")\n"
     << "Exit codes: 0 success, 1 infeasible or no convergence, 2 input error.\n";
  return os.str();
}

struct Common {
  std::string network;
  std::string scenario;
  bool lax = false;
};

io::LoadOptions load_options(const Common& c, std::vector<std::string>& warnings) {
  io::LoadOptions o;
  o.keys = c.lax ? io::KeyPolicy::lax : io::KeyPolicy::strict;
  o.warnings = &warnings;
  return o;
}

void warnings_from(const std::vector<std::string>& notes, std::vector<std::string>& warnings) {
  warnings.insert(warnings.end(), notes.begin(), notes.end());
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

double min_or_inf(const std::vector<double>& v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::min(m, x);
  return m;
}

int cmd_validate(const Common& c) {
  std::vector<std::string> warnings;
  auto options = load_options(c, warnings);
  options.validate = false;
  const auto network = io::load_network(c.network, options);
  print_warnings(warnings);
  const auto report = validate_network(network);
  std::cout << report.to_string();
  std::cout << network.gas_nodes.size() << " gas nodes, " << network.pipes.size() << " pipes, "
            << network.compressors.size() << " compressors, " << network.busses.size() << " busses, "
            << network.lines.size() << " lines, " << network.plants.size() << " plants\n";
  return report.ok() ? kExitOk : kExitInput;
}

int cmd_simulate(const Common& c, const std::string& control_path, const std::string& out) {
  std::vector<std::string> warnings;
  const auto options = load_options(c, warnings);
  auto network = io::load_network(c.network, options);
  auto scenario = io::load_scenario(c.scenario, network, options);
  warnings_from(step_ratio_advisories(network, scenario), warnings);
  print_warnings(warnings);
  const Simulator sim(std::move(network), std::move(scenario));
  const auto control = control_path.empty() ? sim.zero_control() : io::load_control(control_path, sim);
  const auto traj = sim.simulate(control);
  io::write_results(out, sim, traj);
  std::cout << "simulated " << traj.steps() << " steps; results in " << out << '\n';
  if (!sim.scenario().pressure_bounds.empty()) {
    std::printf("min pressure margin %.6g bar\n", min_or_inf(min_margin_per_step_bar(sim, traj)));
  }
  return kExitOk;
}

struct OptimizeFlags {
  std::optional<double> tol, mu0, mu_factor, u_max;
  std::optional<int> max_iter;
  bool verbose = false;
};

int cmd_optimize(const Common& c, const OptimizeFlags& f, const std::string& out) {
  std::vector<std::string> warnings;
  const auto options = load_options(c, warnings);
  OptimalControlProblem problem;
  problem.network = io::load_network(c.network, options);
  problem.scenario = io::load_scenario(c.scenario, problem.network, options);
  warnings_from(step_ratio_advisories(problem.network, problem.scenario), warnings);
  print_warnings(warnings);
  auto& o = problem.scenario.optimizer;
  if (f.tol) o.tol = *f.tol;
  if (f.mu0) o.mu0 = *f.mu0;
  if (f.mu_factor) o.mu_factor = *f.mu_factor;
  if (f.max_iter) o.max_inner = *f.max_iter;
  if (f.u_max) problem.scenario.control_bounds.max = *f.u_max * kPascalPerBar;
  if (!(o.tol > 0.0) || !(o.mu0 > 0.0) || !(o.mu_factor > 0.0 && o.mu_factor < 1.0) || o.max_inner < 1 ||
      !(problem.scenario.control_bounds.max > problem.scenario.control_bounds.min)) {
    throw InputError("optimizer settings: need tol > 0, mu0 > 0, 0 < mu-factor < 1, max-iter >= 1, u-max > u-min");
  }

  const auto progress = [&](const IterationLogEntry& e) {
    if (f.verbose) {
      std::fprintf(stderr, "%5d  mu %-10.3g  objective %-14.9g  margin %-10.4g  |g| %.3g\n", e.iter, e.mu,
                   e.objective, e.min_margin_bar, e.grad_norm);
    }
  };
  const auto result = optimize(problem, progress);
  const Simulator sim(problem.network, problem.scenario);
  io::write_results(out, sim, result.trajectory, &result);
  std::printf("objective %.9g, min pressure margin %.6g bar, %zu iterations, %d evaluations\n",
              result.objective, result.min_margin_bar, result.log.size(), result.evaluations);
  std::cout << "results in " << out << '\n';
  if (result.min_margin_bar < -o.feasibility_tol_bar) {
    std::cerr << "error: optimized trajectory violates a pressure bound by more than "
              << o.feasibility_tol_bar << " bar\n";
    return kExitSolver;
  }
  return kExitOk;
}

struct GradientFlags {
  std::string control;
  int components = 8;
  double step_pa = 1e3;
  double mu = 0.0;
  double rtol = 1e-5;
};

int cmd_check_gradient(const Common& c, const GradientFlags& f) {
  std::vector<std::string> warnings;
  const auto options = load_options(c, warnings);
  auto network = io::load_network(c.network, options);
  auto scenario = io::load_scenario(c.scenario, network, options);
  print_warnings(warnings);
  if (f.components < 1 || !(f.step_pa > 0.0) || f.mu < 0.0) {
    throw InputError("check-gradient: need components >= 1, step > 0, mu >= 0");
  }
  const Simulator sim(std::move(network), std::move(scenario));
  const auto control = io::load_control(f.control, sim);

  const auto functional = [&](const Trajectory& traj) -> std::optional<TrajectoryFunctional> {
    if (f.mu > 0.0) return barrier_functional(sim, traj, f.mu);
    return compressor_cost(sim, traj);
  };
  const auto value = [&](const ControlVector& u) {
    const auto fn = functional(sim.simulate(u));
    if (!fn) throw SolverError("check-gradient: perturbed control is outside the barrier domain");
    return fn->value;
  };

  const auto traj = sim.simulate(control);
  const auto fn = functional(traj);
  if (!fn) throw SolverError("check-gradient: control is outside the barrier domain");
  const auto grad = adjoint_gradient(sim, traj, *fn);

  const std::size_t n = control.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(f.components), n);
  const std::size_t nc = control.compressors();
  std::printf("functional %.12g (%s)\n", fn->value, f.mu > 0.0 ? "barrier objective" : "compressor cost");
  std::printf("%6s %8s %10s %16s %16s %12s\n", "index", "t_hours", "compressor", "adjoint", "fd", "rel_err");
  int failures = 0;
  for (std::size_t m = 0; m < k; ++m) {
    // Evenly spaced components, first and last included.
    const std::size_t i = k == 1 ? 0 : m * (n - 1) / (k - 1);
    auto up = control;
    auto down = control;
    up.values()[i] += f.step_pa;
    down.values()[i] -= f.step_pa;
    const double fd = (value(up) - value(down)) / (2.0 * f.step_pa);
    const double adj = grad(static_cast<Eigen::Index>(i));
    const bool checked = std::abs(fd) > 1e-10;
    const double rel = checked ? std::abs(adj - fd) / std::abs(fd) : std::abs(adj - fd);
    if (checked && rel >= f.rtol) ++failures;
    std::printf("%6zu %8.4g %10s %16.9e %16.9e %12.3e%s\n", i, sim.scenario().time_hours(i / nc),
                sim.network().compressors[i % nc].id.c_str(), adj, fd, rel, checked ? "" : "  (|fd| <= 1e-10)");
  }
  std::printf("%d of %zu components exceed rtol %.3g\n", failures, k, f.rtol);
  return failures == 0 ? kExitOk : kExitSolver;
}

void add_common(CLI::App* cmd, Common& c, bool with_scenario) {
  cmd->add_option("--network", c.network, "network JSON file")->required()->check(CLI::ExistingFile);
  if (with_scenario) {
    cmd->add_option("--scenario", c.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  }
  cmd->add_flag("--lax", c.lax, "warn about unknown keys instead of rejecting them");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled gas network and AC power grid simulation with compressor optimal control."};
  app.footer(defaults_footer());
  app.require_subcommand(1, 1);

  Common common;
  std::string control_path;
  std::string out = "results";
  OptimizeFlags opt_flags;
  GradientFlags grad_flags;

  auto* simulate = app.add_subcommand("simulate", "simulate a scenario for a given control (u = 0 by default)");
  add_common(simulate, common, true);
  simulate->add_option("--control", control_path, "control CSV (t_hours,u_bar)")->check(CLI::ExistingFile);
  simulate->add_option("--out", out, "output directory")->capture_default_str();

  auto* optimize_cmd = app.add_subcommand("optimize", "minimise compressor cost subject to the pressure bounds");
  add_common(optimize_cmd, common, true);
  optimize_cmd->add_option("--out", out, "output directory")->capture_default_str();
  const OptimizerSettings defaults;
  optimize_cmd->add_option("--tol", opt_flags.tol,
                           "inner gradient tolerance, max-norm per bar (default " + CLI::detail::to_string(defaults.tol) + ")");
  optimize_cmd->add_option("--mu0", opt_flags.mu0, "initial barrier parameter (default 100)");
  optimize_cmd->add_option("--mu-factor", opt_flags.mu_factor, "barrier reduction factor (default 0.2)");
  optimize_cmd->add_option("--max-iter", opt_flags.max_iter,
                           "max L-BFGS iterations per barrier parameter (default " +
                               std::to_string(defaults.max_inner) + ")");
  optimize_cmd->add_option("--u-max", opt_flags.u_max, "upper control bound in bar (default 30)");
  optimize_cmd->add_flag("--verbose", opt_flags.verbose, "print the iteration log to stderr");

  auto* check = app.add_subcommand("check-gradient", "compare adjoint gradient with central finite differences");
  add_common(check, common, true);
  check->add_option("--control", grad_flags.control, "control CSV (t_hours,u_bar)")
      ->required()
      ->check(CLI::ExistingFile);
  check->add_option("--components", grad_flags.components, "number of evenly spaced components to check")
      ->capture_default_str();
  check->add_option("--step", grad_flags.step_pa, "finite-difference step in Pa")->capture_default_str();
  check->add_option("--mu", grad_flags.mu, "check the barrier objective at this mu (0: compressor cost only)")
      ->capture_default_str();
  check->add_option("--rtol", grad_flags.rtol, "relative error threshold for the exit code")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "check a network file and print the validation report");
  add_common(validate, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*simulate) return cmd_simulate(common, control_path, out);
    if (*optimize_cmd) return cmd_optimize(common, opt_flags, out);
    if (*check) return cmd_check_gradient(common, grad_flags);
    if (*validate) return cmd_validate(common);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
