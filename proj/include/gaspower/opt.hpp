#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gaspower/adjoint.hpp"
#include "gaspower/sim.hpp"

namespace gaspower {

inline constexpr double kPascalPerBar = 1e5;

/// Discretized compressor cost: dt * sum_j w_j * sum_c cost_integrand_c(t_j), with trapezoidal
/// weights w_0 = w_M = 1/2. Units: cost units times seconds.
TrajectoryFunctional compressor_cost(const Simulator& sim, const Trajectory& trajectory);

inline double objective(const Simulator& sim, const Trajectory& trajectory) {
  return compressor_cost(sim, trajectory).value;
}

/// Pressure margin p_node(t_j) - p_min in bar for every bounded node; rows follow the order of
/// Scenario::pressure_bounds, columns are time levels.
std::vector<std::vector<double>> pressure_margins_bar(const Simulator& sim,
                                                      const Trajectory& trajectory);

/// Smallest margin over all bounded nodes at each time level.
std::vector<double> min_margin_per_step_bar(const Simulator& sim, const Trajectory& trajectory);

/// Scaled objective plus log-barrier terms for pressure bounds, compressor flow direction and
/// control bounds:
/// s J - mu sum ln(margin_bar) - mu sum ln(q_c / q_ref) - mu sum [ln(u - u_min) + ln(u_max - u)],
/// u in bar. Returns nullopt when the trajectory or control is not strictly feasible.
std::optional<TrajectoryFunctional> barrier_functional(const Simulator& sim,
                                                       const Trajectory& trajectory, double mu);

/// barrier_functional evaluated after simulating `control`; +infinity if the control is
/// infeasible or the simulation fails.
double barrier_objective(const Simulator& sim, const ControlVector& control, double mu);

struct OptimalControlProblem {
  Network network;
  Scenario scenario;  ///< carries pressure bounds, control bounds and optimizer settings
};

struct IterationLogEntry {
  int iter = 0;
  double mu = 0.0;
  double objective = 0.0;
  double min_margin_bar = 0.0;
  double grad_norm = 0.0;
};

struct OptimizationResult {
  ControlVector control;
  Trajectory trajectory;
  double objective = 0.0;
  double min_margin_bar = 0.0;
  std::vector<double> margins_bar;  ///< min margin per time level
  std::vector<IterationLogEntry> log;
  std::vector<double> outer_objectives;  ///< true objective after each outer iteration
  double final_mu = 0.0;
  double final_grad_norm = 0.0;  ///< max-norm, scaled barrier objective per bar
  int evaluations = 0;
};

/// Constant control (bar steps of start_step_bar) giving every margin > start_margin_bar.
ControlVector feasible_start(const Simulator& sim);

/// Primal log-barrier method with mu continuation; the inner problems are solved by L-BFGS
/// with backtracking line search on adjoint gradients.
/// `progress`, if set, is called with every iteration log entry as it is produced.
OptimizationResult optimize(const OptimalControlProblem& problem,
                            const std::function<void(const IterationLogEntry&)>& progress = {});

}  // namespace gaspower
