#include "gaspower/opt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "gaspower/compressor.hpp"
#include "gaspower/error.hpp"

namespace gaspower {

TrajectoryFunctional compressor_cost(const Simulator& sim, const Trajectory& traj) {
  const auto& model = sim.model();
  const auto& nw = model.network();
  const auto& ix = model.index();
  const std::size_t m = traj.steps();
  auto f = TrajectoryFunctional::zero(traj);
  for (std::size_t c = 0; c < nw.compressors.size(); ++c) {
    const auto& comp = nw.compressors[c];
    const auto in = ix.node_pressure(*nw.node_index(comp.from_node));
    const auto out = ix.node_pressure(*nw.node_index(comp.to_node));
    const auto flow = ix.compressor_flux(c);
    for (std::size_t j = 0; j <= m; ++j) {
      const auto& y = traj.states[j].values;
      const double w = traj.dt * ((j == 0 || j == m) ? 0.5 : 1.0);
      const auto p = cost_integrand_partials(y(in), y(out), y(flow), model.compressor_area(c),
                                             nw.constants.kappa, comp.cost, traj.control(j, c) > 0.0);
      f.value += w * p.value;
      f.d_state[j](in) += w * p.d_p_in;
      f.d_state[j](out) += w * p.d_p_out;
      f.d_state[j](flow) += w * p.d_q;
    }
  }
  return f;
}

std::vector<std::vector<double>> pressure_margins_bar(const Simulator& sim, const Trajectory& traj) {
  const auto& nw = sim.network();
  const auto& ix = sim.model().index();
  std::vector<std::vector<double>> out;
  for (const auto& [id, p_min] : sim.scenario().pressure_bounds) {
    const auto col = ix.node_pressure(*nw.node_index(id));
    std::vector<double> row;
    row.reserve(traj.states.size());
    for (const auto& s : traj.states) row.push_back((s.values(col) - p_min) / kPascalPerBar);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> min_margin_per_step_bar(const Simulator& sim, const Trajectory& traj) {
  std::vector<double> out(traj.states.size(), std::numeric_limits<double>::infinity());
  for (const auto& row : pressure_margins_bar(sim, traj)) {
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = std::min(out[j], row[j]);
  }
  return out;
}

std::optional<TrajectoryFunctional> barrier_functional(const Simulator& sim, const Trajectory& traj,
                                                       double mu) {
  const auto& sc = sim.scenario();
  auto f = compressor_cost(sim, traj);
  f *= sc.optimizer.objective_scale;

  const auto& nw = sim.network();
  const auto& ix = sim.model().index();
  for (const auto& [id, p_min] : sc.pressure_bounds) {
    const auto col = ix.node_pressure(*nw.node_index(id));
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
      const double margin = (traj.states[j].values(col) - p_min) / kPascalPerBar;
      if (!(margin > 0.0)) return std::nullopt;
      f.value -= mu * std::log(margin);
      f.d_state[j](col) -= mu / (margin * kPascalPerBar);
    }
  }
  // Active compressors only boost forward flow; keep the compressor flux strictly positive.
  for (std::size_t c = 0; c < sim.model().compressors(); ++c) {
    const auto col = ix.compressor_flux(c);
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
      const double q = traj.states[j].values(col) / kReferenceFlux;
      if (!(q > 0.0)) return std::nullopt;
      f.value -= mu * std::log(q);
      f.d_state[j](col) -= mu / (q * kReferenceFlux);
    }
  }
  const auto& bounds = sc.control_bounds;
  const auto& u = traj.control.values();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lo = (u[i] - bounds.min) / kPascalPerBar;
    const double hi = (bounds.max - u[i]) / kPascalPerBar;
    if (!(lo > 0.0) || !(hi > 0.0)) return std::nullopt;
    f.value -= mu * (std::log(lo) + std::log(hi));
    f.d_control(static_cast<Eigen::Index>(i)) -= mu * (1.0 / lo - 1.0 / hi) / kPascalPerBar;
  }
  return f;
}

double barrier_objective(const Simulator& sim, const ControlVector& control, double mu) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  try {
    const auto traj = sim.simulate(control);
    const auto f = barrier_functional(sim, traj, mu);
    return f ? f->value : inf;
  } catch (const OperatingRangeError&) {
    return inf;
  } catch (const SolverError&) {
    return inf;
  }
}

ControlVector feasible_start(const Simulator& sim) {
  const auto& sc = sim.scenario();
  const auto& o = sc.optimizer;
  const double step = o.start_step_bar * kPascalPerBar;
  for (double u = std::max(sc.control_bounds.min, 0.0) + step; u < sc.control_bounds.max; u += step) {
    if (!(u > sc.control_bounds.min)) continue;
    const auto control = sim.constant_control(u);
    try {
      const auto traj = sim.simulate(control);
      const auto margins = min_margin_per_step_bar(sim, traj);
      const double worst = *std::min_element(margins.begin(), margins.end());
      if (worst > o.start_margin_bar) return control;
    } catch (const SolverError&) {
      // try the next level
    }
  }
  throw NoFeasibleStart("optimize: no constant control below the upper bound satisfies the pressure bounds");
}

namespace {

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd grad;  // per bar
  Trajectory trajectory;
  double objective = 0.0;
  double min_margin_bar = 0.0;
};

class BarrierProblem {
 public:
  explicit BarrierProblem(const Simulator& sim) : sim_(sim) {}

  std::optional<Evaluation> evaluate(const Eigen::VectorXd& x_bar, double mu) {
    ++count_;
    auto control = sim_.zero_control();
    for (Eigen::Index i = 0; i < x_bar.size(); ++i) {
      control.values()[static_cast<std::size_t>(i)] = x_bar(i) * kPascalPerBar;
    }
    Evaluation e;
    try {
      e.trajectory = sim_.simulate(control);
    } catch (const SolverError&) {
      return std::nullopt;
    }
    std::optional<TrajectoryFunctional> f;
    try {
      f = barrier_functional(sim_, e.trajectory, mu);
    } catch (const OperatingRangeError&) {
      return std::nullopt;
    }
    if (!f) return std::nullopt;
    e.value = f->value;
    try {
      e.grad = adjoint_gradient(sim_, e.trajectory, *f) * kPascalPerBar;
    } catch (const SolverError&) {
      return std::nullopt;
    }
    e.objective = objective(sim_, e.trajectory);
    const auto margins = min_margin_per_step_bar(sim_, e.trajectory);
    e.min_margin_bar = margins.empty() ? std::numeric_limits<double>::infinity()
                                       : *std::min_element(margins.begin(), margins.end());
    return e;
  }

  int count() const { return count_; }

 private:
  const Simulator& sim_;
  int count_ = 0;
};

// Largest step along d keeping x strictly inside [lo, hi].
double max_feasible_step(const Eigen::VectorXd& x, const Eigen::VectorXd& d, double lo, double hi) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (d(i) < 0.0) a = std::min(a, (x(i) - lo) / -d(i));
    if (d(i) > 0.0) a = std::min(a, (hi - x(i)) / d(i));
  }
  return 0.995 * a;
}

}  // namespace

OptimizationResult optimize(const OptimalControlProblem& problem,
                            const std::function<void(const IterationLogEntry&)>& progress) {
  const Simulator sim(problem.network, problem.scenario);
  const auto& o = sim.scenario().optimizer;
  const double lo = sim.scenario().control_bounds.min / kPascalPerBar;
  const double hi = sim.scenario().control_bounds.max / kPascalPerBar;

  const auto start = feasible_start(sim);
  Eigen::VectorXd x(static_cast<Eigen::Index>(start.size()));
  for (std::size_t i = 0; i < start.size(); ++i) x(static_cast<Eigen::Index>(i)) = start.values()[i] / kPascalPerBar;

  BarrierProblem bp(sim);
  OptimizationResult result;
  double mu = o.mu0;
  auto current = bp.evaluate(x, mu);
  if (!current) throw NoFeasibleStart("optimize: starting control is not strictly feasible");
  int iter = 0;

  // Each pass runs at most max_inner quasi-Newton iterations at the current mu. A pass that
  // runs out of iterations at the final mu is restarted with fresh secant memory.
  bool done = false;
  for (int pass = 0; pass < o.max_outer && !done; ++pass) {
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
    bool converged = false;
    bool stalled = false;

    for (int inner = 0; inner < o.max_inner; ++inner) {
      const double gnorm = current->grad.lpNorm<Eigen::Infinity>();
      result.log.push_back({iter++, mu, current->objective, current->min_margin_bar, gnorm});
      if (progress) progress(result.log.back());
      if (gnorm < o.tol) {
        converged = true;
        break;
      }

      // Two-loop recursion.
      Eigen::VectorXd d = -current->grad;
      std::vector<double> alpha(memory.size());
      for (std::size_t k = memory.size(); k-- > 0;) {
        const auto& [s, y] = memory[k];
        alpha[k] = s.dot(d) / s.dot(y);
        d -= alpha[k] * y;
      }
      if (!memory.empty()) {
        const auto& [s, y] = memory.back();
        d *= s.dot(y) / y.dot(y);
      } else {
        d /= std::max(1.0, gnorm);
      }
      for (std::size_t k = 0; k < memory.size(); ++k) {
        const auto& [s, y] = memory[k];
        const double beta = y.dot(d) / s.dot(y);
        d += (alpha[k] - beta) * s;
      }
      double slope = current->grad.dot(d);
      if (!(slope < 0.0)) {
        memory.clear();
        d = -current->grad / std::max(1.0, gnorm);
        slope = current->grad.dot(d);
      }

      double step = std::min(1.0, max_feasible_step(x, d, lo, hi));
      std::optional<Evaluation> trial;
      const double min_step = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>()) / d.lpNorm<Eigen::Infinity>();
      for (; step > min_step; step *= 0.5) {
        trial = bp.evaluate(x + step * d, mu);
        if (trial && trial->value <= current->value + 1e-4 * step * slope) break;
        trial.reset();
      }
      if (!trial) {
        stalled = true;
        break;
      }
      Eigen::VectorXd s = step * d;
      Eigen::VectorXd y = trial->grad - current->grad;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        memory.emplace_back(std::move(s), std::move(y));
        if (static_cast<int>(memory.size()) > o.lbfgs_memory) memory.pop_front();
      }
      x += step * d;
      current = std::move(trial);
    }

    result.final_mu = mu;
    result.final_grad_norm = current->grad.lpNorm<Eigen::Infinity>();
    if (mu > o.mu_min) {
      // Converged, stalled or out of iterations: move on to the next mu from the current iterate.
      result.outer_objectives.push_back(current->objective);
      mu *= o.mu_factor;
      current = bp.evaluate(x, mu);
      if (!current) throw InnerStall("optimize: iterate became infeasible after reducing mu");
    } else if (stalled) {
      std::ostringstream msg;
      msg << "optimize: line search failed at mu = " << mu << ", objective " << current->objective
          << ", gradient norm " << result.final_grad_norm << ", iterate (bar):";
      for (Eigen::Index i = 0; i < x.size(); ++i) msg << ' ' << x(i);
      throw InnerStall(msg.str());
    } else if (converged) {
      result.outer_objectives.push_back(current->objective);
      done = true;
    }
  }
  if (!done) {
    std::ostringstream msg;
    msg << "optimize: no convergence within " << o.max_outer << " passes (mu = " << mu
        << ", gradient norm " << result.final_grad_norm << ")";
    throw InnerStall(msg.str());
  }

  result.control = current->trajectory.control;
  result.trajectory = std::move(current->trajectory);
  result.objective = current->objective;
  result.margins_bar = min_margin_per_step_bar(sim, result.trajectory);
  result.min_margin_bar = result.margins_bar.empty()
                              ? std::numeric_limits<double>::infinity()
                              : *std::min_element(result.margins_bar.begin(), result.margins_bar.end());
  result.evaluations = bp.count();
  return result;
}

}  // namespace gaspower
