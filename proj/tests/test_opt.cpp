#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaspower/error.hpp"
#include "gaspower/fixture.hpp"
#include "gaspower/opt.hpp"
#include "helpers.hpp"

using namespace gaspower;

namespace {

Scenario toy_with_bound(double p_min_bar) {
  auto s = test::toy_scenario(80.0, 120.0, 1.0);
  s.pressure_bounds["out"] = p_min_bar * test::kBar;
  return s;
}

double min_pressure_bar(const Simulator& sim, const Trajectory& traj, const char* node) {
  const auto i = sim.model().index().node_pressure(*sim.network().node_index(node));
  double p = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.states) p = std::min(p, s[i]);
  return p / test::kBar;
}

}  // namespace

TEST(Objective, ZeroControlCostsNothing) {
  const Simulator sim(test::compressor_line(), test::toy_scenario());
  EXPECT_EQ(objective(sim, sim.simulate(sim.zero_control())), 0.0);
}

TEST(Objective, TrapezoidIsExactForConstantIntegrand) {
  // Constant boundary data: the steady state persists, so the integrand is constant in time.
  const Simulator sim(test::compressor_line(), test::toy_scenario(80.0, 80.0, 1.0));
  const auto traj = sim.simulate(sim.constant_control(2e5));
  const auto& ix = sim.model().index();
  const auto& y = traj.states[0];
  const double integrand = cost_integrand(
      y[ix.node_pressure(1)], y[ix.node_pressure(2)], y[ix.compressor_flux(0)],
      sim.model().compressor_area(0), sim.network().constants.kappa, CompressorCostModel{}, true);
  EXPECT_NEAR(objective(sim, traj), integrand * 3600.0, 1e-6 * integrand * 3600.0);
}

TEST(Barrier, ZeroMuEqualsScaledObjective) {
  const Simulator sim(test::compressor_line(), toy_with_bound(30.0));
  const auto traj = sim.simulate(sim.constant_control(2e5));
  const auto b = barrier_functional(sim, traj, 0.0);
  ASSERT_TRUE(b.has_value());
  EXPECT_DOUBLE_EQ(b->value, sim.scenario().optimizer.objective_scale * objective(sim, traj));
}

TEST(Barrier, LinearInMu) {
  const Simulator sim(test::compressor_line(), toy_with_bound(30.0));
  const auto traj = sim.simulate(sim.constant_control(2e5));
  const double base = barrier_functional(sim, traj, 0.0)->value;
  const double full = barrier_functional(sim, traj, 0.4)->value - base;
  const double half = barrier_functional(sim, traj, 0.2)->value - base;
  EXPECT_NE(full, 0.0);
  EXPECT_NEAR(half, 0.5 * full, 1e-12 * std::abs(full));
}

TEST(Barrier, DivergesAsMarginVanishes) {
  const Simulator probe(test::compressor_line(), toy_with_bound(30.0));
  const auto control = probe.constant_control(2e5);
  const double p_low = min_pressure_bar(probe, probe.simulate(control), "out");
  double last = -std::numeric_limits<double>::infinity();
  for (double gap : {1.0, 1e-2, 1e-4, 1e-8}) {
    const Simulator sim(test::compressor_line(), toy_with_bound(p_low - gap));
    const double v = barrier_objective(sim, control, 1.0);
    EXPECT_GT(v, last) << gap;
    last = v;
  }
  const Simulator touching(test::compressor_line(), toy_with_bound(p_low));
  EXPECT_EQ(barrier_objective(touching, control, 1.0), std::numeric_limits<double>::infinity());
}

TEST(Barrier, ControlAtBoundIsInfeasible) {
  const Simulator sim(test::compressor_line(), toy_with_bound(30.0));
  EXPECT_EQ(barrier_objective(sim, sim.zero_control(), 1.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(barrier_objective(sim, sim.constant_control(30e5), 1.0),
            std::numeric_limits<double>::infinity());
  EXPECT_TRUE(std::isfinite(barrier_objective(sim, sim.constant_control(1e5), 1.0)));
}

TEST(Barrier, GradientMatchesFiniteDifferences) {
  const Simulator sim(test::compressor_line(), toy_with_bound(45.0));
  auto u = sim.constant_control(3e5);
  for (std::size_t j = 0; j < u.time_levels(); ++j) u(j, 0) += 0.2e5 * static_cast<double>(j);
  const auto traj = sim.simulate(u);
  const auto f = barrier_functional(sim, traj, 0.1);
  ASSERT_TRUE(f.has_value());
  const auto g = adjoint_gradient(sim, traj, *f);
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto plus = u, minus = u;
    plus.values()[i] += 1e3;
    minus.values()[i] -= 1e3;
    const double fd = (barrier_objective(sim, plus, 0.1) - barrier_objective(sim, minus, 0.1)) / 2e3;
    EXPECT_LT(test::rel_diff(g(static_cast<Eigen::Index>(i)), fd), 1e-5) << i;
  }
}

TEST(Optimize, InactiveBoundDrivesControlToZero) {
  const OptimalControlProblem problem{test::compressor_line(), toy_with_bound(1.0)};
  const auto result = optimize(problem);
  double u_max = 0.0;
  for (double u : result.control.values()) u_max = std::max(u_max, u / test::kBar);
  EXPECT_LT(u_max, 0.05);
  EXPECT_GT(*std::min_element(result.control.values().begin(), result.control.values().end()), 0.0);
  // Relative to running the compressor at a modest 1 bar the cost is negligible.
  const Simulator sim(problem.network, problem.scenario);
  const double one_bar = objective(sim, sim.simulate(sim.constant_control(test::kBar)));
  EXPECT_LT(result.objective, 0.05 * one_bar);
}

TEST(Optimize, UnreachableBoundHasNoFeasibleStart) {
  const OptimalControlProblem problem{test::compressor_line(), toy_with_bound(100.0)};
  EXPECT_THROW(optimize(problem), NoFeasibleStart);
}

TEST(Optimize, UncontrolledFixtureIsInfeasible) {
  const Simulator sim(fixture::network(), fixture::scenario());
  const auto margins = min_margin_per_step_bar(sim, sim.simulate(sim.zero_control()));
  EXPECT_LT(*std::min_element(margins.begin(), margins.end()), -1e-3);
}

TEST(Optimize, FixtureOptimum) {
  // One optimization run shared by all checks; it is the most expensive test in the suite.
  const Simulator sim(fixture::network(), fixture::scenario());
  const auto result = optimize(OptimalControlProblem{fixture::network(), fixture::scenario()});

  // pressure bound
  EXPECT_GE(result.min_margin_bar, -1e-3);
  ASSERT_EQ(result.margins_bar.size(), 49u);
  for (double m : result.margins_bar) EXPECT_GE(m, -1e-3);
  EXPECT_GE(min_pressure_bar(sim, result.trajectory, "S25"), 41.0 - 1e-3);

  // control bounds
  for (double u : result.control.values()) {
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 30e5);
  }

  // outer objectives
  ASSERT_GE(result.outer_objectives.size(), 2u);
  for (std::size_t k = 1; k < result.outer_objectives.size(); ++k) {
    EXPECT_LE(result.outer_objectives[k], result.outer_objectives[k - 1] + 1e-8) << k;
  }

  // convergence
  const auto& o = sim.scenario().optimizer;
  EXPECT_LE(result.final_mu, o.mu_min);
  EXPECT_LT(result.final_grad_norm, o.tol);
  EXPECT_FALSE(result.log.empty());

  // reproducible by simulation
  const auto traj = sim.simulate(result.control);
  EXPECT_NEAR(objective(sim, traj), result.objective, 1e-9 * std::abs(result.objective));
  const auto margins = min_margin_per_step_bar(sim, traj);
  for (std::size_t j = 0; j < margins.size(); ++j) {
    EXPECT_NEAR(margins[j], result.margins_bar[j], 1e-9) << j;
  }

  // beats feasible constant controls
  int feasible = 0;
  for (double u_bar = 2.0; u_bar < 30.0; u_bar += 2.0) {
    const auto t = sim.simulate(sim.constant_control(u_bar * test::kBar));
    const auto m = min_margin_per_step_bar(sim, t);
    if (*std::min_element(m.begin(), m.end()) < 0.0) continue;
    ++feasible;
    EXPECT_LT(result.objective, objective(sim, t)) << u_bar;
  }
  EXPECT_GT(feasible, 0);
}
