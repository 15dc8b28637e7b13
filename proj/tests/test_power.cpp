#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "gaspower/fixture.hpp"
#include "gaspower/power.hpp"
#include "gaspower/scenario.hpp"

using namespace gaspower;
using namespace gaspower::power;

namespace {

// Flat state carrying the fixture's fixed bus data at time t.
PowerState fixture_initial(const Network& n, double t_hours) {
  const auto values = BoundarySchedule(n, fixture::scenario().boundary).at(t_hours);
  auto s = PowerState::flat(static_cast<Eigen::Index>(n.busses.size()));
  for (std::size_t k = 0; k < n.busses.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto [a, b] = values.bus[k];
    switch (n.busses[k].kind) {
      case BusKind::slack: s.V(i) = a, s.phi(i) = b; break;
      case BusKind::generator: s.P(i) = a, s.V(i) = b; break;
      case BusKind::load: s.P(i) = a, s.Q(i) = b; break;
    }
  }
  return s;
}

void set(PowerState& s, Eigen::Index col, double value) {
  const auto bus = col / 4;
  switch (static_cast<Quantity>(col % 4)) {
    case Quantity::V: s.V(bus) = value; break;
    case Quantity::phi: s.phi(bus) = value; break;
    case Quantity::P: s.P(bus) = value; break;
    case Quantity::Q: s.Q(bus) = value; break;
  }
}

double get(const PowerState& s, Eigen::Index col) {
  const auto bus = col / 4;
  switch (static_cast<Quantity>(col % 4)) {
    case Quantity::V: return s.V(bus);
    case Quantity::phi: return s.phi(bus);
    case Quantity::P: return s.P(bus);
    case Quantity::Q: return s.Q(bus);
  }
  return 0.0;
}

Eigen::MatrixXd fd_jacobian(const PowerState& s, const Admittance& y) {
  const auto n = s.size();
  Eigen::MatrixXd fd(2 * n, 4 * n);
  for (Eigen::Index c = 0; c < 4 * n; ++c) {
    const double h = 1e-6;
    auto plus = s, minus = s;
    set(plus, c, get(s, c) + h);
    set(minus, c, get(s, c) - h);
    fd.col(c) = (powerflow_residual(plus, y) - powerflow_residual(minus, y)) / (2.0 * h);
  }
  return fd;
}

}  // namespace

TEST(Powerflow, FlatStateRowSumAtSlackBus) {
  const auto n = fixture::network();
  const auto y = nodal_admittance(n);
  const auto r = powerflow_residual(PowerState::flat(9), y);
  const auto k = static_cast<Eigen::Index>(*n.bus_index("N1"));
  EXPECT_NEAR(r(2 * k), 0.0, 1e-12);
  EXPECT_NEAR(r(2 * k + 1), 0.0, 1e-12);
  // Away from the slack bus the flat state sees the row sums of G and -B.
  for (Eigen::Index j = 0; j < 9; ++j) {
    EXPECT_NEAR(r(2 * j), -y.conductance.row(j).sum(), 1e-12);
    EXPECT_NEAR(r(2 * j + 1), y.susceptance.row(j).sum(), 1e-12);
  }
}

TEST(Powerflow, SolvedBaselineResiduals) {
  const auto n = fixture::network();
  const auto solution = solve_powerflow(n, fixture_initial(n, 0.0));
  const auto r = powerflow_residual(solution.state, nodal_admittance(n));
  EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(solution.iterations, 10);
  // Fixed data is preserved.
  const auto k1 = static_cast<Eigen::Index>(*n.bus_index("N1"));
  EXPECT_EQ(solution.state.V(k1), 1.0);
  EXPECT_EQ(solution.state.phi(k1), 0.0);
  // Slack covers the net load (3.15 - 2.48 = 0.67 p.u.) plus losses.
  EXPECT_GT(solution.state.P(k1), 0.67);
  EXPECT_LT(solution.state.P(k1), 0.8);
}

TEST(Powerflow, SlackPowerRisesWithLoad) {
  const auto n = fixture::network();
  const auto before = solve_powerflow(n, fixture_initial(n, 1.0)).state;
  const auto after = solve_powerflow(n, fixture_initial(n, 2.0)).state;
  const auto k1 = static_cast<Eigen::Index>(*n.bus_index("N1"));
  const double rise = after.P(k1) - before.P(k1);
  EXPECT_GT(rise, 0.9);
  EXPECT_LT(rise, 1.5);
}

TEST(Powerflow, JacobianMatchesFiniteDifferences) {
  const auto n = fixture::network();
  const auto y = nodal_admittance(n);
  for (const auto& s : {PowerState::flat(9), solve_powerflow(n, fixture_initial(n, 0.0)).state}) {
    const Eigen::MatrixXd jac(powerflow_jacobian(s, y));
    const auto fd = fd_jacobian(s, y);
    EXPECT_LT((jac - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff(), 1e-6);
    for (Eigen::Index k = 0; k < 9; ++k) {
      EXPECT_EQ(jac(2 * k, packed_column({k, Quantity::P})), 1.0);
      EXPECT_EQ(jac(2 * k + 1, packed_column({k, Quantity::Q})), 1.0);
    }
  }
}

TEST(Powerflow, ReducedJacobianSelectsColumns) {
  const auto n = fixture::network();
  const auto y = nodal_admittance(n);
  const auto s = solve_powerflow(n, fixture_initial(n, 0.0)).state;
  const auto free = free_variables(n.busses);
  // 8 phases, 6 load voltages, slack P and Q, 2 generator Q.
  EXPECT_EQ(free.size(), 18u);
  const Eigen::MatrixXd full(powerflow_jacobian(s, y));
  const Eigen::MatrixXd reduced(powerflow_jacobian(s, y, free));
  ASSERT_EQ(reduced.cols(), static_cast<Eigen::Index>(free.size()));
  for (std::size_t i = 0; i < free.size(); ++i) {
    EXPECT_TRUE(reduced.col(static_cast<Eigen::Index>(i))
                    .isApprox(full.col(packed_column(free[i])), 0.0));
  }
}

TEST(Powerflow, PhaseGaugeInvariance) {
  const auto n = fixture::network();
  const auto y = nodal_admittance(n);
  const auto s = solve_powerflow(n, fixture_initial(n, 0.0)).state;
  auto shifted = s;
  shifted.phi.array() += 0.37;
  EXPECT_LT((powerflow_residual(s, y) - powerflow_residual(shifted, y)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(PlantOfftake, ExampleValues) {
  const GasPowerPlant plant;
  EXPECT_EQ(plant_gas_offtake(plant, 0.0), 2.0);
  EXPECT_EQ(plant_gas_offtake(plant, 1.0), 17.0);
  EXPECT_EQ(plant_gas_offtake(plant, 0.5), 7.0);
  EXPECT_DOUBLE_EQ(plant_gas_offtake(plant, 0.95), 2.0 + 4.75 + 9.025);
}

TEST(PlantOfftake, Convex) {
  const GasPowerPlant plant;
  for (double a = -1.0; a < 2.0; a += 0.25) {
    for (double b = a + 0.1; b < 2.5; b += 0.3) {
      const double mid = plant_gas_offtake(plant, 0.5 * (a + b));
      EXPECT_LE(mid, 0.5 * (plant_gas_offtake(plant, a) + plant_gas_offtake(plant, b)) + 1e-12);
    }
  }
}
