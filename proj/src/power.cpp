#include "gaspower/power.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "gaspower/error.hpp"

namespace gaspower::power {

namespace {

void check_dimensions(const PowerState& s, const Admittance& y) {
  const auto n = y.size();
  if (s.V.size() != n || s.phi.size() != n || s.P.size() != n || s.Q.size() != n) {
    throw InputError("powerflow: state dimension does not match the grid");
  }
}

}  // namespace

PowerState PowerState::flat(Eigen::Index buses) {
  return {Eigen::VectorXd::Ones(buses), Eigen::VectorXd::Zero(buses),
          Eigen::VectorXd::Zero(buses), Eigen::VectorXd::Zero(buses)};
}

Eigen::VectorXd powerflow_residual(const PowerState& s, const Admittance& y) {
  check_dimensions(s, y);
  const auto n = y.size();
  Eigen::VectorXd r(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double p = 0.0, q = 0.0;
    for (Eigen::Index j : y.row_pattern(k)) {
      const double a = s.phi(k) - s.phi(j);
      const double g = y.conductance(k, j), b = y.susceptance(k, j);
      const double vv = s.V(k) * s.V(j);
      p += vv * (g * std::cos(a) + b * std::sin(a));
      q += vv * (g * std::sin(a) - b * std::cos(a));
    }
    r(2 * k) = s.P(k) - p;
    r(2 * k + 1) = s.Q(k) - q;
  }
  return r;
}

Eigen::SparseMatrix<double> powerflow_jacobian(const PowerState& s, const Admittance& y) {
  check_dimensions(s, y);
  const auto n = y.size();
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index rp = 2 * k, rq = 2 * k + 1;
    double dp_dvk = 0.0, dq_dvk = 0.0, dp_dphik = 0.0, dq_dphik = 0.0;
    for (Eigen::Index j : y.row_pattern(k)) {
      const double a = s.phi(k) - s.phi(j);
      const double g = y.conductance(k, j), b = y.susceptance(k, j);
      const double tkj = g * std::cos(a) + b * std::sin(a);
      const double ukj = g * std::sin(a) - b * std::cos(a);
      dp_dvk += s.V(j) * tkj;
      dq_dvk += s.V(j) * ukj;
      if (j == k) {
        dp_dvk += s.V(k) * tkj;
        dq_dvk += s.V(k) * ukj;
        continue;
      }
      const double vv = s.V(k) * s.V(j);
      dp_dphik -= vv * ukj;
      dq_dphik += vv * tkj;
      t.emplace_back(rp, packed_column({j, Quantity::V}), -s.V(k) * tkj);
      t.emplace_back(rq, packed_column({j, Quantity::V}), -s.V(k) * ukj);
      t.emplace_back(rp, packed_column({j, Quantity::phi}), -vv * ukj);
      t.emplace_back(rq, packed_column({j, Quantity::phi}), vv * tkj);
    }
    t.emplace_back(rp, packed_column({k, Quantity::V}), -dp_dvk);
    t.emplace_back(rq, packed_column({k, Quantity::V}), -dq_dvk);
    t.emplace_back(rp, packed_column({k, Quantity::phi}), -dp_dphik);
    t.emplace_back(rq, packed_column({k, Quantity::phi}), -dq_dphik);
    t.emplace_back(rp, packed_column({k, Quantity::P}), 1.0);
    t.emplace_back(rq, packed_column({k, Quantity::Q}), 1.0);
  }
  Eigen::SparseMatrix<double> jac(2 * n, 4 * n);
  jac.setFromTriplets(t.begin(), t.end());
  return jac;
}

Eigen::SparseMatrix<double> powerflow_jacobian(const PowerState& s, const Admittance& y,
                                               const std::vector<Variable>& columns) {
  const auto full = powerflow_jacobian(s, y);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto col = packed_column(columns[c]);
    for (Eigen::SparseMatrix<double>::InnerIterator it(full, col); it; ++it) {
      t.emplace_back(it.row(), static_cast<Eigen::Index>(c), it.value());
    }
  }
  Eigen::SparseMatrix<double> jac(full.rows(), static_cast<Eigen::Index>(columns.size()));
  jac.setFromTriplets(t.begin(), t.end());
  return jac;
}

std::vector<Variable> free_variables(const std::vector<Bus>& busses) {
  std::vector<Variable> out;
  for (std::size_t i = 0; i < busses.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    switch (busses[i].kind) {
      case BusKind::slack:
        out.push_back({k, Quantity::P});
        out.push_back({k, Quantity::Q});
        break;
      case BusKind::generator:
        out.push_back({k, Quantity::phi});
        out.push_back({k, Quantity::Q});
        break;
      case BusKind::load:
        out.push_back({k, Quantity::phi});
        out.push_back({k, Quantity::V});
        break;
    }
  }
  return out;
}

namespace {

double& component(PowerState& s, Variable v) {
  switch (v.quantity) {
    case Quantity::V: return s.V(v.bus);
    case Quantity::phi: return s.phi(v.bus);
    case Quantity::P: return s.P(v.bus);
    case Quantity::Q: return s.Q(v.bus);
  }
  return s.V(v.bus);
}

}  // namespace

PowerflowSolution solve_powerflow(const Network& network, const PowerState& initial, double tol,
                                  int max_iter) {
  const auto y = nodal_admittance(network);
  const auto vars = free_variables(network.busses);
  PowerflowSolution sol{initial, 0, 0.0};
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::VectorXd r = powerflow_residual(sol.state, y);
  sol.residual = r.lpNorm<Eigen::Infinity>();
  while (sol.residual >= tol) {
    if (sol.iterations == max_iter) {
      throw MaxIterationsExceeded("solve_powerflow: no convergence", sol.residual);
    }
    auto jac = powerflow_jacobian(sol.state, y, vars);
    jac.makeCompressed();
    lu.compute(jac);
    if (lu.info() != Eigen::Success) throw SingularJacobian("solve_powerflow: singular Jacobian");
    const Eigen::VectorXd dx = lu.solve(-r);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      component(sol.state, vars[i]) += dx(static_cast<Eigen::Index>(i));
    }
    r = powerflow_residual(sol.state, y);
    sol.residual = r.lpNorm<Eigen::Infinity>();
    ++sol.iterations;
  }
  return sol;
}

double plant_gas_offtake(const GasPowerPlant& plant, double power) { return plant.offtake(power); }

}  // namespace gaspower::power
