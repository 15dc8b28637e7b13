#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gaspower/model.hpp"

namespace gaspower::power {

/// Per-bus voltage magnitude and phase with real and reactive injection, all p.u.
struct PowerState {
  Eigen::VectorXd V;
  Eigen::VectorXd phi;
  Eigen::VectorXd P;
  Eigen::VectorXd Q;

  Eigen::Index size() const { return V.size(); }
  static PowerState flat(Eigen::Index buses);
};

enum class Quantity { V = 0, phi = 1, P = 2, Q = 3 };

struct Variable {
  Eigen::Index bus = 0;
  Quantity quantity = Quantity::V;
  friend bool operator==(const Variable&, const Variable&) = default;
};

/// Position of a variable in the packed layout (V, phi, P, Q per bus).
inline Eigen::Index packed_column(Variable v) {
  return 4 * v.bus + static_cast<Eigen::Index>(v.quantity);
}

/// Residual entries (2k, 2k+1) are P_k and Q_k minus the injections computed from V and phi.
Eigen::VectorXd powerflow_residual(const PowerState& state, const Admittance& admittance);

/// Derivatives w.r.t. all 4N variables in packed layout.
Eigen::SparseMatrix<double> powerflow_jacobian(const PowerState& state,
                                               const Admittance& admittance);

/// Derivatives w.r.t. the listed variables only; column i belongs to columns[i].
Eigen::SparseMatrix<double> powerflow_jacobian(const PowerState& state,
                                               const Admittance& admittance,
                                               const std::vector<Variable>& columns);

/// Unknowns left free by the bus classification: phi at non-slack busses, V at load busses,
/// P and Q at the slack bus, Q at generator busses.
std::vector<Variable> free_variables(const std::vector<Bus>& busses);

struct PowerflowSolution {
  PowerState state;
  int iterations = 0;
  double residual = 0.0;
};

/// Newton solve of the powerflow equations; fixed data is taken from `initial`.
PowerflowSolution solve_powerflow(const Network& network, const PowerState& initial,
                                  double tol = 1e-12, int max_iter = 30);

double plant_gas_offtake(const GasPowerPlant& plant, double power);

}  // namespace gaspower::power
