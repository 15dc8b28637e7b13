#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gaspower/sim.hpp"

namespace gaspower {

/// A scalar functional of a trajectory with its partial derivatives.
struct TrajectoryFunctional {
  double value = 0.0;
  std::vector<Eigen::VectorXd> d_state;  ///< dJ/dy_n for n = 0..M
  Eigen::VectorXd d_control;             ///< dJ/du, layout of ControlVector::values()

  static TrajectoryFunctional zero(const Trajectory& trajectory);
  TrajectoryFunctional& operator+=(const TrajectoryFunctional& other);
  TrajectoryFunctional& operator*=(double factor);
};

/// Adjoint states xi_n, n = 0..M.
///
/// xi_0 belongs to the steady-state equations that define the initial state, so the gradient
/// with respect to u_0 includes its effect on the initial state.
struct AdjointState {
  std::vector<Eigen::VectorXd> xi;
  std::size_t transposed_solves = 0;
};

/// Backward sweep over the block lower-bidiagonal model equations:
/// (dE_n/dy_n)^T xi_n = -(dJ/dy_n)^T - (dE_{n+1}/dy_n)^T xi_{n+1}, n = M .. 0.
AdjointState adjoint_sweep(const Simulator& sim, const Trajectory& trajectory,
                           const std::vector<Eigen::VectorXd>& d_state);

/// dJ/du = dJ/du (partial) + xi^T dE/du, one entry per control value.
Eigen::VectorXd total_gradient(const Simulator& sim, const Trajectory& trajectory,
                               const AdjointState& adjoint, const Eigen::VectorXd& d_control);

/// adjoint_sweep followed by total_gradient.
Eigen::VectorXd adjoint_gradient(const Simulator& sim, const Trajectory& trajectory,
                                 const TrajectoryFunctional& functional);

}  // namespace gaspower
