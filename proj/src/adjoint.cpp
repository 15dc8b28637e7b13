#include "gaspower/adjoint.hpp"

#include <Eigen/SparseLU>

#include "gaspower/error.hpp"

namespace gaspower {

TrajectoryFunctional TrajectoryFunctional::zero(const Trajectory& trajectory) {
  TrajectoryFunctional f;
  const auto n = trajectory.index->size();
  f.d_state.assign(trajectory.states.size(), Eigen::VectorXd::Zero(n));
  f.d_control = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(trajectory.control.size()));
  return f;
}

TrajectoryFunctional& TrajectoryFunctional::operator+=(const TrajectoryFunctional& other) {
  if (other.d_state.size() != d_state.size() || other.d_control.size() != d_control.size()) {
    throw InputError("functional: size mismatch");
  }
  value += other.value;
  for (std::size_t n = 0; n < d_state.size(); ++n) d_state[n] += other.d_state[n];
  d_control += other.d_control;
  return *this;
}

TrajectoryFunctional& TrajectoryFunctional::operator*=(double factor) {
  value *= factor;
  for (auto& d : d_state) d *= factor;
  d_control *= factor;
  return *this;
}

AdjointState adjoint_sweep(const Simulator& sim, const Trajectory& traj,
                           const std::vector<Eigen::VectorXd>& d_state) {
  const auto& model = sim.model();
  const std::size_t m = traj.steps();
  if (d_state.size() != m + 1) throw InputError("adjoint: need dJ/dy for every time level");

  AdjointState adj;
  adj.xi.resize(m + 1);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  Eigen::SparseMatrix<double> coupling;  // dE_{n+1}/dy_n

  for (std::size_t n = m + 1; n-- > 0;) {
    StepJacobian jac;
    Eigen::SparseMatrix<double> a;
    if (n > 0) {
      jac = model.jacobian(traj.states[n - 1].values, traj.states[n].values, traj.control.at(n),
                           sim.boundary(n), traj.dt);
      a = jac.d_next;
    } else {
      const auto& y0 = traj.states[0].values;
      jac = model.jacobian(y0, y0, traj.control.at(0), sim.boundary(0), traj.dt);
      a = jac.d_next + jac.d_prev;
    }
    Eigen::VectorXd rhs = -d_state[n];
    if (n < m) rhs -= coupling.transpose() * adj.xi[n + 1];

    a.makeCompressed();
    // The steady block (n = 0) is analyzed separately from the step blocks.
    if (!analyzed || n == 0) {
      lu.analyzePattern(a);
      analyzed = true;
    }
    lu.factorize(a);
    if (lu.info() != Eigen::Success) {
      throw SingularJacobian("adjoint: singular step Jacobian at time level " + std::to_string(n));
    }
    adj.xi[n] = lu.transpose().solve(rhs);
    ++adj.transposed_solves;
    coupling = std::move(jac.d_prev);
  }
  return adj;
}

Eigen::VectorXd total_gradient(const Simulator& sim, const Trajectory& traj,
                               const AdjointState& adj, const Eigen::VectorXd& d_control) {
  const auto& model = sim.model();
  const std::size_t nc = model.compressors();
  const std::size_t m = traj.steps();
  if (adj.xi.size() != m + 1 || static_cast<std::size_t>(d_control.size()) != (m + 1) * nc) {
    throw InputError("total_gradient: size mismatch");
  }
  Eigen::VectorXd grad = d_control;
  for (std::size_t n = 0; n <= m; ++n) {
    const auto& prev = traj.states[n == 0 ? 0 : n - 1].values;
    const auto jac = model.jacobian(prev, traj.states[n].values, traj.control.at(n), sim.boundary(n),
                                    traj.dt);
    const Eigen::VectorXd contrib = jac.d_control.transpose() * adj.xi[n];
    for (std::size_t c = 0; c < nc; ++c) {
      grad(static_cast<Eigen::Index>(n * nc + c)) += contrib(static_cast<Eigen::Index>(c));
    }
  }
  return grad;
}

Eigen::VectorXd adjoint_gradient(const Simulator& sim, const Trajectory& traj,
                                 const TrajectoryFunctional& f) {
  const auto adj = adjoint_sweep(sim, traj, f.d_state);
  return total_gradient(sim, traj, adj, f.d_control);
}

}  // namespace gaspower
