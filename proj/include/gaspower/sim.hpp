#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gaspower/model.hpp"
#include "gaspower/gas.hpp"
#include "gaspower/power.hpp"
#include "gaspower/scenario.hpp"

namespace gaspower {

/// Reference flux used to scale flow-like residual rows and flux unknowns, kg/(m^2 s).
inline constexpr double kReferenceFlux = 100.0;

enum class VariableKind {
  density,
  flux,
  node_pressure,
  compressor_flux,
  voltage,
  phase,
  real_power,
  reactive_power
};

/// Flat numbering of all unknowns of one time level.
///
/// Pipes come first (rho_j, q_j interleaved per grid point), then one pressure per gas node,
/// one flux per compressor and (V, phi, P, Q) per bus. Residual rows use the same layout:
/// a pipe block holds its cell equations followed by the two end-pressure ties.
class VariableIndex {
 public:
  explicit VariableIndex(const Network& network);

  Eigen::Index size() const { return size_; }

  Eigen::Index density(std::size_t pipe, std::size_t point) const {
    return pipe_offset_[pipe] + 2 * static_cast<Eigen::Index>(point);
  }
  Eigen::Index flux(std::size_t pipe, std::size_t point) const { return density(pipe, point) + 1; }
  std::size_t points(std::size_t pipe) const { return points_[pipe]; }
  Eigen::Index node_pressure(std::size_t node) const {
    return node_offset_ + static_cast<Eigen::Index>(node);
  }
  Eigen::Index compressor_flux(std::size_t c) const {
    return compressor_offset_ + static_cast<Eigen::Index>(c);
  }
  Eigen::Index bus(std::size_t b, power::Quantity q) const {
    return bus_offset_ + 4 * static_cast<Eigen::Index>(b) + static_cast<Eigen::Index>(q);
  }

  // Row numbering.
  Eigen::Index cell_row(std::size_t pipe, std::size_t cell, int equation) const {
    return pipe_offset_[pipe] + 2 * static_cast<Eigen::Index>(cell) + equation;
  }
  Eigen::Index pipe_end_row(std::size_t pipe, bool to_end) const {
    return pipe_offset_[pipe] + 2 * static_cast<Eigen::Index>(points_[pipe] - 1) + (to_end ? 1 : 0);
  }
  Eigen::Index node_row(std::size_t node) const { return node_pressure(node); }
  Eigen::Index compressor_row(std::size_t c) const { return compressor_flux(c); }
  Eigen::Index bus_row(std::size_t b, int equation) const {
    return bus_offset_ + 4 * static_cast<Eigen::Index>(b) + equation;
  }

  VariableKind kind(Eigen::Index i) const { return kinds_[static_cast<std::size_t>(i)]; }
  /// Divisor turning the variable into scaled units.
  double scale(Eigen::Index i) const { return scales_[static_cast<std::size_t>(i)]; }
  std::string label(Eigen::Index i) const;

 private:
  Eigen::Index size_ = 0;
  std::vector<Eigen::Index> pipe_offset_;
  std::vector<std::size_t> points_;
  Eigen::Index node_offset_ = 0;
  Eigen::Index compressor_offset_ = 0;
  Eigen::Index bus_offset_ = 0;
  std::vector<VariableKind> kinds_;
  std::vector<double> scales_;
  std::vector<std::string> names_;
};

/// All unknowns of the coupled network at one time level.
struct SystemState {
  std::shared_ptr<const VariableIndex> index;
  Eigen::VectorXd values;

  double operator[](Eigen::Index i) const { return values(i); }
  gas::PipeState pipe(std::size_t pipe) const;
  power::PowerState power(std::size_t buses) const;
};

/// Compressor set points u(t_j) in Pa, one per compressor and time level j = 0..M.
class ControlVector {
 public:
  ControlVector() = default;
  ControlVector(std::size_t time_levels, std::size_t compressors, double value = 0.0)
      : levels_(time_levels), compressors_(compressors), values_(time_levels * compressors, value) {}

  std::size_t time_levels() const { return levels_; }
  std::size_t compressors() const { return compressors_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t j, std::size_t c) { return values_[j * compressors_ + c]; }
  double operator()(std::size_t j, std::size_t c) const { return values_[j * compressors_ + c]; }
  std::span<const double> at(std::size_t j) const {
    return {values_.data() + j * compressors_, compressors_};
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const ControlVector&, const ControlVector&) = default;

 private:
  std::size_t levels_ = 0;
  std::size_t compressors_ = 0;
  std::vector<double> values_;
};

/// Derivatives of one time step's residual E_n(y_{n-1}, y_n, u_n).
struct StepJacobian {
  Eigen::SparseMatrix<double> d_next;     ///< dE_n/dy_n
  Eigen::SparseMatrix<double> d_prev;     ///< dE_n/dy_{n-1}
  Eigen::SparseMatrix<double> d_control;  ///< dE_n/du_n, one column per compressor
};

/// The discretized coupled gas-power equations of one time step.
///
/// Rows are scaled so that one tolerance applies to the mixed-unit system: cell mass rows by
/// dx / (dt q_ref), cell momentum rows by dx / (dt kappa), pressure rows by 1 / kappa, node flow
/// balances by 1 / (A_node q_ref). Electrical rows are in p.u.
class CoupledModel {
 public:
  explicit CoupledModel(Network network);

  const Network& network() const { return network_; }
  const VariableIndex& index() const { return *index_; }
  std::shared_ptr<const VariableIndex> index_ptr() const { return index_; }
  const Admittance& admittance() const { return admittance_; }

  std::size_t compressors() const { return network_.compressors.size(); }
  double node_area(std::size_t node) const { return node_area_[node]; }
  double compressor_area(std::size_t c) const { return compressor_area_[c]; }

  /// Positive densities and voltage magnitudes.
  bool admissible(const Eigen::VectorXd& y) const;

  Eigen::VectorXd residual(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                           std::span<const double> control, const BoundaryValues& boundary,
                           double dt) const;

  StepJacobian jacobian(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                        std::span<const double> control, const BoundaryValues& boundary, double dt,
                        gas::FrictionDerivative mode = gas::FrictionDerivative::exact) const;

  /// Starting point for the steady-state solve.
  Eigen::VectorXd initial_guess(const BoundaryValues& boundary) const;

  /// Mass of gas stored in all pipes, kg.
  double stored_mass(const Eigen::VectorXd& y) const;

  /// Mass flow entering the network at a node from outside (boundary supply minus boundary
  /// withdrawal minus plant offtake), kg/s.
  double node_injection(std::size_t node, const Eigen::VectorXd& y,
                        const BoundaryValues& boundary) const;

  /// |d(stored mass)/dt - net injection| over one step, in units of the reference flux through
  /// the first pipe's cross section.
  double mass_balance_error(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                            const BoundaryValues& boundary, double dt) const;

  /// Max over entries of |a - b| / scale, i.e. the distance in scaled units.
  double scaled_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

 private:
  struct Incidence {
    Eigen::Index variable;
    double coefficient;  // mass flow per unit of the variable, sign = into the node
  };

  Network network_;
  std::shared_ptr<const VariableIndex> index_;
  Admittance admittance_;
  std::vector<double> node_area_;
  std::vector<double> compressor_area_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<std::size_t> pipe_from_, pipe_to_, comp_from_, comp_to_;
  std::vector<std::ptrdiff_t> plant_at_node_;  // -1 if none
  std::vector<std::size_t> plant_bus_;
};

// Free-function forms of the model operations.
Eigen::VectorXd assemble_step_residual(const CoupledModel& model, const SystemState& prev,
                                       const SystemState& next, std::span<const double> control,
                                       const BoundaryValues& boundary, double dt);
StepJacobian assemble_step_jacobian(const CoupledModel& model, const SystemState& prev,
                                    const SystemState& next, std::span<const double> control,
                                    const BoundaryValues& boundary, double dt);

struct NewtonResult {
  Eigen::VectorXd y;
  int iterations = 0;  ///< number of Newton updates applied
  double residual = 0.0;
};

/// Damped Newton for y_n given y_{n-1}; the initial guess defaults to y_{n-1}.
NewtonResult newton_solve_step(const CoupledModel& model, const Eigen::VectorXd& prev,
                               std::span<const double> control, const BoundaryValues& boundary,
                               double dt, const NewtonSettings& settings,
                               const Eigen::VectorXd* guess = nullptr);

/// Time-derivative-free solution: solves E(y, y) = 0 as one nonlinear system.
NewtonResult solve_steady_state(const CoupledModel& model, std::span<const double> control,
                                const BoundaryValues& boundary, double dt,
                                const NewtonSettings& settings,
                                const Eigen::VectorXd* guess = nullptr);

struct Trajectory {
  std::shared_ptr<const VariableIndex> index;
  std::vector<SystemState> states;  ///< t_j = j dt, j = 0..M
  ControlVector control;
  double dt = 0.0;  ///< s
  std::vector<int> newton_iterations;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  double time_hours(std::size_t j) const { return static_cast<double>(j) * dt / 3600.0; }
};

/// Network, scenario and solver settings bound together; all members are immutable.
class Simulator {
 public:
  Simulator(Network network, Scenario scenario);

  const CoupledModel& model() const { return model_; }
  const Network& network() const { return model_.network(); }
  const Scenario& scenario() const { return scenario_; }
  const NewtonSettings& newton() const { return scenario_.newton; }

  std::size_t steps() const { return steps_; }
  double dt() const { return scenario_.dt_seconds(); }
  BoundaryValues boundary(std::size_t j) const { return schedule_.at(scenario_.time_hours(j)); }

  ControlVector zero_control() const { return constant_control(0.0); }
  ControlVector constant_control(double u) const {
    return ControlVector(steps_ + 1, model_.compressors(), u);
  }

  SystemState steady_state(std::span<const double> control) const;
  Trajectory simulate(const ControlVector& control) const;

  /// Same simulator with other Newton settings.
  Simulator with_newton(const NewtonSettings& settings) const;

 private:
  CoupledModel model_;
  Scenario scenario_;
  BoundarySchedule schedule_;
  std::size_t steps_;
};

Trajectory simulate(const Network& network, const Scenario& scenario, const ControlVector& control);

}  // namespace gaspower
