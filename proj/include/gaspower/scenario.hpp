#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gaspower/model.hpp"

namespace gaspower {

/// Piecewise-linear series over time in hours, held constant outside its breakpoints.
class TimeSeries {
 public:
  TimeSeries() = default;
  /// Breakpoints (t_hours, value); times must be strictly increasing.
  explicit TimeSeries(std::vector<std::pair<double, double>> points);
  static TimeSeries constant(double value) { return TimeSeries({{0.0, value}}); }

  double at(double t_hours) const;
  const std::vector<std::pair<double, double>>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  TimeSeries scaled(double factor) const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<std::pair<double, double>> points_;
};

/// Boundary time series keyed by node or bus id. Pressures in Pa, outflows in kg/(m^2 s)
/// relative to the node's reference area, electrical data in p.u.
struct BoundaryData {
  std::map<std::string, TimeSeries> pressure;
  std::map<std::string, TimeSeries> outflow;
  std::map<std::string, TimeSeries> V;
  std::map<std::string, TimeSeries> phi;
  std::map<std::string, TimeSeries> P;
  std::map<std::string, TimeSeries> Q;

  friend bool operator==(const BoundaryData&, const BoundaryData&) = default;
};

/// Boundary values at one instant, aligned with the network's node and bus order.
///
/// node[i] is the pressure of a pressure-boundary node or the outflow of a flow-boundary node.
/// bus[k] holds the two fixed quantities of the bus: (V, phi) at the slack bus, (P, V) at
/// generator busses and (P, Q) at load busses.
struct BoundaryValues {
  std::vector<double> node;
  std::vector<std::array<double, 2>> bus;
};

/// Boundary data resolved against a network. Construction fails with InputError if a node or
/// bus lacks a series required by its kind.
class BoundarySchedule {
 public:
  BoundarySchedule(const Network& network, const BoundaryData& data);
  BoundaryValues at(double t_hours) const;

 private:
  std::vector<const TimeSeries*> node_;
  std::vector<std::array<const TimeSeries*, 2>> bus_;
  BoundaryData data_;
};

struct NewtonSettings {
  double tol = 1e-9;         ///< max-norm of the scaled residual
  double steady_tol = 1e-11;
  int max_iter = 25;
  int max_halvings = 30;
  friend bool operator==(const NewtonSettings&, const NewtonSettings&) = default;
};

struct OptimizerSettings {
  double mu0 = 1e2;
  double mu_factor = 0.2;
  double mu_min = 1e-4;
  double tol = 1e-4;  ///< inner gradient max-norm, scaled objective per bar
  int max_outer = 30;
  int max_inner = 300;
  int lbfgs_memory = 8;
  double feasibility_tol_bar = 1e-3;
  double start_step_bar = 0.5;
  double start_margin_bar = 0.1;
  double objective_scale = 1.0 / 3600.0;  ///< cost-seconds to cost-hours
  friend bool operator==(const OptimizerSettings&, const OptimizerSettings&) = default;
};

/// Lower and upper bound of every control value, Pa.
struct ControlBounds {
  double min = 0.0;
  double max = 30e5;
  friend bool operator==(const ControlBounds&, const ControlBounds&) = default;
};

struct Scenario {
  double horizon_hours = 12.0;
  double dt_minutes = 15.0;
  BoundaryData boundary;
  std::map<std::string, double> pressure_bounds;  ///< node id -> minimum pressure, Pa
  ControlBounds control_bounds;
  OptimizerSettings optimizer;
  NewtonSettings newton;

  std::size_t steps() const;
  double dt_seconds() const { return dt_minutes * 60.0; }
  double time_hours(std::size_t j) const { return static_cast<double>(j) * dt_minutes / 60.0; }
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Reference ratio dt/dx of the design regime (15 min steps on ~1 km cells), s/m.
inline constexpr double kReferenceStepRatio = 900.0 / 1000.0;

/// Human-readable notes for pipes whose dt/dx deviates from kReferenceStepRatio by more than a
/// factor of 10. The box scheme is implicit, so these are advisories, not errors.
std::vector<std::string> step_ratio_advisories(const Network& network, const Scenario& scenario);

/// Checks that bounds reference existing nodes and the time grid is consistent.
void check_scenario(const Network& network, const Scenario& scenario);

}  // namespace gaspower
