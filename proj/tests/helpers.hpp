#pragma once

#include <cmath>
#include <string>
#include <tuple>

#include "gaspower/model.hpp"
#include "gaspower/scenario.hpp"

namespace gaspower::test {

inline constexpr double kBar = 1e5;

/// in (pressure boundary) --P1--> out (flow boundary); no power grid.
inline Network single_pipe(double length = 2000.0, int cells = 2) {
  Network n;
  n.gas_nodes = {{"in", NodeKind::pressure_boundary}, {"out", NodeKind::flow_boundary}};
  Pipe p;
  p.id = "P1";
  p.from_node = "in";
  p.to_node = "out";
  p.length = length;
  p.cell_count = cells;
  n.pipes = {p};
  return n;
}

/// in --P1--> a ==C1==> b --P2--> out; no power grid.
inline Network compressor_line(double length = 3000.0, int cells = 3) {
  Network n;
  n.gas_nodes = {{"in", NodeKind::pressure_boundary},
                 {"a", NodeKind::junction},
                 {"b", NodeKind::junction},
                 {"out", NodeKind::flow_boundary}};
  for (const auto& [id, from, to] :
       {std::tuple{"P1", "in", "a"}, std::tuple{"P2", "b", "out"}}) {
    Pipe p;
    p.id = id;
    p.from_node = from;
    p.to_node = to;
    p.length = length;
    p.cell_count = cells;
    n.pipes.push_back(p);
  }
  n.compressors = {{"C1", "a", "b", CompressorCostModel{}}};
  return n;
}

/// 60 bar at "in"; outflow at "out" ramps from q0 to q1 between 0.25 h and 0.5 h.
inline Scenario toy_scenario(double q0 = 50.0, double q1 = 80.0, double hours = 1.0) {
  Scenario s;
  s.horizon_hours = hours;
  s.dt_minutes = 15.0;
  s.boundary.pressure["in"] = TimeSeries::constant(60.0 * kBar);
  s.boundary.outflow["out"] = TimeSeries({{0.25, q0}, {0.5, q1}});
  return s;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace gaspower::test
