#pragma once

#include "gaspower/model.hpp"
#include "gaspower/scenario.hpp"

namespace gaspower::fixture {

/// Reference density used to turn the volumetric S25 outflow into a mass flux, kg/m^3.
inline constexpr double kReferenceDensity = 0.785;
/// Volumetric outflow at S25, m^3/s.
inline constexpr double kOutflowVolume = 100.0;

/// Six pipes of the GasLib-40 excerpt, compressor S0 -> S17, plant S4 <-> N1 and the
/// nine-bus grid.
Network network();

/// 12 h horizon at 15 min steps, 60 bar at S5, constant outflow at S25, load ramp at N5
/// between 1 h and 1.5 h, lower bound 41 bar at S25.
Scenario scenario();

/// 100 m^3/s at the reference density through a 0.6 m pipe: ~277.64 kg/(m^2 s).
double outflow_flux();

}  // namespace gaspower::fixture
