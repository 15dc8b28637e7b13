#pragma once

namespace gaspower {

/// Quadratic cost in compressor shaft power (MW): d0*[u > 0] + d1*P + d2*P^2.
struct CompressorCostModel {
  double d0 = 0.0;
  double d1 = 1.0;
  double d2 = 0.01;

  friend bool operator==(const CompressorCostModel&, const CompressorCostModel&) = default;
};

/// Shaft power of isothermal compression in W.
///
/// Work per unit mass is c^2 ln(p_out/p_in); the mass flow is q * area. The compressor
/// only boosts, so p_out below p_in (beyond a relative slack of kRatioSlack that absorbs
/// solver roundoff) and reverse flow are rejected.
double shaft_power(double p_in, double p_out, double q, double area, double sound_speed_sq);

struct ShaftPowerPartials {
  double value = 0.0;
  double d_p_in = 0.0;
  double d_p_out = 0.0;
  double d_q = 0.0;
};

ShaftPowerPartials shaft_power_partials(double p_in, double p_out, double q, double area,
                                        double sound_speed_sq);

/// Cost rate (cost units per second) for the given operating point. `active` selects the
/// fixed-on cost d0 and corresponds to u > 0.
double cost_integrand(double p_in, double p_out, double q, double area, double sound_speed_sq,
                      const CompressorCostModel& model, bool active);

/// Same as cost_integrand, with partial derivatives w.r.t. p_in, p_out and q.
ShaftPowerPartials cost_integrand_partials(double p_in, double p_out, double q, double area,
                                           double sound_speed_sq, const CompressorCostModel& model,
                                           bool active);

inline constexpr double kRatioSlack = 1e-9;

}  // namespace gaspower
