#include "gaspower/compressor.hpp"

#include <cmath>

#include "gaspower/error.hpp"

namespace gaspower {

namespace {

void check_operating_point(double p_in, double p_out, double q) {
  if (!(p_in > 0.0)) throw OperatingRangeError("compressor: inlet pressure must be positive");
  if (p_out < p_in * (1.0 - kRatioSlack)) {
    throw OperatingRangeError("compressor: outlet pressure below inlet pressure (compressor only boosts)");
  }
  if (q < 0.0) throw OperatingRangeError("compressor: reverse flow through an active compressor");
}

}  // namespace

double shaft_power(double p_in, double p_out, double q, double area, double sound_speed_sq) {
  check_operating_point(p_in, p_out, q);
  return q * area * sound_speed_sq * std::log(p_out / p_in);
}

ShaftPowerPartials shaft_power_partials(double p_in, double p_out, double q, double area,
                                        double sound_speed_sq) {
  check_operating_point(p_in, p_out, q);
  const double m = q * area * sound_speed_sq;
  const double ln = std::log(p_out / p_in);
  return {m * ln, -m / p_in, m / p_out, area * sound_speed_sq * ln};
}

double cost_integrand(double p_in, double p_out, double q, double area, double sound_speed_sq,
                      const CompressorCostModel& model, bool active) {
  return cost_integrand_partials(p_in, p_out, q, area, sound_speed_sq, model, active).value;
}

ShaftPowerPartials cost_integrand_partials(double p_in, double p_out, double q, double area,
                                           double sound_speed_sq, const CompressorCostModel& model,
                                           bool active) {
  const auto w = shaft_power_partials(p_in, p_out, q, area, sound_speed_sq);
  const double mw = w.value * 1e-6;
  const double dc_dmw = model.d1 + 2.0 * model.d2 * mw;
  const double s = dc_dmw * 1e-6;
  return {(active ? model.d0 : 0.0) + model.d1 * mw + model.d2 * mw * mw, s * w.d_p_in,
          s * w.d_p_out, s * w.d_q};
}

}  // namespace gaspower
