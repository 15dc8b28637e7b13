#include "gaspower/gas.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gaspower/error.hpp"

namespace gaspower::gas {

namespace {

constexpr double kTwoOverLn10 = 2.0 / std::numbers::ln10;

void require_positive_density(double rho, const char* where) {
  if (!(rho > 0.0)) throw InputError(std::string(where) + ": density must be positive");
}

}  // namespace

double pressure_of_density(double rho, const GasConstants& constants) {
  if (rho < 0.0) throw InputError("pressure_of_density: negative density");
  if (constants.gamma == 1.0) return constants.kappa * rho;
  return constants.kappa * std::pow(rho, constants.gamma);
}

double density_of_pressure(double p, const GasConstants& constants) {
  if (p < 0.0) throw InputError("density_of_pressure: negative pressure");
  if (constants.gamma == 1.0) return p / constants.kappa;
  return std::pow(p / constants.kappa, 1.0 / constants.gamma);
}

double pressure_derivative(double rho, const GasConstants& constants) {
  if (constants.gamma == 1.0) return constants.kappa;
  return constants.kappa * constants.gamma * std::pow(rho, constants.gamma - 1.0);
}

double reynolds(double q, double diameter, double eta) { return diameter * std::abs(q) / eta; }

double rough_friction_factor(double diameter, double roughness) {
  const double x = -2.0 * std::log10(roughness / (3.71 * diameter));
  return 1.0 / (x * x);
}

FrictionFactor friction(double q, double diameter, double roughness, double eta) {
  if (!(diameter > 0.0)) throw InputError("friction: diameter must be positive");
  if (!(roughness >= 0.0)) throw InputError("friction: roughness must be non-negative");

  const double re = reynolds(q, diameter, eta);
  const double rel = roughness / (3.71 * diameter);
  if (re < kRoughLimitReynolds) return {rough_friction_factor(diameter, roughness), 0.0, 0};

  // x = 1/sqrt(lambda) is a fixed point of g(x) = -2 log10(2.51 x / Re + rel). The update
  // x += w (g(x) - x) is damped with w = 1 / (1 - g'(x)), which lies in (0, 1] since g' < 0.
  const double b = 2.51 / re;
  double x = rel > 0.0 ? -2.0 * std::log10(rel) : 8.0;
  int it = 0;
  for (; it < kColebrookMaxIterations; ++it) {
    const double arg = b * x + rel;
    const double g = -2.0 * std::log10(arg);
    const double slope = -kTwoOverLn10 * b / arg;
    const double step = (g - x) / (1.0 - slope);
    x += step;
    if (std::abs(step) <= kColebrookTolerance * std::max(1.0, std::abs(x))) break;
  }
  if (it == kColebrookMaxIterations || !std::isfinite(x) || x <= 0.0) {
    throw SolverError("friction: Colebrook iteration did not converge");
  }

  // Implicit derivative of F(x, Re) = x + 2 log10(2.51 x / Re + rel) = 0.
  const double arg = b * x + rel;
  const double f_x = 1.0 + kTwoOverLn10 * b / arg;
  const double f_re = -kTwoOverLn10 * b * x / (re * arg);
  const double dx_dre = -f_re / f_x;
  const double lambda = 1.0 / (x * x);
  const double dlambda_dre = -2.0 * lambda / x * dx_dre;
  const double sign = q > 0.0 ? 1.0 : -1.0;
  return {lambda, dlambda_dre * diameter / eta * sign, it + 1};
}

double source_term(double rho, double q, const Pipe& pipe, const GasConstants& constants) {
  require_positive_density(rho, "source_term");
  const double lambda = friction_factor(q, pipe.diameter, pipe.roughness, constants.eta);
  return -lambda / (2.0 * pipe.diameter) * q * std::abs(q) / rho;
}

std::array<double, 2> flux(double rho, double q, const GasConstants& constants) {
  require_positive_density(rho, "flux");
  return {q, pressure_of_density(rho, constants) + q * q / rho};
}

PointTerms point_terms(double rho, double q, const Pipe& pipe, const GasConstants& constants,
                       FrictionDerivative mode) {
  require_positive_density(rho, "point_terms");
  PointTerms t;
  const double q_over_rho = q / rho;
  t.flux = pressure_of_density(rho, constants) + q * q_over_rho;
  t.flux_d_rho = pressure_derivative(rho, constants) - q_over_rho * q_over_rho;
  t.flux_d_q = 2.0 * q_over_rho;

  const auto f = friction(q, pipe.diameter, pipe.roughness, constants.eta);
  const double c = 1.0 / (2.0 * pipe.diameter);
  const double qq = q * std::abs(q);
  t.source = -f.lambda * c * qq / rho;
  t.source_d_rho = f.lambda * c * qq / (rho * rho);
  const double dlambda = mode == FrictionDerivative::exact ? f.d_lambda_d_q : 0.0;
  t.source_d_q = -c / rho * (dlambda * qq + f.lambda * 2.0 * std::abs(q));
  return t;
}

PipeState uniform_state(const Pipe& pipe, double rho, double q) {
  const auto n = static_cast<std::size_t>(pipe.cell_count) + 1;
  return {std::vector<double>(n, rho), std::vector<double>(n, q)};
}

CellResidual box_cell(double rho_prev_a, double q_prev_a, double rho_prev_b, double q_prev_b,
                      double rho_next_a, double q_next_a, double rho_next_b, double q_next_b,
                      const PointTerms& next_a, const PointTerms& next_b, double dt, double dx) {
  const double r = dt / dx;
  CellResidual c;
  c.value[0] = 0.5 * (rho_next_a + rho_next_b - rho_prev_a - rho_prev_b) + r * (q_next_b - q_next_a);
  c.value[1] = 0.5 * (q_next_a + q_next_b - q_prev_a - q_prev_b) + r * (next_b.flux - next_a.flux) -
               0.5 * dt * (next_b.source + next_a.source);

  c.d_next[0] = {0.5, -r, 0.5, r};
  c.d_next[1] = {-r * next_a.flux_d_rho - 0.5 * dt * next_a.source_d_rho,
                 0.5 - r * next_a.flux_d_q - 0.5 * dt * next_a.source_d_q,
                 r * next_b.flux_d_rho - 0.5 * dt * next_b.source_d_rho,
                 0.5 + r * next_b.flux_d_q - 0.5 * dt * next_b.source_d_q};
  c.d_prev[0] = {-0.5, 0.0, -0.5, 0.0};
  c.d_prev[1] = {0.0, -0.5, 0.0, -0.5};
  return c;
}

namespace {

void check_states(const PipeState& prev, const PipeState& next, double dt, double dx) {
  if (prev.rho.size() != prev.q.size() || next.rho.size() != next.q.size() ||
      prev.points() != next.points() || prev.points() < 2) {
    throw InputError("box scheme: pipe states have mismatched lengths");
  }
  if (!(dt > 0.0) || !(dx > 0.0)) throw InputError("box scheme: dt and dx must be positive");
}

std::vector<PointTerms> all_point_terms(const PipeState& s, const Pipe& pipe,
                                        const GasConstants& constants, FrictionDerivative mode) {
  std::vector<PointTerms> terms;
  terms.reserve(s.points());
  for (std::size_t j = 0; j < s.points(); ++j) {
    terms.push_back(point_terms(s.rho[j], s.q[j], pipe, constants, mode));
  }
  return terms;
}

}  // namespace

std::vector<double> box_scheme_residual(const PipeState& prev, const PipeState& next,
                                        const Pipe& pipe, const GasConstants& constants,
                                        double dt, double dx) {
  check_states(prev, next, dt, dx);
  const auto terms = all_point_terms(next, pipe, constants, FrictionDerivative::exact);
  std::vector<double> out;
  out.reserve(2 * (next.points() - 1));
  for (std::size_t j = 1; j < next.points(); ++j) {
    const auto c = box_cell(prev.rho[j - 1], prev.q[j - 1], prev.rho[j], prev.q[j],
                            next.rho[j - 1], next.q[j - 1], next.rho[j], next.q[j],
                            terms[j - 1], terms[j], dt, dx);
    out.push_back(c.value[0]);
    out.push_back(c.value[1]);
  }
  return out;
}

BoxSchemeJacobian box_scheme_jacobian(const PipeState& prev, const PipeState& next,
                                      const Pipe& pipe, const GasConstants& constants, double dt,
                                      double dx, FrictionDerivative mode) {
  check_states(prev, next, dt, dx);
  const auto terms = all_point_terms(next, pipe, constants, mode);
  const auto cells = static_cast<Eigen::Index>(next.points() - 1);
  std::vector<Eigen::Triplet<double>> tn, tp;
  for (Eigen::Index j = 1; j <= cells; ++j) {
    const auto a = static_cast<std::size_t>(j - 1);
    const auto b = static_cast<std::size_t>(j);
    const auto c = box_cell(prev.rho[a], prev.q[a], prev.rho[b], prev.q[b], next.rho[a], next.q[a],
                            next.rho[b], next.q[b], terms[a], terms[b], dt, dx);
    for (int row = 0; row < 2; ++row) {
      const Eigen::Index r = 2 * (j - 1) + row;
      for (int col = 0; col < 4; ++col) {
        const Eigen::Index k = 2 * (j - 1) + col;
        if (c.d_next[row][col] != 0.0) tn.emplace_back(r, k, c.d_next[row][col]);
        if (c.d_prev[row][col] != 0.0) tp.emplace_back(r, k, c.d_prev[row][col]);
      }
    }
  }
  BoxSchemeJacobian jac;
  jac.d_next.resize(2 * cells, 2 * (cells + 1));
  jac.d_prev.resize(2 * cells, 2 * (cells + 1));
  jac.d_next.setFromTriplets(tn.begin(), tn.end());
  jac.d_prev.setFromTriplets(tp.begin(), tp.end());
  return jac;
}

}  // namespace gaspower::gas
