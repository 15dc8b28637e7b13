#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/SparseCore>

#include "gaspower/model.hpp"

namespace gaspower::gas {

/// Below this Reynolds number the Colebrook equation is replaced by its fully rough limit.
inline constexpr double kRoughLimitReynolds = 100.0;
inline constexpr double kColebrookTolerance = 1e-13;
inline constexpr int kColebrookMaxIterations = 100;

double pressure_of_density(double rho, const GasConstants& constants);
double density_of_pressure(double p, const GasConstants& constants);
/// dp/drho.
double pressure_derivative(double rho, const GasConstants& constants);

double reynolds(double q, double diameter, double eta);

/// Friction factor of the fully rough limit: 1/sqrt(lambda) = -2 log10(k / (3.71 d)).
double rough_friction_factor(double diameter, double roughness);

struct FrictionFactor {
  double lambda = 0.0;
  double d_lambda_d_q = 0.0;  ///< implicit derivative through the Colebrook equation
  int iterations = 0;
};

/// Solves the Prandtl-Colebrook equation for lambda(q).
FrictionFactor friction(double q, double diameter, double roughness, double eta);

inline double friction_factor(double q, double diameter, double roughness, double eta) {
  return friction(q, diameter, roughness, eta).lambda;
}

/// How the friction factor enters Jacobians.
enum class FrictionDerivative { exact, frozen };

/// Momentum source S = -lambda(q) / (2 d) * q |q| / rho.
double source_term(double rho, double q, const Pipe& pipe, const GasConstants& constants);

/// (q, p(rho) + q^2 / rho)
std::array<double, 2> flux(double rho, double q, const GasConstants& constants);

/// Momentum flux, momentum source and their partial derivatives at one grid point.
struct PointTerms {
  double flux = 0.0;
  double flux_d_rho = 0.0;
  double flux_d_q = 0.0;
  double source = 0.0;
  double source_d_rho = 0.0;
  double source_d_q = 0.0;
};

PointTerms point_terms(double rho, double q, const Pipe& pipe, const GasConstants& constants,
                       FrictionDerivative mode = FrictionDerivative::exact);

/// Densities and flows at the cell_count + 1 grid points of one pipe.
struct PipeState {
  std::vector<double> rho;
  std::vector<double> q;

  std::size_t points() const { return rho.size(); }
};

PipeState uniform_state(const Pipe& pipe, double rho, double q);

/// Residuals of one box-scheme cell between grid points j-1 (a) and j (b).
///
/// Row 0 is the mass equation, row 1 the momentum equation. Jacobian columns are ordered
/// (rho_a, q_a, rho_b, q_b).
struct CellResidual {
  std::array<double, 2> value{};
  std::array<std::array<double, 4>, 2> d_next{};
  std::array<std::array<double, 4>, 2> d_prev{};
};

/// Evaluates one cell given point terms of the new time level.
CellResidual box_cell(double rho_prev_a, double q_prev_a, double rho_prev_b, double q_prev_b,
                      double rho_next_a, double q_next_a, double rho_next_b, double q_next_b,
                      const PointTerms& next_a, const PointTerms& next_b, double dt, double dx);

/// Residual of the implicit box scheme on one pipe, two entries (mass, momentum) per cell.
std::vector<double> box_scheme_residual(const PipeState& prev, const PipeState& next,
                                        const Pipe& pipe, const GasConstants& constants,
                                        double dt, double dx);

/// Derivatives of box_scheme_residual. Columns follow the layout (rho_0, q_0, rho_1, q_1, ...).
struct BoxSchemeJacobian {
  Eigen::SparseMatrix<double> d_next;
  Eigen::SparseMatrix<double> d_prev;
};

BoxSchemeJacobian box_scheme_jacobian(const PipeState& prev, const PipeState& next,
                                      const Pipe& pipe, const GasConstants& constants, double dt,
                                      double dx,
                                      FrictionDerivative mode = FrictionDerivative::exact);

}  // namespace gaspower::gas
