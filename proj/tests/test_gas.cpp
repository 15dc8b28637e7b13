#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "gaspower/error.hpp"
#include "gaspower/gas.hpp"
#include "gaspower/sim.hpp"
#include "helpers.hpp"

using namespace gaspower;
using namespace gaspower::gas;

namespace {

const GasConstants kGas{};

Pipe test_pipe(int cells = 4, double length = 4000.0) {
  Pipe p;
  p.id = "P";
  p.from_node = "a";
  p.to_node = "b";
  p.length = length;
  p.cell_count = cells;
  return p;
}

// Colebrook equation written in lambda, independent of the implementation's x-form.
double colebrook_residual(double lambda, double re, double d, double k) {
  return 1.0 / std::sqrt(lambda) + 2.0 * std::log10(2.51 / (re * std::sqrt(lambda)) + k / (3.71 * d));
}

double colebrook_bisection(double re, double d, double k) {
  double lo = 1e-4, hi = 1.0;  // residual > 0 at lo, < 0 at hi
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (colebrook_residual(mid, re, d, k) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> pack(const PipeState& s) {
  std::vector<double> v;
  for (std::size_t i = 0; i < s.points(); ++i) {
    v.push_back(s.rho[i]);
    v.push_back(s.q[i]);
  }
  return v;
}

PipeState unpack(const std::vector<double>& v) {
  PipeState s;
  for (std::size_t i = 0; i < v.size(); i += 2) {
    s.rho.push_back(v[i]);
    s.q.push_back(v[i + 1]);
  }
  return s;
}

// Central differences of the box residual w.r.t. the next (or previous) state.
Eigen::MatrixXd fd_jacobian(const PipeState& prev, const PipeState& next, const Pipe& pipe,
                            double dt, double dx, bool wrt_next) {
  const auto base = pack(wrt_next ? next : prev);
  const auto rows = box_scheme_residual(prev, next, pipe, kGas, dt, dx).size();
  Eigen::MatrixXd fd(rows, base.size());
  for (std::size_t c = 0; c < base.size(); ++c) {
    const double h = 1e-4 * std::max(1.0, std::abs(base[c]));
    auto plus = base, minus = base;
    plus[c] += h;
    minus[c] -= h;
    const auto rp = wrt_next ? box_scheme_residual(prev, unpack(plus), pipe, kGas, dt, dx)
                             : box_scheme_residual(unpack(plus), next, pipe, kGas, dt, dx);
    const auto rm = wrt_next ? box_scheme_residual(prev, unpack(minus), pipe, kGas, dt, dx)
                             : box_scheme_residual(unpack(minus), next, pipe, kGas, dt, dx);
    for (std::size_t r = 0; r < rows; ++r) fd(r, c) = (rp[r] - rm[r]) / (2.0 * h);
  }
  return fd;
}

double max_rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(GasLaw, ExampleValues) {
  EXPECT_EQ(pressure_of_density(0.0, kGas), 0.0);
  EXPECT_NEAR(pressure_of_density(0.785, kGas), 90746.0, 1e-9 * 90746.0);
  EXPECT_NEAR(pressure_of_density(51.903, kGas), 6.0e6, 1e-4 * 6.0e6);
  EXPECT_EQ(density_of_pressure(0.0, kGas), 0.0);
  EXPECT_NEAR(density_of_pressure(6e6, kGas), 51.9031142, 1e-6);
  EXPECT_NEAR(density_of_pressure(4.1e6, kGas), 35.4671280, 1e-6);
  EXPECT_EQ(pressure_derivative(20.0, kGas), kGas.kappa);
}

TEST(GasLaw, RoundTripOverOperatingRange) {
  for (double gamma : {1.0, 1.3}) {
    GasConstants g = kGas;
    g.gamma = gamma;
    for (double p = 1e4; p <= 1e7; p *= 1.37) {
      EXPECT_NEAR(pressure_of_density(density_of_pressure(p, g), g), p, 1e-12 * p) << gamma;
    }
  }
}

TEST(GasLaw, NegativeInputsThrow) {
  EXPECT_THROW(pressure_of_density(-1.0, kGas), InputError);
  EXPECT_THROW(density_of_pressure(-1.0, kGas), InputError);
  EXPECT_THROW(flux(0.0, 1.0, kGas), InputError);
  EXPECT_THROW(source_term(-1.0, 1.0, test_pipe(), kGas), InputError);
}

TEST(Friction, StagnantFlowUsesRoughLimit) {
  const double oracle = std::pow(2.0 * std::log10(3.71 * 0.6 / 5e-4), -2.0);
  EXPECT_NEAR(friction_factor(0.0, 0.6, 5e-4, 1e-5), oracle, 1e-14);
  EXPECT_NEAR(friction_factor(0.0, 0.6, 5e-4, 1e-5), 0.018778, 5e-6);
  EXPECT_EQ(friction(0.0, 0.6, 5e-4, 1e-5).d_lambda_d_q, 0.0);
}

TEST(Friction, HighReynoldsIsCloseToRoughLimit) {
  EXPECT_NEAR(reynolds(277.64, 0.6, 1e-5), 1.666e7, 1e4);
  const double lambda = friction_factor(277.64, 0.6, 5e-4, 1e-5);
  const double rough = rough_friction_factor(0.6, 5e-4);
  EXPECT_GT(lambda, rough);
  EXPECT_LT(test::rel_diff(lambda, rough), 5e-3);
  EXPECT_NEAR(lambda, 0.01879, 5e-5);
}

TEST(Friction, MatchesBisectionOracle) {
  const double re = reynolds(100.0, 0.6, 1e-5);
  const auto f = friction(100.0, 0.6, 5e-4, 1e-5);
  EXPECT_LT(std::abs(colebrook_residual(f.lambda, re, 0.6, 5e-4)), 1e-12);
  EXPECT_NEAR(f.lambda, colebrook_bisection(re, 0.6, 5e-4), 1e-12);
}

TEST(Friction, PositiveAndBelowOneAcrossRange) {
  for (double q = -1000.0; q <= 1000.0; q += 7.3) {
    for (double k : {0.0, 1e-5, 5e-4, 5e-3}) {
      const double lambda = friction_factor(q, 0.6, k, 1e-5);
      EXPECT_GT(lambda, 0.0);
      EXPECT_LT(lambda, 1.0);
    }
  }
}

TEST(Friction, DerivativeMatchesFiniteDifferences) {
  for (double q : {0.5, 3.0, 40.0, 277.64, -120.0}) {
    const double h = 1e-6 * std::abs(q);
    const double fd = (friction_factor(q + h, 0.6, 5e-4, 1e-5) -
                       friction_factor(q - h, 0.6, 5e-4, 1e-5)) / (2.0 * h);
    const double exact = friction(q, 0.6, 5e-4, 1e-5).d_lambda_d_q;
    EXPECT_NEAR(exact, fd, 1e-6 * std::abs(fd) + 1e-14) << q;
  }
}

TEST(Friction, EvenInFlowDirection) {
  for (double q : {0.5, 10.0, 277.64}) {
    EXPECT_EQ(friction_factor(q, 0.6, 5e-4, 1e-5), friction_factor(-q, 0.6, 5e-4, 1e-5));
  }
}

TEST(SourceTerm, SignSymmetryAndValue) {
  const auto pipe = test_pipe();
  EXPECT_EQ(source_term(51.9, 0.0, pipe, kGas), 0.0);
  const double s = source_term(51.9, 277.64, pipe, kGas);
  EXPECT_LT(s, 0.0);
  EXPECT_EQ(source_term(51.9, -277.64, pipe, kGas), -s);
  const double lambda = friction_factor(277.64, 0.6, 5e-4, 1e-5);
  EXPECT_NEAR(s, -lambda / 1.2 * 277.64 * 277.64 / 51.9, 1e-12 * std::abs(s));
}

TEST(Flux, ExampleValues) {
  const auto stagnant = flux(1.0, 0.0, kGas);
  EXPECT_EQ(stagnant[0], 0.0);
  EXPECT_EQ(stagnant[1], kGas.kappa);
  const auto moving = flux(51.903, 277.64, kGas);
  EXPECT_EQ(moving[0], 277.64);
  EXPECT_NEAR(moving[1], 6.0015e6, 1e2);
}

TEST(BoxScheme, StagnantStateHasZeroResidual) {
  const auto pipe = test_pipe();
  const auto s = uniform_state(pipe, 51.9, 0.0);
  const auto r = box_scheme_residual(s, s, pipe, kGas, 900.0, pipe.cell_length());
  ASSERT_EQ(r.size(), 2u * static_cast<std::size_t>(pipe.cell_count));
  for (double v : r) EXPECT_EQ(v, 0.0);
}

TEST(BoxScheme, SteadyFlowingProfileHasZeroMassResidual) {
  Simulator sim(test::single_pipe(4000.0, 4), test::toy_scenario(120.0, 120.0));
  const auto steady = sim.steady_state(sim.zero_control().at(0));
  const auto profile = steady.pipe(0);
  const auto& pipe = sim.network().pipes[0];
  EXPECT_GT(profile.q[0], 100.0);
  const auto r = box_scheme_residual(profile, profile, pipe, kGas, sim.dt(), pipe.cell_length());
  const double r_ratio = sim.dt() / pipe.cell_length();
  for (std::size_t i = 0; i < r.size(); i += 2) {
    EXPECT_LT(std::abs(r[i]), 1e-9 * r_ratio * kReferenceFlux) << i;
  }
  for (std::size_t i = 1; i < profile.points(); ++i) {
    EXPECT_LT(profile.rho[i], profile.rho[i - 1]);
  }
}

TEST(BoxScheme, MassRowsTelescope) {
  // Sum of the cell mass rows is the trapezoid change of stored mass plus the boundary flux
  // difference.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> rho(30.0, 60.0), q(-300.0, 300.0);
  const auto pipe = test_pipe(6, 6000.0);
  const double dt = 900.0, dx = pipe.cell_length(), r = dt / dx;
  for (int trial = 0; trial < 20; ++trial) {
    PipeState prev = uniform_state(pipe, 0.0, 0.0), next = prev;
    for (std::size_t i = 0; i < prev.points(); ++i) {
      prev.rho[i] = rho(rng), prev.q[i] = q(rng);
      next.rho[i] = rho(rng), next.q[i] = q(rng);
    }
    const auto res = box_scheme_residual(prev, next, pipe, kGas, dt, dx);
    double sum = 0.0;
    for (std::size_t i = 0; i < res.size(); i += 2) sum += res[i];
    const std::size_t n = prev.points() - 1;
    double expected = 0.5 * (next.rho[0] - prev.rho[0] + next.rho[n] - prev.rho[n]) +
                      r * (next.q[n] - next.q[0]);
    for (std::size_t i = 1; i < n; ++i) expected += next.rho[i] - prev.rho[i];
    EXPECT_NEAR(sum, expected, 1e-9 * (1.0 + std::abs(expected)));
  }
}

TEST(BoxScheme, JacobianMatchesFiniteDifferencesAtStagnantState) {
  const auto pipe = test_pipe();
  const auto s = uniform_state(pipe, 51.9, 0.0);
  const auto jac = box_scheme_jacobian(s, s, pipe, kGas, 900.0, pipe.cell_length());
  const Eigen::MatrixXd d_next(jac.d_next), d_prev(jac.d_prev);
  EXPECT_LT(max_rel_error(d_next, fd_jacobian(s, s, pipe, 900.0, pipe.cell_length(), true)), 1e-6);
  EXPECT_LT(max_rel_error(d_prev, fd_jacobian(s, s, pipe, 900.0, pipe.cell_length(), false)), 1e-6);
}

TEST(BoxScheme, JacobianMatchesFiniteDifferencesAtRandomStates) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> rho(30.0, 60.0), q(20.0, 400.0), sign(-1.0, 1.0);
  const auto pipe = test_pipe(5, 5000.0);
  for (int trial = 0; trial < 10; ++trial) {
    PipeState prev = uniform_state(pipe, 0.0, 0.0), next = prev;
    for (std::size_t i = 0; i < prev.points(); ++i) {
      prev.rho[i] = rho(rng), prev.q[i] = q(rng);
      next.rho[i] = rho(rng), next.q[i] = (sign(rng) < 0 ? -1.0 : 1.0) * q(rng);
    }
    const auto jac = box_scheme_jacobian(prev, next, pipe, kGas, 900.0, pipe.cell_length());
    const Eigen::MatrixXd d_next(jac.d_next);
    EXPECT_LT(max_rel_error(d_next, fd_jacobian(prev, next, pipe, 900.0, pipe.cell_length(), true)),
              1e-6);
  }
}

TEST(BoxScheme, JacobianStructure) {
  const auto pipe = test_pipe(5, 5000.0);
  PipeState s = uniform_state(pipe, 45.0, 150.0);
  const auto jac = box_scheme_jacobian(s, s, pipe, kGas, 900.0, pipe.cell_length());
  const Eigen::MatrixXd d_next(jac.d_next), d_prev(jac.d_prev);
  for (Eigen::Index row = 0; row < d_next.rows(); ++row) {
    const Eigen::Index cell = row / 2;
    for (Eigen::Index col = 0; col < d_next.cols(); ++col) {
      const bool in_cell = col >= 2 * cell && col < 2 * cell + 4;
      if (!in_cell) {
        EXPECT_EQ(d_next(row, col), 0.0);
        EXPECT_EQ(d_prev(row, col), 0.0);
      }
    }
    if (row % 2 == 0) {
      EXPECT_EQ(d_next(row, 2 * cell), 0.5);
      EXPECT_EQ(d_next(row, 2 * cell + 2), 0.5);
    }
  }
}
