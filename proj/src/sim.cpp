#include "gaspower/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "gaspower/error.hpp"
#include "gaspower/gas.hpp"

namespace gaspower {

using Triplets = std::vector<Eigen::Triplet<double>>;

// ---------------------------------------------------------------------------------------------
// VariableIndex

VariableIndex::VariableIndex(const Network& network) {
  const double kappa = network.constants.kappa;
  auto add = [&](VariableKind kind, double scale, std::string name) {
    kinds_.push_back(kind);
    scales_.push_back(scale);
    names_.push_back(std::move(name));
  };
  for (const auto& pipe : network.pipes) {
    pipe_offset_.push_back(static_cast<Eigen::Index>(kinds_.size()));
    const auto n = static_cast<std::size_t>(pipe.cell_count) + 1;
    points_.push_back(n);
    for (std::size_t j = 0; j < n; ++j) {
      add(VariableKind::density, 1.0, pipe.id + ".rho[" + std::to_string(j) + "]");
      add(VariableKind::flux, kReferenceFlux, pipe.id + ".q[" + std::to_string(j) + "]");
    }
  }
  node_offset_ = static_cast<Eigen::Index>(kinds_.size());
  for (const auto& node : network.gas_nodes) add(VariableKind::node_pressure, kappa, node.id + ".p");
  compressor_offset_ = static_cast<Eigen::Index>(kinds_.size());
  for (const auto& c : network.compressors) add(VariableKind::compressor_flux, kReferenceFlux, c.id + ".q");
  bus_offset_ = static_cast<Eigen::Index>(kinds_.size());
  for (const auto& bus : network.busses) {
    add(VariableKind::voltage, 1.0, bus.id + ".V");
    add(VariableKind::phase, 1.0, bus.id + ".phi");
    add(VariableKind::real_power, 1.0, bus.id + ".P");
    add(VariableKind::reactive_power, 1.0, bus.id + ".Q");
  }
  size_ = static_cast<Eigen::Index>(kinds_.size());
}

std::string VariableIndex::label(Eigen::Index i) const { return names_[static_cast<std::size_t>(i)]; }

gas::PipeState SystemState::pipe(std::size_t e) const {
  gas::PipeState s;
  const auto n = index->points(e);
  s.rho.resize(n);
  s.q.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.rho[j] = values(index->density(e, j));
    s.q[j] = values(index->flux(e, j));
  }
  return s;
}

power::PowerState SystemState::power(std::size_t buses) const {
  auto s = power::PowerState::flat(static_cast<Eigen::Index>(buses));
  for (std::size_t b = 0; b < buses; ++b) {
    const auto k = static_cast<Eigen::Index>(b);
    s.V(k) = values(index->bus(b, power::Quantity::V));
    s.phi(k) = values(index->bus(b, power::Quantity::phi));
    s.P(k) = values(index->bus(b, power::Quantity::P));
    s.Q(k) = values(index->bus(b, power::Quantity::Q));
  }
  return s;
}

// ---------------------------------------------------------------------------------------------
// CoupledModel

CoupledModel::CoupledModel(Network network) : network_(std::move(network)) {
  require_valid(network_);
  index_ = std::make_shared<const VariableIndex>(network_);
  admittance_ = nodal_admittance(network_);

  const auto& nw = network_;
  const std::size_t nodes = nw.gas_nodes.size();
  auto node_of = [&](const std::string& id) { return *nw.node_index(id); };

  for (const auto& p : nw.pipes) {
    pipe_from_.push_back(node_of(p.from_node));
    pipe_to_.push_back(node_of(p.to_node));
  }
  for (const auto& c : nw.compressors) {
    comp_from_.push_back(node_of(c.from_node));
    comp_to_.push_back(node_of(c.to_node));
  }

  // Reference areas: a node uses its first incident pipe, a compressor the first pipe at its
  // inlet (else outlet) node.
  std::vector<double> first_pipe_area(nodes, 0.0);
  for (std::size_t e = 0; e < nw.pipes.size(); ++e) {
    for (auto n : {pipe_from_[e], pipe_to_[e]}) {
      if (first_pipe_area[n] == 0.0) first_pipe_area[n] = nw.pipes[e].area();
    }
  }
  const double default_area = Pipe{}.area();
  for (std::size_t c = 0; c < nw.compressors.size(); ++c) {
    double a = first_pipe_area[comp_from_[c]];
    if (a == 0.0) a = first_pipe_area[comp_to_[c]];
    compressor_area_.push_back(a > 0.0 ? a : default_area);
  }
  node_area_ = first_pipe_area;
  for (std::size_t c = 0; c < nw.compressors.size(); ++c) {
    for (auto n : {comp_from_[c], comp_to_[c]}) {
      if (node_area_[n] == 0.0) node_area_[n] = compressor_area_[c];
    }
  }

  incidence_.resize(nodes);
  for (std::size_t e = 0; e < nw.pipes.size(); ++e) {
    const double a = nw.pipes[e].area();
    incidence_[pipe_from_[e]].push_back({index_->flux(e, 0), -a});
    incidence_[pipe_to_[e]].push_back({index_->flux(e, index_->points(e) - 1), a});
  }
  for (std::size_t c = 0; c < nw.compressors.size(); ++c) {
    incidence_[comp_from_[c]].push_back({index_->compressor_flux(c), -compressor_area_[c]});
    incidence_[comp_to_[c]].push_back({index_->compressor_flux(c), compressor_area_[c]});
  }

  plant_at_node_.assign(nodes, -1);
  for (std::size_t k = 0; k < nw.plants.size(); ++k) {
    plant_at_node_[node_of(nw.plants[k].gas_node)] = static_cast<std::ptrdiff_t>(k);
    plant_bus_.push_back(*nw.bus_index(nw.plants[k].bus));
  }
}

bool CoupledModel::admissible(const Eigen::VectorXd& y) const {
  if (y.size() != index_->size() || !y.allFinite()) return false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto k = index_->kind(i);
    if ((k == VariableKind::density || k == VariableKind::voltage) && !(y(i) > 0.0)) return false;
  }
  return true;
}

namespace {

void check_step_inputs(const CoupledModel& m, const Eigen::VectorXd& prev,
                       const Eigen::VectorXd& next, std::span<const double> control,
                       const BoundaryValues& b, double dt) {
  const auto n = m.index().size();
  if (prev.size() != n || next.size() != n) throw InputError("step: state size mismatch");
  if (control.size() != m.compressors()) throw InputError("step: control size mismatch");
  if (b.node.size() != m.network().gas_nodes.size() || b.bus.size() != m.network().busses.size()) {
    throw InputError("step: boundary size mismatch");
  }
  if (!(dt > 0.0)) throw InputError("step: dt must be positive");
  if (!m.admissible(next)) throw InputError("step: inadmissible state (density or voltage <= 0)");
}

struct PipeTerms {
  std::vector<gas::PointTerms> points;
};

}  // namespace

Eigen::VectorXd CoupledModel::residual(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                                       std::span<const double> control,
                                       const BoundaryValues& b, double dt) const {
  check_step_inputs(*this, prev, next, control, b, dt);
  const auto& ix = *index_;
  const auto& c = network_.constants;
  const double kappa = c.kappa;
  Eigen::VectorXd r(ix.size());

  for (std::size_t e = 0; e < network_.pipes.size(); ++e) {
    const auto& pipe = network_.pipes[e];
    const double dx = pipe.cell_length();
    const auto n = ix.points(e);
    std::vector<gas::PointTerms> t(n);
    for (std::size_t j = 0; j < n; ++j) {
      t[j] = gas::point_terms(next(ix.density(e, j)), next(ix.flux(e, j)), pipe, c);
    }
    const double mass_scale = dx / (dt * kReferenceFlux);
    const double mom_scale = dx / (dt * kappa);
    for (std::size_t j = 1; j < n; ++j) {
      const auto cell = gas::box_cell(prev(ix.density(e, j - 1)), prev(ix.flux(e, j - 1)),
                                      prev(ix.density(e, j)), prev(ix.flux(e, j)),
                                      next(ix.density(e, j - 1)), next(ix.flux(e, j - 1)),
                                      next(ix.density(e, j)), next(ix.flux(e, j)), t[j - 1], t[j],
                                      dt, dx);
      r(ix.cell_row(e, j - 1, 0)) = cell.value[0] * mass_scale;
      r(ix.cell_row(e, j - 1, 1)) = cell.value[1] * mom_scale;
    }
    r(ix.pipe_end_row(e, false)) =
        (gas::pressure_of_density(next(ix.density(e, 0)), c) - next(ix.node_pressure(pipe_from_[e]))) / kappa;
    r(ix.pipe_end_row(e, true)) =
        (gas::pressure_of_density(next(ix.density(e, n - 1)), c) - next(ix.node_pressure(pipe_to_[e]))) / kappa;
  }

  for (std::size_t i = 0; i < network_.gas_nodes.size(); ++i) {
    const auto kind = network_.gas_nodes[i].kind;
    if (kind == NodeKind::pressure_boundary) {
      r(ix.node_row(i)) = (next(ix.node_pressure(i)) - b.node[i]) / kappa;
      continue;
    }
    double balance = 0.0;
    for (const auto& inc : incidence_[i]) balance += inc.coefficient * next(inc.variable);
    if (kind == NodeKind::flow_boundary) balance -= node_area_[i] * b.node[i];
    if (plant_at_node_[i] >= 0) {
      const auto k = static_cast<std::size_t>(plant_at_node_[i]);
      const auto& plant = network_.plants[k];
      balance -= plant.offtake(next(ix.bus(plant_bus_[k], power::Quantity::P))) * plant.reference_density;
    }
    r(ix.node_row(i)) = balance / (node_area_[i] * kReferenceFlux);
  }

  for (std::size_t k = 0; k < network_.compressors.size(); ++k) {
    r(ix.compressor_row(k)) =
        (next(ix.node_pressure(comp_to_[k])) - next(ix.node_pressure(comp_from_[k])) - control[k]) / kappa;
  }

  if (!network_.busses.empty()) {
    const SystemState s{index_, next};
    const auto ps = s.power(network_.busses.size());
    const auto pf = power::powerflow_residual(ps, admittance_);
    for (std::size_t k = 0; k < network_.busses.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      r(ix.bus_row(k, 0)) = pf(2 * kk);
      r(ix.bus_row(k, 1)) = pf(2 * kk + 1);
      const auto& fixed = b.bus[k];
      switch (network_.busses[k].kind) {
        case BusKind::slack:
          r(ix.bus_row(k, 2)) = ps.V(kk) - fixed[0];
          r(ix.bus_row(k, 3)) = ps.phi(kk) - fixed[1];
          break;
        case BusKind::generator:
          r(ix.bus_row(k, 2)) = ps.P(kk) - fixed[0];
          r(ix.bus_row(k, 3)) = ps.V(kk) - fixed[1];
          break;
        case BusKind::load:
          r(ix.bus_row(k, 2)) = ps.P(kk) - fixed[0];
          r(ix.bus_row(k, 3)) = ps.Q(kk) - fixed[1];
          break;
      }
    }
  }
  return r;
}

StepJacobian CoupledModel::jacobian(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                                    std::span<const double> control, const BoundaryValues& b,
                                    double dt, gas::FrictionDerivative mode) const {
  check_step_inputs(*this, prev, next, control, b, dt);
  const auto& ix = *index_;
  const auto& c = network_.constants;
  const double kappa = c.kappa;
  Triplets tn, tp, tu;
  tn.reserve(static_cast<std::size_t>(ix.size()) * 6);

  for (std::size_t e = 0; e < network_.pipes.size(); ++e) {
    const auto& pipe = network_.pipes[e];
    const double dx = pipe.cell_length();
    const auto n = ix.points(e);
    std::vector<gas::PointTerms> t(n);
    for (std::size_t j = 0; j < n; ++j) {
      t[j] = gas::point_terms(next(ix.density(e, j)), next(ix.flux(e, j)), pipe, c, mode);
    }
    const double scale[2] = {dx / (dt * kReferenceFlux), dx / (dt * kappa)};
    for (std::size_t j = 1; j < n; ++j) {
      const auto cell = gas::box_cell(prev(ix.density(e, j - 1)), prev(ix.flux(e, j - 1)),
                                      prev(ix.density(e, j)), prev(ix.flux(e, j)),
                                      next(ix.density(e, j - 1)), next(ix.flux(e, j - 1)),
                                      next(ix.density(e, j)), next(ix.flux(e, j)), t[j - 1], t[j],
                                      dt, dx);
      const Eigen::Index cols[4] = {ix.density(e, j - 1), ix.flux(e, j - 1), ix.density(e, j),
                                    ix.flux(e, j)};
      for (int eq = 0; eq < 2; ++eq) {
        const auto row = ix.cell_row(e, j - 1, eq);
        for (int k = 0; k < 4; ++k) {
          tn.emplace_back(row, cols[k], cell.d_next[eq][k] * scale[eq]);
          if (cell.d_prev[eq][k] != 0.0) tp.emplace_back(row, cols[k], cell.d_prev[eq][k] * scale[eq]);
        }
      }
    }
    const auto r0 = ix.pipe_end_row(e, false);
    const auto r1 = ix.pipe_end_row(e, true);
    tn.emplace_back(r0, ix.density(e, 0), gas::pressure_derivative(next(ix.density(e, 0)), c) / kappa);
    tn.emplace_back(r0, ix.node_pressure(pipe_from_[e]), -1.0 / kappa);
    tn.emplace_back(r1, ix.density(e, n - 1),
                    gas::pressure_derivative(next(ix.density(e, n - 1)), c) / kappa);
    tn.emplace_back(r1, ix.node_pressure(pipe_to_[e]), -1.0 / kappa);
  }

  for (std::size_t i = 0; i < network_.gas_nodes.size(); ++i) {
    const auto row = ix.node_row(i);
    if (network_.gas_nodes[i].kind == NodeKind::pressure_boundary) {
      tn.emplace_back(row, ix.node_pressure(i), 1.0 / kappa);
      continue;
    }
    const double s = 1.0 / (node_area_[i] * kReferenceFlux);
    for (const auto& inc : incidence_[i]) tn.emplace_back(row, inc.variable, inc.coefficient * s);
    if (plant_at_node_[i] >= 0) {
      const auto k = static_cast<std::size_t>(plant_at_node_[i]);
      const auto& plant = network_.plants[k];
      const auto col = ix.bus(plant_bus_[k], power::Quantity::P);
      tn.emplace_back(row, col, -plant.offtake_derivative(next(col)) * plant.reference_density * s);
    }
  }

  for (std::size_t k = 0; k < network_.compressors.size(); ++k) {
    const auto row = ix.compressor_row(k);
    tn.emplace_back(row, ix.node_pressure(comp_to_[k]), 1.0 / kappa);
    tn.emplace_back(row, ix.node_pressure(comp_from_[k]), -1.0 / kappa);
    tu.emplace_back(row, static_cast<Eigen::Index>(k), -1.0 / kappa);
  }

  if (!network_.busses.empty()) {
    const SystemState s{index_, next};
    const auto pf = power::powerflow_jacobian(s.power(network_.busses.size()), admittance_);
    for (Eigen::Index col = 0; col < pf.outerSize(); ++col) {
      const auto bus = static_cast<std::size_t>(col / 4);
      const auto q = static_cast<power::Quantity>(col % 4);
      for (Eigen::SparseMatrix<double>::InnerIterator it(pf, col); it; ++it) {
        const auto row = ix.bus_row(static_cast<std::size_t>(it.row() / 2), static_cast<int>(it.row() % 2));
        tn.emplace_back(row, ix.bus(bus, q), it.value());
      }
    }
    for (std::size_t k = 0; k < network_.busses.size(); ++k) {
      using power::Quantity;
      Quantity first = Quantity::P, second = Quantity::Q;
      switch (network_.busses[k].kind) {
        case BusKind::slack: first = Quantity::V; second = Quantity::phi; break;
        case BusKind::generator: first = Quantity::P; second = Quantity::V; break;
        case BusKind::load: break;
      }
      tn.emplace_back(ix.bus_row(k, 2), ix.bus(k, first), 1.0);
      tn.emplace_back(ix.bus_row(k, 3), ix.bus(k, second), 1.0);
    }
  }

  StepJacobian jac;
  const auto n = ix.size();
  jac.d_next.resize(n, n);
  jac.d_prev.resize(n, n);
  jac.d_control.resize(n, static_cast<Eigen::Index>(compressors()));
  jac.d_next.setFromTriplets(tn.begin(), tn.end());
  jac.d_prev.setFromTriplets(tp.begin(), tp.end());
  jac.d_control.setFromTriplets(tu.begin(), tu.end());
  return jac;
}

Eigen::VectorXd CoupledModel::initial_guess(const BoundaryValues& b) const {
  const auto& ix = *index_;
  double p0 = 0.0;
  double outflow = 0.0;
  for (std::size_t i = 0; i < network_.gas_nodes.size(); ++i) {
    const auto kind = network_.gas_nodes[i].kind;
    if (kind == NodeKind::pressure_boundary) p0 = std::max(p0, b.node[i]);
    if (kind == NodeKind::flow_boundary) outflow += b.node[i] * node_area_[i];
  }
  if (!(p0 > 0.0)) throw InputError("initial guess: no positive boundary pressure");
  const double rho0 = gas::density_of_pressure(p0, network_.constants);

  Eigen::VectorXd y = Eigen::VectorXd::Zero(ix.size());
  for (std::size_t e = 0; e < network_.pipes.size(); ++e) {
    const double q = outflow / network_.pipes[e].area();
    for (std::size_t j = 0; j < ix.points(e); ++j) {
      y(ix.density(e, j)) = rho0;
      y(ix.flux(e, j)) = q;
    }
  }
  for (std::size_t i = 0; i < network_.gas_nodes.size(); ++i) y(ix.node_pressure(i)) = p0;
  for (std::size_t k = 0; k < compressors(); ++k) y(ix.compressor_flux(k)) = outflow / compressor_area_[k];
  using power::Quantity;
  for (std::size_t k = 0; k < network_.busses.size(); ++k) {
    y(ix.bus(k, Quantity::V)) = 1.0;
    const auto& fixed = b.bus[k];
    switch (network_.busses[k].kind) {
      case BusKind::slack:
        y(ix.bus(k, Quantity::V)) = fixed[0];
        y(ix.bus(k, Quantity::phi)) = fixed[1];
        break;
      case BusKind::generator:
        y(ix.bus(k, Quantity::P)) = fixed[0];
        y(ix.bus(k, Quantity::V)) = fixed[1];
        break;
      case BusKind::load:
        y(ix.bus(k, Quantity::P)) = fixed[0];
        y(ix.bus(k, Quantity::Q)) = fixed[1];
        break;
    }
  }
  return y;
}

double CoupledModel::stored_mass(const Eigen::VectorXd& y) const {
  const auto& ix = *index_;
  double m = 0.0;
  for (std::size_t e = 0; e < network_.pipes.size(); ++e) {
    const auto& pipe = network_.pipes[e];
    double sum = 0.0;
    for (std::size_t j = 1; j < ix.points(e); ++j) {
      sum += 0.5 * (y(ix.density(e, j - 1)) + y(ix.density(e, j)));
    }
    m += pipe.area() * pipe.cell_length() * sum;
  }
  return m;
}

double CoupledModel::node_injection(std::size_t node, const Eigen::VectorXd& y,
                                    const BoundaryValues& b) const {
  switch (network_.gas_nodes[node].kind) {
    case NodeKind::flow_boundary:
      return -node_area_[node] * b.node[node];
    case NodeKind::power_coupling: {
      const auto k = static_cast<std::size_t>(plant_at_node_[node]);
      const auto& plant = network_.plants[k];
      return -plant.offtake(y(index_->bus(plant_bus_[k], power::Quantity::P))) * plant.reference_density;
    }
    case NodeKind::pressure_boundary: {
      double into_arcs = 0.0;
      for (const auto& inc : incidence_[node]) into_arcs -= inc.coefficient * y(inc.variable);
      return into_arcs;
    }
    case NodeKind::junction:
      return 0.0;
  }
  return 0.0;
}

double CoupledModel::mass_balance_error(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                                        const BoundaryValues& b, double dt) const {
  double injection = 0.0;
  for (std::size_t i = 0; i < network_.gas_nodes.size(); ++i) injection += node_injection(i, next, b);
  const double rate = (stored_mass(next) - stored_mass(prev)) / dt;
  const double ref = (network_.pipes.empty() ? Pipe{}.area() : network_.pipes.front().area()) * kReferenceFlux;
  return std::abs(rate - injection) / ref;
}

double CoupledModel::scaled_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a(i) - b(i)) / index_->scale(i));
  return d;
}

Eigen::VectorXd assemble_step_residual(const CoupledModel& model, const SystemState& prev,
                                       const SystemState& next, std::span<const double> control,
                                       const BoundaryValues& boundary, double dt) {
  return model.residual(prev.values, next.values, control, boundary, dt);
}

StepJacobian assemble_step_jacobian(const CoupledModel& model, const SystemState& prev,
                                    const SystemState& next, std::span<const double> control,
                                    const BoundaryValues& boundary, double dt) {
  return model.jacobian(prev.values, next.values, control, boundary, dt);
}

// ---------------------------------------------------------------------------------------------
// Newton

namespace {

template <class Residual, class Jacobian>
NewtonResult damped_newton(const CoupledModel& model, Eigen::VectorXd y, Residual&& residual,
                           Jacobian&& jacobian, double tol, const NewtonSettings& settings) {
  if (!model.admissible(y)) throw InputError("newton: inadmissible initial guess");
  Eigen::VectorXd r = residual(y);
  double norm = r.lpNorm<Eigen::Infinity>();
  NewtonResult out;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;

  while (!(norm < tol)) {
    if (out.iterations == settings.max_iter) {
      throw MaxIterationsExceeded("newton: no convergence after " + std::to_string(settings.max_iter) +
                                      " iterations (residual " + std::to_string(norm) + ")",
                                  norm);
    }
    Eigen::SparseMatrix<double> jac = jacobian(y);
    jac.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw SingularJacobian("newton: singular Jacobian");
    const Eigen::VectorXd step = lu.solve(-r);
    if (!step.allFinite()) throw SingularJacobian("newton: non-finite Newton step");

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= settings.max_halvings; ++h, alpha *= 0.5) {
      Eigen::VectorXd trial = y + alpha * step;
      if (!model.admissible(trial)) continue;
      Eigen::VectorXd rt = residual(trial);
      const double nt = rt.lpNorm<Eigen::Infinity>();
      if (nt < norm) {
        y = std::move(trial);
        r = std::move(rt);
        norm = nt;
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) {
      throw MaxIterationsExceeded("newton: step halving failed to reduce the residual (residual " +
                                      std::to_string(norm) + ")",
                                  norm);
    }
  }
  out.y = std::move(y);
  out.residual = norm;
  return out;
}

}  // namespace

NewtonResult newton_solve_step(const CoupledModel& model, const Eigen::VectorXd& prev,
                               std::span<const double> control, const BoundaryValues& boundary,
                               double dt, const NewtonSettings& settings,
                               const Eigen::VectorXd* guess) {
  if (!(settings.tol > 0.0)) throw InputError("newton: tol must be positive");
  return damped_newton(
      model, guess ? *guess : prev,
      [&](const Eigen::VectorXd& y) { return model.residual(prev, y, control, boundary, dt); },
      [&](const Eigen::VectorXd& y) { return model.jacobian(prev, y, control, boundary, dt).d_next; },
      settings.tol, settings);
}

NewtonResult solve_steady_state(const CoupledModel& model, std::span<const double> control,
                                const BoundaryValues& boundary, double dt,
                                const NewtonSettings& settings, const Eigen::VectorXd* guess) {
  return damped_newton(
      model, guess ? *guess : model.initial_guess(boundary),
      [&](const Eigen::VectorXd& y) { return model.residual(y, y, control, boundary, dt); },
      [&](const Eigen::VectorXd& y) {
        auto j = model.jacobian(y, y, control, boundary, dt);
        return Eigen::SparseMatrix<double>(j.d_next + j.d_prev);
      },
      settings.steady_tol, settings);
}

// ---------------------------------------------------------------------------------------------
// Simulator

Simulator::Simulator(Network network, Scenario scenario)
    : model_(std::move(network)),
      scenario_(std::move(scenario)),
      schedule_(model_.network(), scenario_.boundary),
      steps_(scenario_.steps()) {
  check_scenario(model_.network(), scenario_);
}

Simulator Simulator::with_newton(const NewtonSettings& settings) const {
  auto s = scenario_;
  s.newton = settings;
  return Simulator(model_.network(), std::move(s));
}

SystemState Simulator::steady_state(std::span<const double> control) const {
  auto sol = solve_steady_state(model_, control, boundary(0), dt(), scenario_.newton);
  return {model_.index_ptr(), std::move(sol.y)};
}

Trajectory Simulator::simulate(const ControlVector& control) const {
  if (control.time_levels() != steps_ + 1 || control.compressors() != model_.compressors()) {
    throw InputError("simulate: control must have one value per compressor and time level");
  }
  Trajectory traj;
  traj.index = model_.index_ptr();
  traj.control = control;
  traj.dt = dt();
  traj.states.reserve(steps_ + 1);
  try {
    traj.states.push_back(steady_state(control.at(0)));
  } catch (const SolverError& e) {
    throw StepFailure(std::string("steady state: ") + e.what(), 0);
  }
  traj.newton_iterations.push_back(0);
  for (std::size_t j = 1; j <= steps_; ++j) {
    try {
      auto sol = newton_solve_step(model_, traj.states.back().values, control.at(j), boundary(j),
                                   dt(), scenario_.newton);
      traj.newton_iterations.push_back(sol.iterations);
      traj.states.push_back({model_.index_ptr(), std::move(sol.y)});
    } catch (const SolverError& e) {
      throw StepFailure("time step " + std::to_string(j) + ": " + e.what(), j);
    }
  }
  return traj;
}

Trajectory simulate(const Network& network, const Scenario& scenario, const ControlVector& control) {
  return Simulator(network, scenario).simulate(control);
}

}  // namespace gaspower
