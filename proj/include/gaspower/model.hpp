#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gaspower/compressor.hpp"

namespace gaspower {

/// Pressure law p = kappa * rho^gamma and the viscosity used for the Reynolds number.
struct GasConstants {
  double kappa = 340.0 * 340.0;  // Pa m^3/kg for gamma = 1, i.e. c^2
  double gamma = 1.0;
  double eta = 1e-5;  // kg/(m s)
  friend bool operator==(const GasConstants&, const GasConstants&) = default;
};

enum class NodeKind { junction, pressure_boundary, flow_boundary, power_coupling };
enum class BusKind { slack, generator, load };

std::string_view to_string(NodeKind kind);
std::string_view to_string(BusKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<BusKind> parse_bus_kind(std::string_view text);

inline constexpr double kDefaultDiameter = 0.6;
inline constexpr double kDefaultRoughness = 5e-4;
inline constexpr double kNominalCellLength = 1000.0;

/// Number of cells for a pipe of the given length: round(length / 1 km), at least one.
int default_cell_count(double length);

struct Pipe {
  std::string id;
  std::string from_node;
  std::string to_node;
  double length = 0.0;  // m
  double diameter = kDefaultDiameter;
  double roughness = kDefaultRoughness;
  int cell_count = 1;

  double area() const { return std::numbers::pi * diameter * diameter / 4.0; }
  double cell_length() const { return length / cell_count; }
  friend bool operator==(const Pipe&, const Pipe&) = default;
};

struct GasNode {
  std::string id;
  NodeKind kind = NodeKind::junction;
  friend bool operator==(const GasNode&, const GasNode&) = default;
};

/// Algebraic arc: p_out - p_in = u and a single through-flux.
struct CompressorArc {
  std::string id;
  std::string from_node;
  std::string to_node;
  CompressorCostModel cost;
  friend bool operator==(const CompressorArc&, const CompressorArc&) = default;
};

struct Bus {
  std::string id;
  BusKind kind = BusKind::load;
  double self_conductance = 0.0;  // G_kk, p.u.
  double self_susceptance = 0.0;  // B_kk, p.u.
  friend bool operator==(const Bus&, const Bus&) = default;
};

/// Off-diagonal admittance entries (G_kj, B_kj), used symmetrically.
struct TransmissionLine {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double conductance = 0.0;
  double susceptance = 0.0;
  friend bool operator==(const TransmissionLine&, const TransmissionLine&) = default;
};

/// Gas-fired plant withdrawing eps(P) = a0 + a1 P + a2 P^2 from a gas node.
///
/// eps is a volumetric flow (m^3/s) at `reference_density`; the withdrawn mass flow is
/// eps * reference_density.
struct GasPowerPlant {
  std::string gas_node;
  std::string bus;
  double a0 = 2.0;
  double a1 = 5.0;
  double a2 = 10.0;
  double reference_density = 0.785;  // kg/m^3

  double offtake(double power) const { return a0 + (a1 + a2 * power) * power; }
  double offtake_derivative(double power) const { return a1 + 2.0 * a2 * power; }
  friend bool operator==(const GasPowerPlant&, const GasPowerPlant&) = default;
};

struct PerUnitSystem {
  double base_power = 100e6;   // W
  double base_voltage = 345e3; // V
  friend bool operator==(const PerUnitSystem&, const PerUnitSystem&) = default;
};

/// Static description of the coupled gas and power networks.
struct Network {
  GasConstants constants;
  PerUnitSystem per_unit;
  std::vector<GasNode> gas_nodes;
  std::vector<Pipe> pipes;
  std::vector<CompressorArc> compressors;
  std::vector<Bus> busses;
  std::vector<TransmissionLine> lines;
  std::vector<GasPowerPlant> plants;

  std::optional<std::size_t> node_index(std::string_view id) const;
  std::optional<std::size_t> bus_index(std::string_view id) const;
  std::optional<std::size_t> pipe_index(std::string_view id) const;
  std::optional<std::size_t> compressor_index(std::string_view id) const;
  friend bool operator==(const Network&, const Network&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Checks topology and parameter ranges. Does not modify the network.
ValidationReport validate_network(const Network& network);

/// Throws InputError carrying the report text if the network is invalid.
void require_valid(const Network& network);

/// Dense nodal admittance table, bus order as in Network::busses.
struct Admittance {
  Eigen::MatrixXd conductance;
  Eigen::MatrixXd susceptance;

  Eigen::Index size() const { return conductance.rows(); }
  std::complex<double> entry(Eigen::Index k, Eigen::Index j) const {
    return {conductance(k, j), susceptance(k, j)};
  }
  /// Busses with a nonzero entry in row k, including k itself.
  std::vector<Eigen::Index> row_pattern(Eigen::Index k) const;
};

Admittance nodal_admittance(const Network& network);

}  // namespace gaspower
