#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaspower/model.hpp"
#include "gaspower/opt.hpp"
#include "gaspower/scenario.hpp"
#include "gaspower/sim.hpp"

namespace gaspower::io {

/// How unknown keys in input files are treated.
enum class KeyPolicy { strict, lax };

struct LoadOptions {
  KeyPolicy keys = KeyPolicy::strict;
  /// Receives one message per ignored key in lax mode; may be null.
  std::vector<std::string>* warnings = nullptr;
  /// Run validate_network after parsing and throw InputError with the report on failure.
  bool validate = true;
};

// Network files (JSON). Lengths, diameters and roughness in m, admittances and plant
// coefficients in p.u., base power in MVA and base voltage in kV. A missing pipe cell_count
// defaults to round(length / 1 km).
Network parse_network(std::string_view json, const LoadOptions& options = {},
                      std::string_view source = "<network>");
Network load_network(const std::filesystem::path& path, const LoadOptions& options = {});
std::string serialize_network(const Network& network);

// Scenario files (JSON). Pressures and pressure bounds in bar, outflows in kg/(m^2 s),
// electrical boundary data in p.u., series as [[t_hours, value], ...] or a constant number.
Scenario parse_scenario(std::string_view json, const Network& network,
                        const LoadOptions& options = {}, std::string_view source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path, const Network& network,
                       const LoadOptions& options = {});
std::string serialize_scenario(const Scenario& scenario);

/// Control CSV: header `t_hours,u_bar` (one u column per compressor, in network order),
/// breakpoints interpolated linearly onto the simulator's time grid.
ControlVector parse_control_csv(std::string_view csv, const Simulator& sim,
                                std::string_view source = "<control>");
ControlVector load_control(const std::filesystem::path& path, const Simulator& sim);
std::string control_csv(const Simulator& sim, const ControlVector& control);

/// Result tables as CSV text; q in gas_nodes is the net boundary injection at the node
/// (supply minus withdrawal, kg/(m^2 s) over the node's reference area).
std::string gas_nodes_csv(const Simulator& sim, const Trajectory& trajectory);
std::string busses_csv(const Simulator& sim, const Trajectory& trajectory);
std::string iteration_log_csv(const std::vector<IterationLogEntry>& log);
/// summary.json contents; `result` adds the optimizer block.
std::string summary_json(const Simulator& sim, const Trajectory& trajectory,
                         const OptimizationResult* result = nullptr);

/// Writes gas_nodes.csv, busses.csv, control.csv and summary.json (plus iterations.csv for an
/// optimization result) into `dir`, creating it if needed.
void write_results(const std::filesystem::path& dir, const Simulator& sim,
                   const Trajectory& trajectory, const OptimizationResult* result = nullptr);

/// Reads a whole file; InputError naming the path on failure.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file; Error naming the path on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace gaspower::io
