#include "gaspower/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "gaspower/error.hpp"

namespace gaspower {

namespace {

template <class Range>
std::optional<std::size_t> find_id(const Range& items, std::string_view id) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id == id) return i;
  }
  return std::nullopt;
}

template <class Range>
void check_unique_ids(const Range& items, std::string_view what, std::vector<std::string>& out) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.id.empty()) out.push_back(std::string(what) + " with empty id");
    if (!seen.insert(item.id).second) {
      out.push_back("duplicate " + std::string(what) + " id \"" + item.id + "\"");
    }
  }
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::junction: return "junction";
    case NodeKind::pressure_boundary: return "pressure-boundary";
    case NodeKind::flow_boundary: return "flow-boundary";
    case NodeKind::power_coupling: return "power-coupling";
  }
  return "junction";
}

std::string_view to_string(BusKind kind) {
  switch (kind) {
    case BusKind::slack: return "slack";
    case BusKind::generator: return "generator";
    case BusKind::load: return "load";
  }
  return "load";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (auto kind : {NodeKind::junction, NodeKind::pressure_boundary, NodeKind::flow_boundary,
                    NodeKind::power_coupling}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::optional<BusKind> parse_bus_kind(std::string_view text) {
  if (text == "PV") return BusKind::generator;
  if (text == "PQ") return BusKind::load;
  for (auto kind : {BusKind::slack, BusKind::generator, BusKind::load}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

int default_cell_count(double length) {
  return std::max(1, static_cast<int>(std::lround(length / kNominalCellLength)));
}

std::optional<std::size_t> Network::node_index(std::string_view id) const {
  return find_id(gas_nodes, id);
}
std::optional<std::size_t> Network::bus_index(std::string_view id) const {
  return find_id(busses, id);
}
std::optional<std::size_t> Network::pipe_index(std::string_view id) const {
  return find_id(pipes, id);
}
std::optional<std::size_t> Network::compressor_index(std::string_view id) const {
  return find_id(compressors, id);
}

std::string ValidationReport::to_string() const {
  if (ok()) return "network is valid\n";
  std::ostringstream os;
  for (const auto& v : violations) os << "violation: " << v << '\n';
  return os.str();
}

ValidationReport validate_network(const Network& network) {
  ValidationReport report;
  auto& out = report.violations;

  const auto& c = network.constants;
  if (!(c.kappa > 0.0)) out.push_back("kappa must be positive");
  if (!(c.gamma >= 1.0)) out.push_back("gamma must be at least 1");
  if (!(c.eta > 0.0)) out.push_back("eta must be positive");
  if (!(network.per_unit.base_power > 0.0) || !(network.per_unit.base_voltage > 0.0)) {
    out.push_back("per-unit bases must be positive");
  }

  check_unique_ids(network.gas_nodes, "gas node", out);
  check_unique_ids(network.pipes, "pipe", out);
  check_unique_ids(network.compressors, "compressor", out);
  check_unique_ids(network.busses, "bus", out);
  check_unique_ids(network.lines, "line", out);

  std::map<std::string, int> degree;
  for (const auto& node : network.gas_nodes) degree[node.id] = 0;

  auto check_arc = [&](std::string_view kind, const std::string& id, const std::string& from,
                       const std::string& to) {
    for (const auto* end : {&from, &to}) {
      auto it = degree.find(*end);
      if (it == degree.end()) {
        out.push_back(std::string(kind) + " \"" + id + "\" has unknown endpoint \"" + *end + "\"");
      } else {
        ++it->second;
      }
    }
    if (from == to) out.push_back(std::string(kind) + " \"" + id + "\" connects a node to itself");
  };

  for (const auto& pipe : network.pipes) {
    check_arc("pipe", pipe.id, pipe.from_node, pipe.to_node);
    if (!(pipe.length > 0.0)) out.push_back("pipe \"" + pipe.id + "\": length must be positive");
    if (!(pipe.diameter > 0.0)) out.push_back("pipe \"" + pipe.id + "\": diameter must be positive");
    if (!(pipe.roughness >= 0.0)) {
      out.push_back("pipe \"" + pipe.id + "\": roughness must be non-negative");
    }
    if (pipe.cell_count < 1) out.push_back("pipe \"" + pipe.id + "\": cell_count must be >= 1");
  }
  for (const auto& comp : network.compressors) {
    check_arc("compressor", comp.id, comp.from_node, comp.to_node);
    if (!(comp.cost.d1 >= 0.0) || !(comp.cost.d2 >= 0.0)) {
      out.push_back("compressor \"" + comp.id + "\": cost coefficients d1, d2 must be >= 0");
    }
  }

  for (const auto& node : network.gas_nodes) {
    const int deg = degree[node.id];
    if (deg == 0) out.push_back("gas node \"" + node.id + "\" is not connected to any arc");
    const bool boundary =
        node.kind == NodeKind::pressure_boundary || node.kind == NodeKind::flow_boundary;
    if (boundary && deg > 1) {
      out.push_back("boundary node \"" + node.id + "\" must have exactly one incident arc");
    }
  }

  // Gas network connectivity (undirected).
  if (!network.gas_nodes.empty()) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& p : network.pipes) {
      adj[p.from_node].push_back(p.to_node);
      adj[p.to_node].push_back(p.from_node);
    }
    for (const auto& k : network.compressors) {
      adj[k.from_node].push_back(k.to_node);
      adj[k.to_node].push_back(k.from_node);
    }
    std::set<std::string> reached{network.gas_nodes.front().id};
    std::vector<std::string> stack{network.gas_nodes.front().id};
    while (!stack.empty()) {
      auto id = stack.back();
      stack.pop_back();
      for (const auto& next : adj[id]) {
        if (reached.insert(next).second) stack.push_back(next);
      }
    }
    for (const auto& node : network.gas_nodes) {
      if (!reached.count(node.id)) {
        out.push_back("gas node \"" + node.id + "\" is disconnected from the network");
      }
    }
    const bool has_pressure = std::any_of(network.gas_nodes.begin(), network.gas_nodes.end(),
                                          [](const GasNode& n) {
                                            return n.kind == NodeKind::pressure_boundary;
                                          });
    if (!has_pressure) out.push_back("gas network needs at least one pressure-boundary node");
  }

  if (!network.busses.empty()) {
    const auto slacks = std::count_if(network.busses.begin(), network.busses.end(),
                                      [](const Bus& b) { return b.kind == BusKind::slack; });
    if (slacks == 0) out.push_back("no slack bus");
    if (slacks > 1) out.push_back("slack bus not unique");
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& line : network.lines) {
    const bool from_ok = network.bus_index(line.from_bus).has_value();
    const bool to_ok = network.bus_index(line.to_bus).has_value();
    if (!from_ok || !to_ok) {
      out.push_back("line \"" + line.id + "\" has unknown endpoint \"" +
                    (from_ok ? line.to_bus : line.from_bus) + "\"");
      continue;
    }
    if (line.from_bus == line.to_bus) {
      out.push_back("line \"" + line.id + "\" connects a bus to itself");
      continue;
    }
    auto key = std::minmax(line.from_bus, line.to_bus);
    if (!pairs.emplace(key.first, key.second).second) {
      out.push_back("more than one line between \"" + key.first + "\" and \"" + key.second + "\"");
    }
  }

  std::map<std::string, int> plants_at_node;
  for (const auto& plant : network.plants) {
    auto node = network.node_index(plant.gas_node);
    if (!node) {
      out.push_back("plant has unknown gas node \"" + plant.gas_node + "\"");
    } else if (network.gas_nodes[*node].kind != NodeKind::power_coupling) {
      out.push_back("plant gas node \"" + plant.gas_node + "\" must be of kind power-coupling");
    }
    if (!network.bus_index(plant.bus)) out.push_back("plant has unknown bus \"" + plant.bus + "\"");
    if (!(plant.a1 >= 0.0) || !(plant.a2 >= 0.0)) {
      out.push_back("plant at \"" + plant.gas_node + "\": a1 and a2 must be >= 0");
    }
    if (!(plant.reference_density > 0.0)) {
      out.push_back("plant at \"" + plant.gas_node + "\": reference_density must be positive");
    }
    ++plants_at_node[plant.gas_node];
  }
  for (const auto& node : network.gas_nodes) {
    if (node.kind == NodeKind::power_coupling && plants_at_node[node.id] != 1) {
      out.push_back("power-coupling node \"" + node.id + "\" must host exactly one plant");
    }
  }
  return report;
}

void require_valid(const Network& network) {
  auto report = validate_network(network);
  if (!report.ok()) throw InputError(report.to_string());
}

std::vector<Eigen::Index> Admittance::row_pattern(Eigen::Index k) const {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < size(); ++j) {
    if (j == k || conductance(k, j) != 0.0 || susceptance(k, j) != 0.0) cols.push_back(j);
  }
  return cols;
}

Admittance nodal_admittance(const Network& network) {
  const auto n = static_cast<Eigen::Index>(network.busses.size());
  Admittance y{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    y.conductance(k, k) = network.busses[k].self_conductance;
    y.susceptance(k, k) = network.busses[k].self_susceptance;
  }
  for (const auto& line : network.lines) {
    auto a = network.bus_index(line.from_bus);
    auto b = network.bus_index(line.to_bus);
    if (!a || !b || *a == *b) continue;
    const auto i = static_cast<Eigen::Index>(*a);
    const auto j = static_cast<Eigen::Index>(*b);
    y.conductance(i, j) = y.conductance(j, i) = line.conductance;
    y.susceptance(i, j) = y.susceptance(j, i) = line.susceptance;
  }
  return y;
}

}  // namespace gaspower
