#include "gaspower/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gaspower/error.hpp"

namespace gaspower::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kBar = 1e5;

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// x rounded to nine significant digits, so that JSON output matches the CSV precision.
double round9(double x) { return std::isfinite(x) ? std::stod(format_number(x)) : x; }

ordered_json number_or_null(double x) {
  return std::isfinite(x) ? ordered_json(round9(x)) : ordered_json(nullptr);
}

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the offending character.
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InputError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(column) +
                     ": JSON parse error: " + e.what());
  }
}

/// Typed access to JSON objects with context-rich errors and unknown-key handling.
class Reader {
 public:
  Reader(const LoadOptions& options, std::string_view source) : options_(options), source_(source) {}

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw InputError(source_ + ": " + where + ": " + what);
  }

  const json& object(const json& j, const std::string& where) const {
    if (!j.is_object()) fail(where, "expected an object");
    return j;
  }
  const json& array(const json& j, const std::string& where) const {
    if (!j.is_array()) fail(where, "expected an array");
    return j;
  }

  void check_keys(const json& obj, const std::string& where,
                  std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      const std::string msg = "unknown key \"" + key + "\"";
      if (options_.keys == KeyPolicy::strict) fail(where, msg);
      if (options_.warnings) options_.warnings->push_back(source_ + ": " + where + ": " + msg + " ignored");
    }
  }

  const json* find(const json& obj, const char* key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }
  const json& require(const json& obj, const char* key, const std::string& where) const {
    const json* v = find(obj, key);
    if (!v) fail(where, std::string("missing key \"") + key + "\"");
    return *v;
  }

  double number(const json& v, const std::string& where) const {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
  }
  double number(const json& obj, const char* key, const std::string& where) const {
    return number(require(obj, key, where), where + "." + key);
  }
  double number_or(const json& obj, const char* key, double fallback, const std::string& where) const {
    const json* v = find(obj, key);
    return v ? number(*v, where + "." + key) : fallback;
  }
  int integer_or(const json& obj, const char* key, int fallback, const std::string& where) const {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(where + "." + key, "expected an integer");
    return v->get<int>();
  }
  std::string string(const json& obj, const char* key, const std::string& where) const {
    const json& v = require(obj, key, where);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
  }

  TimeSeries series(const json& v, const std::string& where, double factor) const {
    if (v.is_number()) return TimeSeries::constant(v.get<double>() * factor);
    if (!v.is_array() || v.empty()) fail(where, "expected a number or a non-empty list of [t_hours, value]");
    std::vector<std::pair<double, double>> points;
    for (const auto& p : v) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        fail(where, "breakpoints must be [t_hours, value] pairs");
      }
      points.emplace_back(p[0].get<double>(), p[1].get<double>() * factor);
    }
    try {
      return TimeSeries(std::move(points));
    } catch (const InputError& e) {
      fail(where, e.what());
    }
  }

 private:
  const LoadOptions& options_;
  std::string source_;
};

std::string item(const char* list, std::size_t i, const json& obj) {
  std::string where = std::string(list) + "[" + std::to_string(i) + "]";
  auto it = obj.find("id");
  if (it != obj.end() && it->is_string()) where += " (\"" + it->get<std::string>() + "\")";
  return where;
}

ordered_json series_json(const TimeSeries& s, double factor) {
  const auto& pts = s.points();
  if (pts.size() == 1 && pts.front().first == 0.0) return pts.front().second / factor;
  ordered_json out = ordered_json::array();
  for (const auto& [t, v] : pts) out.push_back({t, v / factor});
  return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw InputError("cannot read " + path.string());
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("cannot write " + path.string());
}

// ---------------------------------------------------------------------------------------------
// Network

Network parse_network(std::string_view text, const LoadOptions& options, std::string_view source) {
  const json root = parse_json(text, source);
  const Reader r(options, source);
  r.object(root, "network");
  r.check_keys(root, "network",
               {"constants", "per_unit", "gas_nodes", "pipes", "compressors", "busses", "lines", "plants"});

  Network n;
  if (const json* c = r.find(root, "constants")) {
    r.object(*c, "constants");
    r.check_keys(*c, "constants", {"kappa", "gamma", "eta"});
    n.constants.kappa = r.number_or(*c, "kappa", n.constants.kappa, "constants");
    n.constants.gamma = r.number_or(*c, "gamma", n.constants.gamma, "constants");
    n.constants.eta = r.number_or(*c, "eta", n.constants.eta, "constants");
  }
  if (const json* pu = r.find(root, "per_unit")) {
    r.object(*pu, "per_unit");
    r.check_keys(*pu, "per_unit", {"base_power_MVA", "base_voltage_kV"});
    n.per_unit.base_power = r.number_or(*pu, "base_power_MVA", n.per_unit.base_power / 1e6, "per_unit") * 1e6;
    n.per_unit.base_voltage =
        r.number_or(*pu, "base_voltage_kV", n.per_unit.base_voltage / 1e3, "per_unit") * 1e3;
  }

  const auto& nodes = r.array(r.require(root, "gas_nodes", "network"), "gas_nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = item("gas_nodes", i, nodes[i]);
    r.object(nodes[i], where);
    r.check_keys(nodes[i], where, {"id", "kind"});
    GasNode node;
    node.id = r.string(nodes[i], "id", where);
    const auto kind = r.string(nodes[i], "kind", where);
    const auto parsed = parse_node_kind(kind);
    if (!parsed) {
      r.fail(where, "unknown node kind \"" + kind +
                        "\" (junction, pressure-boundary, flow-boundary, power-coupling)");
    }
    node.kind = *parsed;
    n.gas_nodes.push_back(std::move(node));
  }

  const auto& pipes = r.array(r.require(root, "pipes", "network"), "pipes");
  for (std::size_t i = 0; i < pipes.size(); ++i) {
    const std::string where = item("pipes", i, pipes[i]);
    r.object(pipes[i], where);
    r.check_keys(pipes[i], where,
                 {"id", "from", "to", "length_m", "diameter_m", "roughness_m", "cell_count"});
    Pipe p;
    p.id = r.string(pipes[i], "id", where);
    p.from_node = r.string(pipes[i], "from", where);
    p.to_node = r.string(pipes[i], "to", where);
    p.length = r.number(pipes[i], "length_m", where);
    p.diameter = r.number_or(pipes[i], "diameter_m", kDefaultDiameter, where);
    p.roughness = r.number_or(pipes[i], "roughness_m", kDefaultRoughness, where);
    p.cell_count = r.integer_or(pipes[i], "cell_count", p.length > 0.0 ? default_cell_count(p.length) : 1, where);
    n.pipes.push_back(std::move(p));
  }

  if (const json* comps = r.find(root, "compressors")) {
    r.array(*comps, "compressors");
    for (std::size_t i = 0; i < comps->size(); ++i) {
      const json& c = (*comps)[i];
      const std::string where = item("compressors", i, c);
      r.object(c, where);
      r.check_keys(c, where, {"id", "from", "to", "cost"});
      CompressorArc arc;
      arc.id = r.string(c, "id", where);
      arc.from_node = r.string(c, "from", where);
      arc.to_node = r.string(c, "to", where);
      if (const json* cost = r.find(c, "cost")) {
        const std::string cw = where + ".cost";
        r.object(*cost, cw);
        r.check_keys(*cost, cw, {"d0", "d1", "d2"});
        arc.cost.d0 = r.number_or(*cost, "d0", arc.cost.d0, cw);
        arc.cost.d1 = r.number_or(*cost, "d1", arc.cost.d1, cw);
        arc.cost.d2 = r.number_or(*cost, "d2", arc.cost.d2, cw);
      }
      n.compressors.push_back(std::move(arc));
    }
  }

  if (const json* busses = r.find(root, "busses")) {
    r.array(*busses, "busses");
    for (std::size_t i = 0; i < busses->size(); ++i) {
      const json& b = (*busses)[i];
      const std::string where = item("busses", i, b);
      r.object(b, where);
      r.check_keys(b, where, {"id", "kind", "G", "B"});
      Bus bus;
      bus.id = r.string(b, "id", where);
      const auto kind = r.string(b, "kind", where);
      const auto parsed = parse_bus_kind(kind);
      if (!parsed) r.fail(where, "unknown bus kind \"" + kind + "\" (slack, generator/PV, load/PQ)");
      bus.kind = *parsed;
      bus.self_conductance = r.number_or(b, "G", 0.0, where);
      bus.self_susceptance = r.number_or(b, "B", 0.0, where);
      n.busses.push_back(std::move(bus));
    }
  }

  if (const json* lines = r.find(root, "lines")) {
    r.array(*lines, "lines");
    for (std::size_t i = 0; i < lines->size(); ++i) {
      const json& l = (*lines)[i];
      const std::string where = item("lines", i, l);
      r.object(l, where);
      r.check_keys(l, where, {"id", "from", "to", "G", "B"});
      TransmissionLine line;
      line.id = r.string(l, "id", where);
      line.from_bus = r.string(l, "from", where);
      line.to_bus = r.string(l, "to", where);
      line.conductance = r.number_or(l, "G", 0.0, where);
      line.susceptance = r.number_or(l, "B", 0.0, where);
      n.lines.push_back(std::move(line));
    }
  }

  if (const json* plants = r.find(root, "plants")) {
    r.array(*plants, "plants");
    for (std::size_t i = 0; i < plants->size(); ++i) {
      const json& pl = (*plants)[i];
      const std::string where = "plants[" + std::to_string(i) + "]";
      r.object(pl, where);
      r.check_keys(pl, where, {"gas_node", "bus", "a0", "a1", "a2", "reference_density"});
      GasPowerPlant plant;
      plant.gas_node = r.string(pl, "gas_node", where);
      plant.bus = r.string(pl, "bus", where);
      plant.a0 = r.number_or(pl, "a0", plant.a0, where);
      plant.a1 = r.number_or(pl, "a1", plant.a1, where);
      plant.a2 = r.number_or(pl, "a2", plant.a2, where);
      plant.reference_density = r.number_or(pl, "reference_density", plant.reference_density, where);
      n.plants.push_back(std::move(plant));
    }
  }

  if (options.validate) {
    const auto report = validate_network(n);
    if (!report.ok()) throw InputError(std::string(source) + ": invalid network\n" + report.to_string());
  }
  return n;
}

Network load_network(const std::filesystem::path& path, const LoadOptions& options) {
  return parse_network(read_file(path), options, path.string());
}

std::string serialize_network(const Network& n) {
  ordered_json root;
  root["constants"] = {{"kappa", n.constants.kappa}, {"gamma", n.constants.gamma}, {"eta", n.constants.eta}};
  root["per_unit"] = {{"base_power_MVA", n.per_unit.base_power / 1e6},
                      {"base_voltage_kV", n.per_unit.base_voltage / 1e3}};
  root["gas_nodes"] = ordered_json::array();
  for (const auto& node : n.gas_nodes) {
    root["gas_nodes"].push_back({{"id", node.id}, {"kind", std::string(to_string(node.kind))}});
  }
  root["pipes"] = ordered_json::array();
  for (const auto& p : n.pipes) {
    root["pipes"].push_back({{"id", p.id},
                             {"from", p.from_node},
                             {"to", p.to_node},
                             {"length_m", p.length},
                             {"diameter_m", p.diameter},
                             {"roughness_m", p.roughness},
                             {"cell_count", p.cell_count}});
  }
  root["compressors"] = ordered_json::array();
  for (const auto& c : n.compressors) {
    root["compressors"].push_back({{"id", c.id},
                                   {"from", c.from_node},
                                   {"to", c.to_node},
                                   {"cost", {{"d0", c.cost.d0}, {"d1", c.cost.d1}, {"d2", c.cost.d2}}}});
  }
  root["busses"] = ordered_json::array();
  for (const auto& b : n.busses) {
    root["busses"].push_back({{"id", b.id},
                              {"kind", std::string(to_string(b.kind))},
                              {"G", b.self_conductance},
                              {"B", b.self_susceptance}});
  }
  root["lines"] = ordered_json::array();
  for (const auto& l : n.lines) {
    root["lines"].push_back(
        {{"id", l.id}, {"from", l.from_bus}, {"to", l.to_bus}, {"G", l.conductance}, {"B", l.susceptance}});
  }
  root["plants"] = ordered_json::array();
  for (const auto& p : n.plants) {
    root["plants"].push_back({{"gas_node", p.gas_node},
                              {"bus", p.bus},
                              {"a0", p.a0},
                              {"a1", p.a1},
                              {"a2", p.a2},
                              {"reference_density", p.reference_density}});
  }
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------------------------
// Scenario

Scenario parse_scenario(std::string_view text, const Network& network, const LoadOptions& options,
                        std::string_view source) {
  const json root = parse_json(text, source);
  const Reader r(options, source);
  r.object(root, "scenario");
  r.check_keys(root, "scenario",
               {"horizon_hours", "dt_minutes", "boundary", "pressure_bounds_bar", "control_bounds_bar",
                "optimizer", "newton"});

  Scenario s;
  s.horizon_hours = r.number_or(root, "horizon_hours", s.horizon_hours, "scenario");
  s.dt_minutes = r.number_or(root, "dt_minutes", s.dt_minutes, "scenario");

  const auto& boundary = r.object(r.require(root, "boundary", "scenario"), "boundary");
  for (const auto& [id, entry] : boundary.items()) {
    const std::string where = "boundary.\"" + id + "\"";
    r.object(entry, where);
    if (network.node_index(id)) {
      r.check_keys(entry, where, {"pressure_bar", "outflow"});
      if (const json* v = r.find(entry, "pressure_bar")) {
        s.boundary.pressure[id] = r.series(*v, where + ".pressure_bar", kBar);
      }
      if (const json* v = r.find(entry, "outflow")) s.boundary.outflow[id] = r.series(*v, where + ".outflow", 1.0);
    } else if (network.bus_index(id)) {
      r.check_keys(entry, where, {"V", "phi", "P", "Q"});
      if (const json* v = r.find(entry, "V")) s.boundary.V[id] = r.series(*v, where + ".V", 1.0);
      if (const json* v = r.find(entry, "phi")) s.boundary.phi[id] = r.series(*v, where + ".phi", 1.0);
      if (const json* v = r.find(entry, "P")) s.boundary.P[id] = r.series(*v, where + ".P", 1.0);
      if (const json* v = r.find(entry, "Q")) s.boundary.Q[id] = r.series(*v, where + ".Q", 1.0);
    } else {
      r.fail(where, "no gas node or bus with this id");
    }
  }

  if (const json* bounds = r.find(root, "pressure_bounds_bar")) {
    r.object(*bounds, "pressure_bounds_bar");
    for (const auto& [id, v] : bounds->items()) {
      s.pressure_bounds[id] = r.number(v, "pressure_bounds_bar.\"" + id + "\"") * kBar;
    }
  }
  if (const json* cb = r.find(root, "control_bounds_bar")) {
    r.object(*cb, "control_bounds_bar");
    r.check_keys(*cb, "control_bounds_bar", {"min", "max"});
    s.control_bounds.min = r.number_or(*cb, "min", s.control_bounds.min / kBar, "control_bounds_bar") * kBar;
    s.control_bounds.max = r.number_or(*cb, "max", s.control_bounds.max / kBar, "control_bounds_bar") * kBar;
  }
  if (const json* o = r.find(root, "optimizer")) {
    const std::string w = "optimizer";
    r.object(*o, w);
    r.check_keys(*o, w,
                 {"mu0", "mu_factor", "mu_min", "tol", "max_outer", "max_inner", "lbfgs_memory",
                  "feasibility_tol_bar", "start_step_bar", "start_margin_bar", "objective_scale"});
    auto& os = s.optimizer;
    os.mu0 = r.number_or(*o, "mu0", os.mu0, w);
    os.mu_factor = r.number_or(*o, "mu_factor", os.mu_factor, w);
    os.mu_min = r.number_or(*o, "mu_min", os.mu_min, w);
    os.tol = r.number_or(*o, "tol", os.tol, w);
    os.max_outer = r.integer_or(*o, "max_outer", os.max_outer, w);
    os.max_inner = r.integer_or(*o, "max_inner", os.max_inner, w);
    os.lbfgs_memory = r.integer_or(*o, "lbfgs_memory", os.lbfgs_memory, w);
    os.feasibility_tol_bar = r.number_or(*o, "feasibility_tol_bar", os.feasibility_tol_bar, w);
    os.start_step_bar = r.number_or(*o, "start_step_bar", os.start_step_bar, w);
    os.start_margin_bar = r.number_or(*o, "start_margin_bar", os.start_margin_bar, w);
    os.objective_scale = r.number_or(*o, "objective_scale", os.objective_scale, w);
  }
  if (const json* nw = r.find(root, "newton")) {
    const std::string w = "newton";
    r.object(*nw, w);
    r.check_keys(*nw, w, {"tol", "steady_tol", "max_iter", "max_halvings"});
    auto& ns = s.newton;
    ns.tol = r.number_or(*nw, "tol", ns.tol, w);
    ns.steady_tol = r.number_or(*nw, "steady_tol", ns.steady_tol, w);
    ns.max_iter = r.integer_or(*nw, "max_iter", ns.max_iter, w);
    ns.max_halvings = r.integer_or(*nw, "max_halvings", ns.max_halvings, w);
  }

  try {
    check_scenario(network, s);
    BoundarySchedule(network, s.boundary);
  } catch (const InputError& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const Network& network, const LoadOptions& options) {
  return parse_scenario(read_file(path), network, options, path.string());
}

std::string serialize_scenario(const Scenario& s) {
  ordered_json root;
  root["horizon_hours"] = s.horizon_hours;
  root["dt_minutes"] = s.dt_minutes;

  // Group the per-quantity maps by id; std::map keeps the output order deterministic.
  std::map<std::string, ordered_json> by_id;
  const auto add = [&](const std::map<std::string, TimeSeries>& m, const char* key, double factor) {
    for (const auto& [id, series] : m) by_id[id][key] = series_json(series, factor);
  };
  add(s.boundary.pressure, "pressure_bar", kBar);
  add(s.boundary.outflow, "outflow", 1.0);
  add(s.boundary.V, "V", 1.0);
  add(s.boundary.phi, "phi", 1.0);
  add(s.boundary.P, "P", 1.0);
  add(s.boundary.Q, "Q", 1.0);
  root["boundary"] = ordered_json::object();
  for (auto& [id, entry] : by_id) root["boundary"][id] = std::move(entry);

  root["pressure_bounds_bar"] = ordered_json::object();
  for (const auto& [id, p] : s.pressure_bounds) root["pressure_bounds_bar"][id] = p / kBar;
  root["control_bounds_bar"] = {{"min", s.control_bounds.min / kBar}, {"max", s.control_bounds.max / kBar}};

  const auto& o = s.optimizer;
  root["optimizer"] = {{"mu0", o.mu0},
                       {"mu_factor", o.mu_factor},
                       {"mu_min", o.mu_min},
                       {"tol", o.tol},
                       {"max_outer", o.max_outer},
                       {"max_inner", o.max_inner},
                       {"lbfgs_memory", o.lbfgs_memory},
                       {"feasibility_tol_bar", o.feasibility_tol_bar},
                       {"start_step_bar", o.start_step_bar},
                       {"start_margin_bar", o.start_margin_bar},
                       {"objective_scale", o.objective_scale}};
  const auto& nw = s.newton;
  root["newton"] = {{"tol", nw.tol},
                    {"steady_tol", nw.steady_tol},
                    {"max_iter", nw.max_iter},
                    {"max_halvings", nw.max_halvings}};
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------------------------
// Control CSV

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

ControlVector parse_control_csv(std::string_view csv, const Simulator& sim, std::string_view source) {
  const std::size_t nc = sim.model().compressors();
  const auto fail = [&](std::size_t line, const std::string& what) -> void {
    throw InputError(std::string(source) + ":" + std::to_string(line) + ": " + what);
  };

  std::vector<std::vector<std::pair<double, double>>> points(nc);
  bool header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto end = csv.find('\n', pos);
    const auto line = trim(csv.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end == std::string_view::npos ? csv.size() + 1 : end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != nc + 1) {
      fail(line_no, "expected " + std::to_string(nc + 1) + " columns (t_hours and one u_bar per compressor)");
    }
    if (!header) {
      if (trim(cells[0]) != "t_hours") fail(line_no, "header must start with t_hours");
      header = true;
      continue;
    }
    double t = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = trim(cells[c]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        fail(line_no, "not a number: \"" + std::string(cell) + "\"");
      }
      if (c == 0) {
        t = v;
      } else {
        points[c - 1].emplace_back(t, v * kBar);
      }
    }
  }
  if (!header) throw InputError(std::string(source) + ": empty control file");
  if (nc > 0 && points.front().empty()) throw InputError(std::string(source) + ": no control rows");

  auto control = sim.zero_control();
  for (std::size_t c = 0; c < nc; ++c) {
    TimeSeries series;
    try {
      series = TimeSeries(points[c]);
    } catch (const InputError& e) {
      throw InputError(std::string(source) + ": " + e.what());
    }
    for (std::size_t j = 0; j < control.time_levels(); ++j) control(j, c) = series.at(sim.scenario().time_hours(j));
  }
  return control;
}

ControlVector load_control(const std::filesystem::path& path, const Simulator& sim) {
  return parse_control_csv(read_file(path), sim, path.string());
}

std::string control_csv(const Simulator& sim, const ControlVector& control) {
  const auto& comps = sim.network().compressors;
  std::string out = "t_hours";
  for (const auto& c : comps) out += comps.size() == 1 ? ",u_bar" : ",u_bar_" + c.id;
  out += '\n';
  for (std::size_t j = 0; j < control.time_levels(); ++j) {
    out += format_number(sim.scenario().time_hours(j));
    for (std::size_t c = 0; c < comps.size(); ++c) out += ',' + format_number(control(j, c) / kBar);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Results

std::string gas_nodes_csv(const Simulator& sim, const Trajectory& traj) {
  const auto& model = sim.model();
  const auto& nodes = sim.network().gas_nodes;
  std::string out = "t_hours,node,p_bar,q\n";
  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    const auto& y = traj.states[j].values;
    const auto boundary = sim.boundary(j);
    const std::string t = format_number(traj.time_hours(j));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double q = model.node_injection(i, y, boundary) / model.node_area(i);
      out += t + ',' + nodes[i].id + ',' + format_number(y(model.index().node_pressure(i)) / kBar) + ',' +
             format_number(q) + '\n';
    }
  }
  return out;
}

std::string busses_csv(const Simulator& sim, const Trajectory& traj) {
  const auto& ix = sim.model().index();
  const auto& busses = sim.network().busses;
  std::string out = "t_hours,bus,P,Q,V,phi\n";
  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    const auto& y = traj.states[j].values;
    const std::string t = format_number(traj.time_hours(j));
    for (std::size_t k = 0; k < busses.size(); ++k) {
      using power::Quantity;
      out += t + ',' + busses[k].id + ',' + format_number(y(ix.bus(k, Quantity::P))) + ',' +
             format_number(y(ix.bus(k, Quantity::Q))) + ',' + format_number(y(ix.bus(k, Quantity::V))) + ',' +
             format_number(y(ix.bus(k, Quantity::phi))) + '\n';
    }
  }
  return out;
}

std::string iteration_log_csv(const std::vector<IterationLogEntry>& log) {
  std::string out = "iter,mu,objective,min_margin_bar,grad_norm\n";
  for (const auto& e : log) {
    out += std::to_string(e.iter) + ',' + format_number(e.mu) + ',' + format_number(e.objective) + ',' +
           format_number(e.min_margin_bar) + ',' + format_number(e.grad_norm) + '\n';
  }
  return out;
}

std::string summary_json(const Simulator& sim, const Trajectory& traj, const OptimizationResult* result) {
  const auto& nw = sim.network();
  const auto& ix = sim.model().index();
  ordered_json root;
  root["steps"] = traj.steps();
  root["dt_minutes"] = round9(traj.dt / 60.0);
  root["horizon_hours"] = round9(traj.time_hours(traj.steps()));

  double cost = std::numeric_limits<double>::quiet_NaN();
  try {
    cost = objective(sim, traj);
  } catch (const OperatingRangeError&) {
    // reported as null: the trajectory leaves the range of the compressor cost model
  }
  root["objective"] = number_or_null(cost);

  double min_margin = std::numeric_limits<double>::infinity();
  ordered_json bounds = ordered_json::array();
  for (const auto& [id, p_min] : sim.scenario().pressure_bounds) {
    const auto col = ix.node_pressure(*nw.node_index(id));
    double p_lowest = std::numeric_limits<double>::infinity();
    double t_lowest = 0.0;
    ordered_json first_violation = nullptr;
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
      const double p = traj.states[j].values(col);
      if (p < p_lowest) {
        p_lowest = p;
        t_lowest = traj.time_hours(j);
      }
      if (p < p_min && first_violation.is_null()) first_violation = round9(traj.time_hours(j));
    }
    min_margin = std::min(min_margin, (p_lowest - p_min) / kBar);
    bounds.push_back({{"node", id},
                      {"p_min_bar", round9(p_min / kBar)},
                      {"min_p_bar", round9(p_lowest / kBar)},
                      {"t_min_hours", round9(t_lowest)},
                      {"min_margin_bar", round9((p_lowest - p_min) / kBar)},
                      {"first_violation_hours", first_violation}});
  }
  root["min_margin_bar"] = number_or_null(min_margin);
  root["bounds"] = bounds;

  ordered_json initial = ordered_json::object();
  for (std::size_t i = 0; i < nw.gas_nodes.size(); ++i) {
    initial[nw.gas_nodes[i].id] = round9(traj.states.front().values(ix.node_pressure(i)) / kBar);
  }
  root["initial_pressure_bar"] = initial;

  ordered_json newton = ordered_json::array();
  for (int it : traj.newton_iterations) newton.push_back(it);
  root["newton_iterations"] = newton;

  if (result) {
    root["optimizer"] = {{"iterations", result->log.size()},
                         {"evaluations", result->evaluations},
                         {"final_mu", round9(result->final_mu)},
                         {"final_grad_norm", round9(result->final_grad_norm)},
                         {"outer_objectives", [&] {
                            ordered_json a = ordered_json::array();
                            for (double v : result->outer_objectives) a.push_back(round9(v));
                            return a;
                          }()}};
  }
  return root.dump(2) + "\n";
}

void write_results(const std::filesystem::path& dir, const Simulator& sim, const Trajectory& traj,
                   const OptimizationResult* result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
  write_file(dir / "gas_nodes.csv", gas_nodes_csv(sim, traj));
  write_file(dir / "busses.csv", busses_csv(sim, traj));
  write_file(dir / "control.csv", control_csv(sim, traj.control));
  write_file(dir / "summary.json", summary_json(sim, traj, result));
  if (result) write_file(dir / "iterations.csv", iteration_log_csv(result->log));
}

}  // namespace gaspower::io
