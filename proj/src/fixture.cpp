#include "gaspower/fixture.hpp"

#include <tuple>

namespace gaspower::fixture {

namespace {

constexpr double kBar = 1e5;

}  // namespace

double outflow_flux() { return kOutflowVolume * kReferenceDensity / Pipe{}.area(); }

Network network() {
  Network n;
  n.gas_nodes = {{"S5", NodeKind::pressure_boundary}, {"S0", NodeKind::junction},
                 {"S17", NodeKind::junction},         {"S4", NodeKind::power_coupling},
                 {"S8", NodeKind::junction},          {"S20", NodeKind::junction},
                 {"S25", NodeKind::flow_boundary}};

  struct Row {
    const char* id;
    const char* from;
    const char* to;
    double km;
  };
  for (const Row& r : {Row{"P10", "S4", "S20", 20.322}, Row{"P20", "S5", "S0", 20.635},
                       Row{"P21", "S17", "S4", 10.586}, Row{"P22", "S17", "S8", 10.452},
                       Row{"P24", "S8", "S20", 19.303}, Row{"P25", "S20", "S25", 66.037}}) {
    Pipe p;
    p.id = r.id;
    p.from_node = r.from;
    p.to_node = r.to;
    p.length = r.km * 1000.0;
    p.cell_count = default_cell_count(p.length);
    n.pipes.push_back(p);
  }

  n.compressors.push_back({"CS1", "S0", "S17", CompressorCostModel{}});

  n.busses = {{"N1", BusKind::slack, 0.0000, -17.3611},    {"N2", BusKind::generator, 0.0000, -16.0000},
              {"N3", BusKind::generator, 0.0000, -17.0648}, {"N4", BusKind::load, 3.3074, -39.3089},
              {"N5", BusKind::load, 3.2242, -15.8409},      {"N6", BusKind::load, 2.4371, -32.1539},
              {"N7", BusKind::load, 2.7722, -23.3032},      {"N8", BusKind::load, 2.8047, -35.4456},
              {"N9", BusKind::load, 2.5528, -17.3382}};
  n.lines = {{"TL14", "N1", "N4", 0.0000, 17.3611}, {"TL45", "N4", "N5", -1.9422, 10.5107},
             {"TL56", "N5", "N6", -1.2820, 5.5882}, {"TL36", "N3", "N6", 0.0000, 17.0648},
             {"TL67", "N6", "N7", -1.1551, 9.7843}, {"TL78", "N7", "N8", -1.6171, 13.6980},
             {"TL82", "N8", "N2", 0.0000, 16.0000}, {"TL89", "N8", "N9", -1.1876, 5.9751},
             {"TL94", "N9", "N4", -1.3652, 11.6041}};

  n.plants.push_back({"S4", "N1", 2.0, 5.0, 10.0, kReferenceDensity});
  return n;
}

Scenario scenario() {
  Scenario s;
  s.horizon_hours = 12.0;
  s.dt_minutes = 15.0;

  auto& b = s.boundary;
  b.pressure["S5"] = TimeSeries::constant(60.0 * kBar);
  b.outflow["S25"] = TimeSeries::constant(outflow_flux());

  // Initial grid data in MW / MVAr, converted with the 100 MW base.
  const double base = Network{}.per_unit.base_power / 1e6;
  b.V["N1"] = TimeSeries::constant(1.0);
  b.phi["N1"] = TimeSeries::constant(0.0);
  b.P["N2"] = TimeSeries::constant(163.0 / base);
  b.V["N2"] = TimeSeries::constant(1.0);
  b.P["N3"] = TimeSeries::constant(85.0 / base);
  b.V["N3"] = TimeSeries::constant(1.0);
  for (const auto& [id, p, q] : {std::tuple{"N4", 0.0, 0.0}, std::tuple{"N6", 0.0, 0.0},
                                 std::tuple{"N7", -100.0, -35.0}, std::tuple{"N8", 0.0, 0.0},
                                 std::tuple{"N9", -125.0, -50.0}}) {
    b.P[id] = TimeSeries::constant(p / base);
    b.Q[id] = TimeSeries::constant(q / base);
  }
  // Demand at N5 doubles linearly between 1 h and 1.5 h.
  b.P["N5"] = TimeSeries({{0.0, -90.0 / base}, {1.0, -90.0 / base}, {1.5, -180.0 / base}});
  b.Q["N5"] = TimeSeries({{0.0, -30.0 / base}, {1.0, -30.0 / base}, {1.5, -60.0 / base}});

  s.pressure_bounds["S25"] = 41.0 * kBar;
  s.control_bounds = {0.0, 30.0 * kBar};
  return s;
}

}  // namespace gaspower::fixture
