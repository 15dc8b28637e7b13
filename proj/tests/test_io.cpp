#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaspower/error.hpp"
#include "gaspower/fixture.hpp"
#include "gaspower/io.hpp"
#include "helpers.hpp"

using namespace gaspower;
using nlohmann::json;

namespace {

const std::filesystem::path kData = GASPOWER_DATA_DIR;

std::string network_text() { return io::read_file(kData / "fixture_network.json"); }
std::string scenario_text() { return io::read_file(kData / "fixture_scenario.json"); }

std::string expect_input_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected InputError";
  return {};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gaspower_io_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(NetworkFile, FixtureLoads) {
  const auto n = io::load_network(kData / "fixture_network.json");
  EXPECT_EQ(n.pipes.size(), 6u);
  EXPECT_EQ(n.compressors.size(), 1u);
  EXPECT_EQ(n.busses.size(), 9u);
  EXPECT_EQ(n.lines.size(), 9u);
  EXPECT_EQ(n.plants.size(), 1u);
  EXPECT_EQ(n, fixture::network());
  EXPECT_EQ(n.pipes[*n.pipe_index("P25")].cell_count, 66);
}

TEST(NetworkFile, MissingCellCountUsesDefault) {
  auto j = json::parse(network_text());
  for (auto& p : j["pipes"]) p.erase("cell_count");
  const auto n = io::parse_network(j.dump());
  EXPECT_EQ(n.pipes[*n.pipe_index("P25")].cell_count, 66);
  EXPECT_EQ(n, fixture::network());
}

TEST(NetworkFile, NegativeLengthIsRejected) {
  auto j = json::parse(network_text());
  j["pipes"][0]["length_m"] = -20322.0;
  const auto what = expect_input_error([&] { io::parse_network(j.dump()); });
  EXPECT_NE(what.find("length must be positive"), std::string::npos) << what;
}

TEST(NetworkFile, RoundTrip) {
  const auto n = fixture::network();
  const auto text = io::serialize_network(n);
  EXPECT_EQ(io::parse_network(text), n);
  EXPECT_EQ(io::serialize_network(io::parse_network(text)), text);
}

TEST(NetworkFile, ParseErrorReportsLineAndColumn) {
  const std::string text = "{\n  \"gas_nodes\": [\n    {\"id\": \"a\",, \"kind\": \"junction\"}\n  ]\n}\n";
  const auto what = expect_input_error([&] { io::parse_network(text, {}, "net.json"); });
  EXPECT_EQ(what.rfind("net.json:3:", 0), 0u) << what;
  EXPECT_NE(what.find("JSON parse error"), std::string::npos);
}

TEST(NetworkFile, UnknownKeysStrictAndLax) {
  // Property: an unknown key anywhere in the document is rejected in strict mode and merely
  // reported in lax mode.
  const auto base = json::parse(network_text());
  std::mt19937 rng(1234);
  std::vector<json::json_pointer> objects{json::json_pointer(""), json::json_pointer("/constants"),
                                          json::json_pointer("/per_unit"),
                                          json::json_pointer("/compressors/0/cost"),
                                          json::json_pointer("/plants/0")};
  for (const char* list : {"gas_nodes", "pipes", "compressors", "busses", "lines"}) {
    for (std::size_t i = 0; i < base[list].size(); ++i) {
      objects.emplace_back("/" + std::string(list) + "/" + std::to_string(i));
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, objects.size() - 1);
  std::uniform_int_distribution<int> letter('a', 'z');
  for (int trial = 0; trial < 40; ++trial) {
    auto j = base;
    std::string key = "zz_";
    for (int k = 0; k < 6; ++k) key += static_cast<char>(letter(rng));
    j[objects[pick(rng)]][key] = trial;

    const auto what = expect_input_error([&] { io::parse_network(j.dump()); });
    EXPECT_NE(what.find("unknown key \"" + key + "\""), std::string::npos) << what;

    std::vector<std::string> warnings;
    const auto n = io::parse_network(j.dump(), {io::KeyPolicy::lax, &warnings});
    EXPECT_EQ(n, fixture::network());
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find(key), std::string::npos);
  }
}

TEST(ScenarioFile, FixtureLoads) {
  const auto n = fixture::network();
  const auto s = io::load_scenario(kData / "fixture_scenario.json", n);
  EXPECT_EQ(s, fixture::scenario());
  EXPECT_NEAR(s.boundary.outflow.at("S25").at(5.0), 100.0 * 0.785 / 0.2827433, 1e-4);
  EXPECT_NEAR(s.boundary.outflow.at("S25").at(0.0), 277.64, 5e-3);
  EXPECT_NEAR(s.boundary.P.at("N5").at(1.25), -1.35, 1e-12);
  EXPECT_NEAR(s.boundary.Q.at("N5").at(1.25), -0.45, 1e-12);
  EXPECT_EQ(s.pressure_bounds.at("S25"), 41e5);
  EXPECT_EQ(s.steps(), 48u);
}

TEST(ScenarioFile, RoundTrip) {
  const auto s = fixture::scenario();
  const auto text = io::serialize_scenario(s);
  EXPECT_EQ(io::parse_scenario(text, fixture::network()), s);
}

TEST(ScenarioFile, MissingSlackVoltageIsRejected) {
  auto j = json::parse(scenario_text());
  j["boundary"]["N1"].erase("V");
  const auto what = expect_input_error([&] { io::parse_scenario(j.dump(), fixture::network()); });
  EXPECT_NE(what.find("N1"), std::string::npos) << what;
}

TEST(ScenarioFile, UnknownBoundaryIdIsRejected) {
  auto j = json::parse(scenario_text());
  j["boundary"]["S99"] = {{"pressure_bar", 50.0}};
  const auto what = expect_input_error([&] { io::parse_scenario(j.dump(), fixture::network()); });
  EXPECT_NE(what.find("S99"), std::string::npos) << what;
}

TEST(ScenarioFile, InconsistentTimeGridIsRejected) {
  auto j = json::parse(scenario_text());
  j["dt_minutes"] = 7.0;
  expect_input_error([&] { io::parse_scenario(j.dump(), fixture::network()); });
}

TEST(ControlFile, InterpolatesOntoTimeGrid) {
  const Simulator sim(fixture::network(), fixture::scenario());
  const auto u = io::parse_control_csv("t_hours,u_bar\n0,1\n2,3\n12,3\n", sim);
  ASSERT_EQ(u.time_levels(), 49u);
  EXPECT_DOUBLE_EQ(u(0, 0), 1e5);
  EXPECT_DOUBLE_EQ(u(2, 0), 1.5e5);
  EXPECT_DOUBLE_EQ(u(8, 0), 3e5);
  EXPECT_DOUBLE_EQ(u(48, 0), 3e5);
  EXPECT_EQ(io::parse_control_csv(io::control_csv(sim, u), sim), u);
}

TEST(ControlFile, MalformedInputIsRejected) {
  const Simulator sim(fixture::network(), fixture::scenario());
  expect_input_error([&] { io::parse_control_csv("", sim); });
  expect_input_error([&] { io::parse_control_csv("time,u_bar\n0,1\n", sim); });
  expect_input_error([&] { io::parse_control_csv("t_hours,u_bar\n0,1,2\n", sim); });
  const auto what = expect_input_error([&] { io::parse_control_csv("t_hours,u_bar\n0,abc\n", sim, "u.csv"); });
  EXPECT_EQ(what.rfind("u.csv:2:", 0), 0u) << what;
}

TEST(Results, FilesHaveExpectedShapeAndAreDeterministic) {
  const Simulator sim(fixture::network(), fixture::scenario());
  const auto traj = sim.simulate(sim.zero_control());
  const auto a = fresh_dir("a"), b = fresh_dir("b");
  io::write_results(a, sim, traj);
  io::write_results(b, sim, sim.simulate(sim.zero_control()));

  for (const char* name : {"gas_nodes.csv", "busses.csv", "control.csv", "summary.json"}) {
    ASSERT_TRUE(std::filesystem::exists(a / name)) << name;
    EXPECT_EQ(io::read_file(a / name), io::read_file(b / name)) << name;
  }
  EXPECT_FALSE(std::filesystem::exists(a / "iterations.csv"));

  const auto gas = lines_of(io::read_file(a / "gas_nodes.csv"));
  EXPECT_EQ(gas.front(), "t_hours,node,p_bar,q");
  EXPECT_EQ(gas.size(), 1u + 49u * 7u);
  const auto bus = lines_of(io::read_file(a / "busses.csv"));
  EXPECT_EQ(bus.front(), "t_hours,bus,P,Q,V,phi");
  EXPECT_EQ(bus.size(), 1u + 49u * 9u);
  EXPECT_EQ(lines_of(io::read_file(a / "control.csv")).size(), 50u);

  const auto summary = json::parse(io::read_file(a / "summary.json"));
  EXPECT_EQ(summary["steps"], 48);
  EXPECT_LT(summary["min_margin_bar"].get<double>(), 0.0);
  const double p25 = summary["initial_pressure_bar"]["S25"].get<double>();
  bool found = false;
  for (const auto& line : gas) {
    if (line.rfind("0,S25,", 0) == 0) {
      found = true;
      EXPECT_NEAR(std::stod(line.substr(6)), p25, 1e-6);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_LT(summary["bounds"][0]["min_p_bar"].get<double>(), 41.0);

  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Results, IterationLogFormat) {
  const std::vector<IterationLogEntry> log{{1, 100.0, 2.5, 0.3, 1e-3}, {2, 20.0, 2.25, 0.1, 5e-5}};
  const auto lines = lines_of(io::iteration_log_csv(log));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "iter,mu,objective,min_margin_bar,grad_norm");
  EXPECT_EQ(lines[1], "1,100,2.5,0.3,0.001");
}

TEST(Files, MissingFileIsAnInputError) {
  EXPECT_THROW(io::read_file(kData / "does_not_exist.json"), InputError);
}
