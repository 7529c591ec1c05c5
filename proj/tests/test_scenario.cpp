#include "mechsq/runner.hpp"
#include "mechsq/scenario.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace mechsq;

namespace {

std::string render(const Scenario& sc, const std::string& format = "csv") {
  std::ostringstream out;
  write_result(run_scenario(sc), sc, format, out);
  return out.str();
}

std::string body(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

// Column values of a CSV body keyed by header name.
std::vector<std::vector<std::string>> cells(const std::string& csv) {
  std::istringstream in(body(csv));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) row.push_back(c);
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  FAIL("no column " << name);
  return 0;
}

}  // namespace

TEST_CASE("every recipe survives a dump and re-parse") {
  for (const auto& r : figure_recipes()) {
    INFO(r.name);
    const Scenario back = parse_scenario(dump_scenario(r));
    CHECK(back == r);
    CHECK(dump_scenario(back) == dump_scenario(r));
  }
}

TEST_CASE("round trip keeps optional sections") {
  Scenario sc;
  sc.kind = Kind::Optimize;
  sc.params = {1.0, 1.0, 1.0, 10.0, 0.0, 2.5e5};
  sc.thermal = ThermalBathParams{0.01, 1.0};
  sc.objective = Objective::Thermal;
  sc.setup = PhysicalSetup{};
  sc.setup->L_c = 1e-3;
  sc.time.values = {0.0, 0.1, 0.30000000000000004};
  sc.output_format = "json";
  const Scenario back = parse_scenario(dump_scenario(sc));
  CHECK(back == sc);
  CHECK(back.setup->L_c == 1e-3);
  CHECK(back.time.values[2] == 0.30000000000000004);
}

TEST_CASE("syntax errors report line and column") {
  const std::string text = "{\n  \"kind\": \"simulate\",\n  \"params\": {\"delta\": 1,}\n}\n";
  try {
    parse_scenario(text);
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("line 3"));
  }
}

TEST_CASE("schema errors name the offending key") {
  auto message = [](const std::string& text) -> std::string {
    try {
      parse_scenario(text);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK_THAT(message(R"({"kind": "simulate", "params": {"detla": 1}, "time": {"t_max": 1, "samples": 3}})"),
             Catch::Matchers::ContainsSubstring("params: unknown key 'detla'"));
  CHECK_THAT(message(R"({"kind": "simulate", "params": {"delta": "one"}, "time": {"t_max": 1, "samples": 3}})"),
             Catch::Matchers::ContainsSubstring("params.delta"));
  CHECK_THAT(message(R"({"kind": "bogus"})"), Catch::Matchers::ContainsSubstring("kind"));
  CHECK_THAT(message(R"({"kind": "simulate", "time": {"t_max": 1, "samples": 3}, "extra": 1})"),
             Catch::Matchers::ContainsSubstring("unknown key 'extra'"));
  CHECK_THAT(message(R"({"kind": "simulate", "params": {"kappa": -1}, "time": {"t_max": 1, "samples": 3}})"),
             Catch::Matchers::ContainsSubstring("kappa"));
  CHECK_THAT(message(R"({"kind": "simulate", "initial": {"cavity_vacuum": false}, "time": {"t_max": 1, "samples": 3}})"),
             Catch::Matchers::ContainsSubstring("cavity_vacuum"));
}

TEST_CASE("kind-specific requirements") {
  CHECK_THROWS_AS(parse_scenario(R"({"kind": "simulate"})"), ConfigError);  // empty time grid
  CHECK_THROWS_AS(parse_scenario(R"({"kind": "simulate", "time": {"values": []}})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"kind": "simulate", "time": {"values": [0, 2, 1]}})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"kind": "wigner", "time": {"t_max": 1, "samples": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"kind": "squeezing-map", "map": {"x": [1], "y": [1e-3]}})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"kind": "feasibility"})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"kind": "simulate", "thermal_bath": true, "time": {"t_max": 1, "samples": 3}})"),
                  ConfigError);
  CHECK_NOTHROW(parse_scenario(R"({"kind": "stability-map", "map": {"x": {"lo": 1e-3, "hi": 1, "n": 4, "log": true}, "y": [0.1, 0.2]}})"));
}

TEST_CASE("log axes hit their end points exactly") {
  const Axis a{1e-4, 1.0, 61, true, {}};
  const auto v = a.points("x");
  REQUIRE(v.size() == 61);
  CHECK(v.front() == 1e-4);
  CHECK(v.back() == 1.0);
  CHECK(v[30] == Catch::Approx(1e-2).epsilon(1e-12));
}

TEST_CASE("simulate output is deterministic and echoes its input") {
  Scenario sc;
  sc.params = {1.0, 0.01, 0.2, 0.0, 0.0, 1.0};
  sc.n_bar_b_values = {0.0, 10.0};
  sc.time = {100.0, 51, {}};
  const std::string a = render(sc), b = render(sc);
  CHECK(a == b);
  CHECK(a.rfind("# mechsq " + std::string(kVersion), 0) == 0);
  CHECK_THAT(a, Catch::Matchers::ContainsSubstring("# config: " + json(sc).dump()));

  const auto rows = cells(a);
  REQUIRE(rows.size() == 1 + 2 * 51);
  const auto& header = rows[0];
  CHECK(header.size() == 2 + 10 + 4);
  const std::size_t vm = column(header, "var_min");
  CHECK(rows[1][vm] == "0.5");
  CHECK(std::stod(rows[51][vm]) < 0.006);
}

TEST_CASE("simulate matches the library trajectory") {
  Scenario sc;
  sc.params = {1.0, 0.01, 0.2, 0.001, 1e-7, 1.0};
  sc.time = {200.0, 11, {}};
  const auto rows = cells(render(sc));
  const auto traj = evolve(build_drift_diffusion<quad>(sc.params), make_thermal_vacuum_state<quad>({0.0, true}),
                           uniform_grid(200.0, 11));
  const std::size_t vm = column(rows[0], "var_min");
  const std::size_t sx = column(rows[0], "s_xbxb");
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    CHECK(std::stod(rows[k + 1][vm]) == to_double(squeezing_report(traj.states[k]).var_min));
    CHECK(std::stod(rows[k + 1][sx]) == to_double(traj.states[k].cov(2, 2)));
  }
}

TEST_CASE("reduced simulation tracks the full one at late times") {
  Scenario sc;
  sc.kind = Kind::SimulateReduced;
  sc.params = {1.0, 0.01, 0.2, 0.001, 1e-7, 1.0};
  const double r = compute_normal_form(sc.params).r;
  sc.time.values = {6.0 / r, 8.0 / r};
  Scenario full = sc;
  full.kind = Kind::Simulate;
  const auto red = cells(render(sc)), ful = cells(render(full));
  const std::size_t vr = column(red[0], "var_min"), vf = column(ful[0], "var_min");
  for (std::size_t k = 1; k < red.size(); ++k)
    CHECK(std::stod(red[k][vr]) == Catch::Approx(std::stod(ful[k][vf])).epsilon(0.05));
}

TEST_CASE("reduced simulation refuses the thermal bath and stable points") {
  Scenario sc;
  sc.kind = Kind::SimulateReduced;
  sc.params = {1.0, 0.01, 0.2, 0.0, 0.0, 1.0};
  sc.time = {10.0, 3, {}};
  sc.thermal = ThermalBathParams{0.001, 1.0};
  sc.thermal_bath = true;
  CHECK_THROWS_AS(run_scenario(sc), ConfigError);
  sc.thermal_bath = false;
  sc.params.g = 0.01;
  CHECK_THROWS_AS(run_scenario(sc), RegimeError);
}

TEST_CASE("normal form report names the module on a stable point") {
  Scenario sc;
  sc.kind = Kind::NormalForm;
  sc.params = {1.0, 0.01, 0.04, 0.0, 0.0, 1.0};
  try {
    run_scenario(sc);
    FAIL("no error");
  } catch (const RegimeError& e) {
    CHECK(e.module() == "normalform");
  }
  sc.params.g = 0.2;
  const json doc = json::parse(render(sc));
  CHECK(doc["result"]["instability_ratio"].get<double>() == Catch::Approx(16.0));
  CHECK(doc["result"]["normal_form"]["r"].get<double>() == Catch::Approx(compute_normal_form(sc.params).r));
  CHECK(doc["config"].get<Scenario>() == sc);
}

TEST_CASE("stability map marks the configuration point") {
  const Scenario sc = parse_scenario(dump_scenario(figure_recipes()[2]));
  REQUIRE(sc.name == "fig1c");
  const auto rows = cells(render(sc));
  REQUIRE(rows.size() == 1 + 61 * 61 + 1);
  const auto& last = rows.back();
  const std::size_t m = column(rows[0], "is_marker");
  CHECK(last[m] == "1");
  CHECK(last[0] == "0.01");
  CHECK(last[1] == "0.2");
  CHECK(rows[1][m] == "0");
}

TEST_CASE("json tables carry the same rows as csv") {
  Scenario sc;
  sc.kind = Kind::StabilityMap;
  sc.map_x.values = {0.01, 0.1};
  sc.map_y.values = {0.01, 0.2};
  const json doc = json::parse(render(sc, "json"));
  REQUIRE(doc["rows"].size() == 4);
  CHECK(doc["columns"][2]["name"] == "ratio");
  CHECK(doc["rows"][1][2].get<double>() == Catch::Approx(16.0));
  CHECK(doc["rows"][3][2].get<double>() == Catch::Approx(1.6));
  CHECK(doc["rows"][0][4].is_null());  // nan timescale of a stable cell
  CHECK(cells(render(sc))[1][4] == "nan");
}

TEST_CASE("optimize reports the thermal optimum") {
  Scenario sc;
  sc.kind = Kind::Optimize;
  sc.params = {1.0, 1.0, 1.0, 10.0, 0.0, 1.0};
  sc.objective = Objective::Thermal;
  sc.thermal = ThermalBathParams{0.01, 1.0};
  const auto rows = cells(render(sc));
  REQUIRE(rows.size() == 2);
  const double approx = std::stod(rows[1][column(rows[0], "delta_approx")]);
  CHECK(approx == Catch::Approx(500.0));
  const double ratio = std::stod(rows[1][column(rows[0], "exact_over_approx")]);
  CHECK(std::abs(ratio - 1.0) < 0.1);
}

TEST_CASE("feasibility output keeps failed rows and stable points") {
  Scenario sc;
  sc.kind = Kind::Feasibility;
  sc.setup = PhysicalSetup{};
  sc.lengths.values = {10e-3};
  sc.n_bar_b_values = {0.0};
  const auto rows = cells(render(sc));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][column(rows[0], "unstable")] == "0");
  CHECK(rows[1][column(rows[0], "t_star")] == "inf");
  CHECK(std::stod(rows[1][column(rows[0], "s_sim")]) < 0);
}

TEST_CASE("rates report for the default setup") {
  Scenario sc;
  sc.kind = Kind::Rates;
  const json doc = json::parse(render(sc));
  const double f = doc["result"]["omega_over_2pi_hz"].get<double>();
  CHECK(f > 75e3);
  CHECK(f < 125e3);
  CHECK(doc["result"]["delta_opt_approx"]["unstable"].get<bool>());
}
