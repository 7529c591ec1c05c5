#pragma once

// Scenario files: one JSON document describing a run. Frequencies in
// `params` are multiples of `params.unit_scale`; times are in units of
// 1/unit_scale. Physical setups are SI.

#include "mechsq/design.hpp"
#include "mechsq/dynamics.hpp"
#include "mechsq/errors.hpp"
#include "mechsq/serialize.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mechsq {

enum class Kind { Simulate, SimulateReduced, NormalForm, Wigner, StabilityMap, SqueezingMap, Feasibility, Optimize, Rates };

inline const std::vector<std::pair<Kind, std::string>>& kind_names() {
  static const std::vector<std::pair<Kind, std::string>> names{
      {Kind::Simulate, "simulate"},         {Kind::SimulateReduced, "simulate-reduced"},
      {Kind::NormalForm, "normalform"},     {Kind::Wigner, "wigner"},
      {Kind::StabilityMap, "stability-map"}, {Kind::SqueezingMap, "squeezing-map"},
      {Kind::Feasibility, "feasibility"},   {Kind::Optimize, "optimize"},
      {Kind::Rates, "rates"}};
  return names;
}

inline std::string to_string(Kind k) {
  for (const auto& [kind, name] : kind_names())
    if (kind == k) return name;
  return "unknown";
}

inline Kind parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kind_names())
    if (name == s) return kind;
  throw ConfigError("config", "kind: unknown value '" + s + "'");
}

inline std::string to_string(Objective o) { return o == Objective::Dissipative ? "dissipative" : "thermal"; }

inline Objective parse_objective(const std::string& s) {
  if (s == "dissipative") return Objective::Dissipative;
  if (s == "thermal") return Objective::Thermal;
  throw ConfigError("config", "objective: expected 'dissipative' or 'thermal', got '" + s + "'");
}

/// Either explicit `values` or `n` points from `lo` to `hi` (log-spaced if `log`).
struct Axis {
  double lo = 0;
  double hi = 0;
  int n = 0;
  bool log = false;
  std::vector<double> values;

  bool empty() const { return values.empty() && n == 0; }

  std::vector<double> points(const std::string& name) const {
    if (!values.empty()) return values;
    if (n < 1) throw ConfigError("config", name + ": axis needs explicit values or n >= 1");
    if (n == 1) return {lo};
    if (!(hi > lo)) throw ConfigError("config", name + ": axis needs hi > lo");
    if (log && !(lo > 0)) throw ConfigError("config", name + ": log axis needs lo > 0");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double f = static_cast<double>(k) / (n - 1);
      v[static_cast<std::size_t>(k)] = log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
    }
    v.front() = lo;
    v.back() = hi;
    return v;
  }

  bool operator==(const Axis&) const = default;
};

struct TimeSpec {
  double t_max = 0;
  int samples = 0;
  std::vector<double> values;

  std::vector<double> grid() const {
    if (!values.empty()) {
      check_time_grid(values);
      return values;
    }
    if (samples == 0 && t_max == 0) throw ConfigError("config", "time: empty time grid");
    return uniform_grid(t_max, samples);
  }

  bool operator==(const TimeSpec&) const = default;
};

struct Scenario {
  std::string name;
  Kind kind = Kind::Simulate;
  SystemParams params;
  std::optional<PhysicalSetup> setup;
  InitialConditions initial;
  std::vector<double> n_bar_b_values;  // overrides initial.n_bar_b when non-empty
  std::optional<ThermalBathParams> thermal;
  bool thermal_bath = false;  // use the thermal dissipator in simulate/wigner
  TimeSpec time;

  Axis wigner_x, wigner_p;
  bool align_squeezing = false;  // rotate by θ_sq + π/2 before sampling W

  Axis map_x, map_y;  // stability: Ω/Δ, g/Δ; squeezing: κ/Ω, Γ/Ω (or n̄γ/Ω)
  std::vector<double> g_over_omega;
  Objective objective = Objective::Dissipative;
  std::optional<std::pair<double, double>> marker;

  Axis lengths;  // L_c for the feasibility sweep (m)

  std::string output_path;
  std::string output_format = "csv";

  std::vector<double> occupations() const {
    return n_bar_b_values.empty() ? std::vector<double>{initial.n_bar_b} : n_bar_b_values;
  }

  bool operator==(const Scenario&) const = default;
};

// ---------------------------------------------------------------------------

inline void to_json(json& j, const Axis& a) {
  if (!a.values.empty()) {
    j = a.values;
    return;
  }
  j = json{{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}, {"log", a.log}};
}

inline void from_json(const json& j, Axis& a) {
  a = Axis{};
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number()) throw ConfigError("config", "axis: values must be numbers");
      a.values.push_back(v.get<double>());
    }
    return;
  }
  detail::FieldReader r(j, "axis");
  r.get_number("lo", a.lo);
  r.get_number("hi", a.hi);
  r.get("n", a.n);
  r.get("log", a.log);
  r.finish();
}

inline void to_json(json& j, const Scenario& s) {
  j = json::object();
  if (!s.name.empty()) j["name"] = s.name;
  j["kind"] = to_string(s.kind);
  j["params"] = s.params;
  if (s.setup) j["setup"] = *s.setup;
  j["initial"] = s.initial;
  if (!s.n_bar_b_values.empty()) j["n_bar_b_values"] = s.n_bar_b_values;
  if (s.thermal) j["thermal"] = *s.thermal;
  if (s.thermal_bath) j["thermal_bath"] = true;
  if (!(s.time == TimeSpec{})) {
    json t = json::object();
    if (!s.time.values.empty()) t["values"] = s.time.values;
    else t = json{{"t_max", s.time.t_max}, {"samples", s.time.samples}};
    j["time"] = t;
  }
  if (!s.wigner_x.empty() || !s.wigner_p.empty() || s.align_squeezing)
    j["wigner"] = json{{"x", s.wigner_x}, {"p", s.wigner_p}, {"align_squeezing", s.align_squeezing}};
  if (!s.map_x.empty() || !s.map_y.empty() || !s.g_over_omega.empty() || s.marker) {
    json m{{"x", s.map_x}, {"y", s.map_y}, {"objective", to_string(s.objective)}};
    if (!s.g_over_omega.empty()) m["g_over_omega"] = s.g_over_omega;
    if (s.marker) m["marker"] = json::array({s.marker->first, s.marker->second});
    j["map"] = m;
  } else if (s.objective != Objective::Dissipative) {
    j["objective"] = to_string(s.objective);
  }
  if (!s.lengths.empty()) j["sweep"] = json{{"L_c", s.lengths}};
  json out{{"format", s.output_format}};
  if (!s.output_path.empty()) out["path"] = s.output_path;
  j["output"] = out;
}

inline void from_json(const json& j, Scenario& s) {
  s = Scenario{};
  detail::FieldReader r(j, "scenario");
  r.get("name", s.name);
  std::string kind;
  r.get("kind", kind);
  if (!kind.empty()) s.kind = parse_kind(kind);
  r.get("params", s.params);
  if (r.has("setup")) {
    PhysicalSetup setup;
    r.get("setup", setup);
    s.setup = setup;
  }
  r.get("initial", s.initial);
  r.get("n_bar_b_values", s.n_bar_b_values);
  if (r.has("thermal")) {
    ThermalBathParams th;
    r.get("thermal", th);
    s.thermal = th;
  }
  r.get("thermal_bath", s.thermal_bath);
  std::string objective = "dissipative";
  r.get("objective", objective);
  s.objective = parse_objective(objective);

  json time = json::object();
  r.get("time", time);
  {
    detail::FieldReader t(time, "time");
    t.get_number("t_max", s.time.t_max);
    t.get("samples", s.time.samples);
    t.get("values", s.time.values);
    t.finish();
  }
  json wigner = json::object();
  r.get("wigner", wigner);
  {
    detail::FieldReader w(wigner, "wigner");
    w.get("x", s.wigner_x);
    w.get("p", s.wigner_p);
    w.get("align_squeezing", s.align_squeezing);
    w.finish();
  }
  json map = json::object();
  r.get("map", map);
  {
    detail::FieldReader m(map, "map");
    m.get("x", s.map_x);
    m.get("y", s.map_y);
    m.get("g_over_omega", s.g_over_omega);
    std::string obj = to_string(s.objective);
    m.get("objective", obj);
    s.objective = parse_objective(obj);
    std::vector<double> marker;
    m.get("marker", marker);
    if (!marker.empty()) {
      if (marker.size() != 2) throw ConfigError("config", "map.marker: expected [x, y]");
      s.marker = std::pair{marker[0], marker[1]};
    }
    m.finish();
  }
  json sweep = json::object();
  r.get("sweep", sweep);
  {
    detail::FieldReader sw(sweep, "sweep");
    sw.get("L_c", s.lengths);
    sw.finish();
  }
  json output = json::object();
  r.get("output", output);
  {
    detail::FieldReader o(output, "output");
    o.get("path", s.output_path);
    o.get("format", s.output_format);
    o.finish();
  }
  r.finish();
}

/// Kind-specific checks; throws ConfigError.
inline void validate_scenario(const Scenario& s) {
  if (s.output_format != "csv" && s.output_format != "json")
    throw ConfigError("config", "output.format: expected 'csv' or 'json'");
  for (double nb : s.occupations()) check_params(InitialConditions{nb, true});
  if (s.thermal) check_params(*s.thermal);
  if (s.thermal_bath && !s.thermal) throw ConfigError("config", "thermal_bath requested but no 'thermal' section given");
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError("config", what);
  };
  switch (s.kind) {
    case Kind::Simulate:
    case Kind::SimulateReduced:
      check_params(s.params);
      s.time.grid();
      need(!(s.kind == Kind::SimulateReduced && s.thermal_bath), "the reduced model has no thermal-bath variant");
      break;
    case Kind::NormalForm:
      check_params(s.params);
      break;
    case Kind::Wigner:
      check_params(s.params);
      s.time.grid();
      need(!s.wigner_x.empty() && !s.wigner_p.empty(), "wigner: x and p axes are required");
      s.wigner_x.points("wigner.x");
      s.wigner_p.points("wigner.p");
      break;
    case Kind::StabilityMap:
      need(!s.map_x.empty() && !s.map_y.empty(), "map: x (omega/delta) and y (g/delta) axes are required");
      s.map_x.points("map.x");
      s.map_y.points("map.y");
      break;
    case Kind::SqueezingMap:
      need(!s.map_x.empty() && !s.map_y.empty(), "map: x (kappa/omega) and y (noise/omega) axes are required");
      need(!s.g_over_omega.empty(), "map.g_over_omega: at least one coupling is required");
      s.map_x.points("map.x");
      s.map_y.points("map.y");
      break;
    case Kind::Feasibility:
      need(!s.lengths.empty(), "sweep.L_c: cavity lengths are required");
      s.lengths.points("sweep.L_c");
      check_setup(s.setup.value_or(PhysicalSetup{}));
      break;
    case Kind::Optimize:
      if (s.setup) check_setup(*s.setup);
      else check_params(s.params);
      need(!(s.objective == Objective::Thermal && !s.thermal), "objective thermal needs a 'thermal' section");
      break;
    case Kind::Rates:
      check_setup(s.setup.value_or(PhysicalSetup{}));
      break;
  }
}

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses and validates a scenario document. Syntax errors report line and
/// column; schema errors report the key path.
inline Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", "syntax error at " + detail::line_col(text, e.byte) + ": " + e.what());
  }
  Scenario s = j.get<Scenario>();
  validate_scenario(s);
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

inline std::string dump_scenario(const Scenario& s) { return json(s).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Bundled figure recipes.

inline std::vector<Scenario> figure_recipes() {
  std::vector<Scenario> out;
  const SystemParams fig1{1.0, 0.01, 0.2, 0.0, 0.0, 1.0};

  Scenario a;
  a.name = "fig1a";
  a.kind = Kind::Wigner;
  a.params = fig1;
  a.time.values = {0.0, 50.0, 100.0, 200.0};
  a.wigner_x = {-4.0, 4.0, 81, false, {}};
  a.wigner_p = {-4.0, 4.0, 81, false, {}};
  out.push_back(a);

  Scenario b;
  b.name = "fig1b";
  b.kind = Kind::Simulate;
  b.params = fig1;
  b.n_bar_b_values = {0.0, 10.0, 100.0};
  b.time = {400.0, 801, {}};
  out.push_back(b);

  Scenario c;
  c.name = "fig1c";
  c.kind = Kind::StabilityMap;
  c.map_x = {1e-4, 1.0, 61, true, {}};
  c.map_y = {1e-3, 1.0, 61, true, {}};
  c.marker = std::pair{0.01, 0.2};
  out.push_back(c);

  Scenario f2;
  f2.name = "fig2";
  f2.kind = Kind::SqueezingMap;
  f2.map_x = {1e-2, 1e2, 41, true, {}};
  f2.map_y = {1e-6, 1e-1, 41, true, {}};
  f2.g_over_omega = {1.0, 10.0, 100.0};
  out.push_back(f2);

  Scenario f3;
  f3.name = "fig3bc";
  f3.kind = Kind::Feasibility;
  f3.setup = PhysicalSetup{};
  f3.lengths = {10e-6, 10e-3, 25, true, {}};
  f3.n_bar_b_values = {0.0, 10.0, 100.0};
  out.push_back(f3);

  Scenario f3d;
  f3d.name = "fig3d";
  f3d.kind = Kind::Feasibility;
  f3d.setup = PhysicalSetup{};
  f3d.lengths.values = {100e-6, 1e-3};
  f3d.n_bar_b_values = {0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0};
  out.push_back(f3d);

  Scenario s1;
  s1.name = "figS1";
  s1.kind = Kind::SqueezingMap;
  s1.objective = Objective::Thermal;
  s1.map_x = {1e-2, 1e2, 41, true, {}};
  s1.map_y = {1e-6, 1e-1, 41, true, {}};
  s1.g_over_omega = {1.0, 10.0, 100.0};
  out.push_back(s1);

  for (auto& s : out) s.output_path = s.name + ".csv";
  return out;
}

}  // namespace mechsq
