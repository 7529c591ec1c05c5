#pragma once

// Executes a Scenario and renders the result as CSV (with a `#` metadata
// header echoing the full input) or JSON. Trajectories run in binary128.

#include "mechsq/design.hpp"
#include "mechsq/dynamics.hpp"
#include "mechsq/metrics.hpp"
#include "mechsq/normalform.hpp"
#include "mechsq/scenario.hpp"
#include "mechsq/serialize.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#ifndef MECHSQ_VERSION
#define MECHSQ_VERSION "0.0.0"
#endif

namespace mechsq {

inline constexpr const char* kVersion = MECHSQ_VERSION;

struct Column {
  std::string name;
  std::string doc;
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<json>> rows;
};

struct RunResult {
  std::optional<Table> table;  // tabular output
  json report;                 // scalar report when there is no table
  std::vector<std::string> notes;
  std::optional<std::string> failure;  // output is partial; reported after writing
};

namespace detail {

inline std::string format_cell(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return fmt::format("{}", v.get<long long>());
  if (v.is_number()) {
    const double x = v.get<double>();
    return fmt::format("{}", x == 0.0 ? 0.0 : x);  // no "-0"
  }
  if (v.is_null()) return "";
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch == '\n' ? ' ' : ch;
  }
  return quoted + "\"";
}

/// Fluctuation covariance and report for a simulated state. A state that
/// violates the uncertainty relation is a numerical failure here.
template <typename Real>
SqueezingReport<Real> checked_report(const GaussianState<Real>& s, double t) {
  try {
    return squeezing_report(s);
  } catch (const ConfigError&) {
    throw NumericError("dynamics", fmt::format("state lost physicality at t={}", t));
  }
}

inline DriftDiffusion<quad> scenario_drift(const Scenario& sc) {
  return sc.thermal_bath ? build_drift_diffusion_thermal<quad>(sc.params, *sc.thermal)
                         : build_drift_diffusion<quad>(sc.params);
}

inline void note_halt(RunResult& res, const Trajectory<quad>& traj, double n_b) {
  if (!traj.halted) return;
  res.notes.push_back(fmt::format("n_b={}: halted: {}", n_b, traj.diagnostic));
  if (!res.failure) res.failure = "integration halted before the end of the time grid (see notes)";
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunResult run_simulate(const Scenario& sc) {
  const auto times = sc.time.grid();
  const auto dd = detail::scenario_drift(sc);
  const bool seconds = sc.setup.has_value();
  static const char* names[4] = {"xa", "pa", "xb", "pb"};

  Table t;
  t.columns.push_back({"t", "time in units of 1/unit_scale"});
  if (seconds) t.columns.push_back({"t_s", "time in seconds"});
  t.columns.push_back({"n_b_init", "initial mechanical occupation"});
  for (int i = 0; i < 4; ++i)
    for (int k = i; k < 4; ++k)
      t.columns.push_back({fmt::format("s_{}{}", names[i], names[k]), "covariance entry"});
  t.columns.push_back({"var_min", "minimal mechanical quadrature variance (vacuum 0.5)"});
  t.columns.push_back({"theta_sq", "squeezing angle in [0, pi)"});
  t.columns.push_back({"s_db", "squeezing -10 log10(2 var_min)"});
  t.columns.push_back({"n_phonon", "<b^dag b>"});

  RunResult res;
  for (const double nb : sc.occupations()) {
    const auto traj = evolve(dd, make_thermal_vacuum_state<quad>({nb, true}), times);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const auto& s = traj.states[k];
      const auto rep = detail::checked_report(s, traj.times[k]);
      std::vector<json> row{traj.times[k]};
      if (seconds) row.push_back(traj.times[k] / sc.params.unit_scale);
      row.push_back(nb);
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) row.push_back(to_double(s.cov(i, j)));
      row.push_back(to_double(rep.var_min));
      row.push_back(rep.theta_sq);
      row.push_back(rep.s_db);
      row.push_back(to_double(rep.n_b_mean));
      t.rows.push_back(std::move(row));
    }
    detail::note_halt(res, traj, nb);
  }
  res.table = std::move(t);
  return res;
}

inline RunResult run_simulate_reduced(const Scenario& sc) {
  const auto times = sc.time.grid();
  const NormalForm nf = compute_normal_form(sc.params);
  const ReducedModel rates = reduced_model_rates(sc.params, nf);
  const bool seconds = sc.setup.has_value();

  Table t;
  t.columns.push_back({"t", "time in units of 1/unit_scale"});
  if (seconds) t.columns.push_back({"t_s", "time in seconds"});
  t.columns.push_back({"n_b_init", "initial mechanical occupation"});
  t.columns.push_back({"c2_n", "<c2^dag c2>"});
  t.columns.push_back({"c2_sq_re", "Re <c2^2>"});
  t.columns.push_back({"c2_sq_im", "Im <c2^2>"});
  t.columns.push_back({"s_xbxb", "mechanical covariance, c1 in vacuum"});
  t.columns.push_back({"s_xbpb", "mechanical covariance, c1 in vacuum"});
  t.columns.push_back({"s_pbpb", "mechanical covariance, c1 in vacuum"});
  t.columns.push_back({"var_min", "minimal mechanical quadrature variance"});
  t.columns.push_back({"theta_sq", "squeezing angle in [0, pi)"});
  t.columns.push_back({"s_db", "squeezing -10 log10(2 var_min)"});

  RunResult res;
  for (const double nb : sc.occupations()) {
    ReducedModel rm = rates;
    rm.moments = reduced_initial_moments(nf, make_thermal_vacuum_state<double>({nb, true}));
    for (const double time : times) {
      const ReducedModel m = evolve_reduced(rm, nf.r, sc.params.gamma_disp, time);
      GaussianState<double> s;
      s.cov.bottomRightCorner<2, 2>() = reduced_mechanical_block(nf, m.moments);
      // The reconstructed block is approximate; physicality is not enforced.
      const auto rep = squeezing_report(s, std::numeric_limits<double>::infinity());
      std::vector<json> row{time};
      if (seconds) row.push_back(time / sc.params.unit_scale);
      row.push_back(nb);
      row.push_back(m.moments[0].real());
      row.push_back(m.moments[2].real());
      row.push_back(m.moments[2].imag());
      row.push_back(s.cov(2, 2));
      row.push_back(s.cov(2, 3));
      row.push_back(s.cov(3, 3));
      row.push_back(rep.var_min);
      row.push_back(rep.theta_sq);
      row.push_back(rep.s_db);
      t.rows.push_back(std::move(row));
    }
  }
  for (const auto& w : validate_params(sc.params)) res.notes.push_back("warning: " + w);
  res.table = std::move(t);
  return res;
}

inline RunResult run_normalform(const Scenario& sc) {
  const NormalForm nf = compute_normal_form(sc.params);
  RunResult res;
  res.report = json{{"params", sc.params},
                    {"instability_ratio", instability_ratio(sc.params)},
                    {"unstable", true},
                    {"warnings", validate_params(sc.params)},
                    {"normal_form", nf}};
  return res;
}

inline RunResult run_wigner(const Scenario& sc) {
  const auto times = sc.time.grid();
  const auto xs = sc.wigner_x.points("wigner.x");
  const auto ps = sc.wigner_p.points("wigner.p");
  const auto dd = detail::scenario_drift(sc);

  Table t;
  t.columns = {{"t", "time in units of 1/unit_scale"},
               {"n_b_init", "initial mechanical occupation"},
               {"x", "mechanical position quadrature"},
               {"p", "mechanical momentum quadrature"},
               {"w", "Wigner function W(x, p)"}};
  RunResult res;
  if (sc.align_squeezing) res.notes.push_back("phase space rotated by theta_sq + pi/2 (squeezed axis along x)");
  for (const double nb : sc.occupations()) {
    const auto traj = evolve(dd, make_thermal_vacuum_state<quad>({nb, true}), times);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      auto s = traj.states[k];
      if (sc.align_squeezing)
        s = rotate_mechanical(s, detail::checked_report(s, traj.times[k]).theta_sq + std::numbers::pi / 2);
      const WignerGrid g = wigner_grid(s, xs, ps);
      for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ps.size(); ++j) t.rows.push_back({traj.times[k], nb, xs[i], ps[j], g.at(i, j)});
    }
    detail::note_halt(res, traj, nb);
  }
  res.table = std::move(t);
  return res;
}

inline RunResult run_stability_map(const Scenario& sc) {
  auto cells = stability_map(sc.map_x.points("map.x"), sc.map_y.points("map.y"));
  const std::size_t grid = cells.size();
  if (sc.marker) {
    const auto m = stability_map({sc.marker->first}, {sc.marker->second});
    cells.push_back(m.front());
  }
  Table t;
  t.columns = {{"omega_over_delta", "Omega/Delta"},
               {"g_over_delta", "g/Delta"},
               {"ratio", "4g^2/(Delta Omega); unstable above 1"},
               {"unstable", "1 if unstable"},
               {"timescale", "Delta/r (squeezing time in units of 1/Delta), nan if stable"},
               {"timescale_approx", "far-detuned 1/(2 (g/Delta) sqrt(Omega/Delta))"},
               {"is_marker", "1 for the highlighted configuration row"}};
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& c = cells[k];
    t.rows.push_back({c.omega_over_delta, c.g_over_delta, c.ratio, c.unstable, c.timescale, c.timescale_approx,
                      k >= grid});
  }
  RunResult res;
  res.table = std::move(t);
  return res;
}

inline RunResult run_squeezing_map(const Scenario& sc) {
  const auto ks = sc.map_x.points("map.x");
  const auto ns = sc.map_y.points("map.y");
  const bool thermal = sc.objective == Objective::Thermal;
  Table t;
  t.columns = {{"g_over_omega", "g/Omega"},
               {"kappa_over_omega", "kappa/Omega"},
               {thermal ? "n_gamma_over_omega" : "gamma_over_omega",
                thermal ? "n_bar*gamma/Omega (thermal bath, Gamma = 0)" : "Gamma/Omega"},
               {"delta_opt", "exact optimal Delta/Omega"},
               {"s_db", "asymptotic squeezing at delta_opt (dB)"},
               {"delta_approx", thermal ? "Omega kappa/(2 n_bar gamma)" : "g sqrt(kappa/(3 Gamma))"},
               {"s_db_approx", "asymptotic squeezing at delta_approx (dB)"},
               {"unstable", "1 if 4g^2 > Delta_opt Omega"},
               {"far_detuned", "1 if Delta_opt >= 10 Omega"},
               {"at_bound", "1 if the optimum sits on the search bracket [1, 1e6] Omega"}};
  for (const double g : sc.g_over_omega)
    for (const auto& c : squeezing_map(ks, ns, g, sc.objective))
      t.rows.push_back({g, c.kappa, c.noise, c.delta_opt, c.s_db, c.delta_approx, c.s_db_approx, c.unstable,
                        c.far_detuned, c.at_bound});
  RunResult res;
  res.table = std::move(t);
  return res;
}

inline RunResult run_feasibility(const Scenario& sc) {
  const PhysicalSetup base = sc.setup.value_or(PhysicalSetup{});
  const auto rows = feasibility_sweep(base, sc.lengths.points("sweep.L_c"), sc.occupations());
  Table t;
  t.columns = {{"L_c", "cavity length (m)"},
               {"n_b", "initial mechanical occupation"},
               {"omega", "Omega (rad/s)"},
               {"g", "g (rad/s)"},
               {"kappa", "kappa (rad/s)"},
               {"gamma_disp", "Gamma (rad/s)"},
               {"delta_opt", "simulated detuning g sqrt(kappa/(3 Gamma)) (rad/s)"},
               {"delta_opt_exact", "exact minimizer of the dissipative asymptote (rad/s)"},
               {"ratio", "4g^2/(Delta Omega) at delta_opt; stable below 1"},
               {"unstable", "1 if unstable"},
               {"r", "squeezing rate (rad/s), nan if stable"},
               {"inv_r", "1/r (s)"},
               {"s_sim", "simulated squeezing (dB): plateau mean over t r in [8, 12], steady state if stable"},
               {"s_lossless", "lossless asymptote Omega/(2 Delta) (dB)"},
               {"s_dissipative", "dissipative asymptote (dB)"},
               {"t_star", "time for sqrt(Sigma_xbxb) to reach lambda_c/10 (s), inf if never"},
               {"error", "failure message for this point, empty on success"}};
  RunResult res;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : rows) {
    auto base_row = [&](double nb) {
      return std::vector<json>{row.L_c,         nb,        row.rates.omega, row.rates.g,
                               row.rates.kappa, row.rates.gamma_disp, row.delta_opt, row.delta_opt_exact,
                               row.ratio,       row.unstable, row.r,      1.0 / row.r};
    };
    if (!row.error.empty()) {
      auto r = base_row(nan);
      r.insert(r.end(), {nan, nan, nan, nan, row.error});
      t.rows.push_back(std::move(r));
      res.notes.push_back(fmt::format("L_c={}: {}", row.L_c, row.error));
      continue;
    }
    for (const auto& pt : row.points) {
      auto r = base_row(pt.n_b);
      r.insert(r.end(), {pt.s_db, row.s_lossless, row.s_dissipative, pt.t_star, pt.error});
      if (!pt.error.empty()) res.notes.push_back(fmt::format("L_c={} n_b={}: {}", row.L_c, pt.n_b, pt.error));
      t.rows.push_back(std::move(r));
    }
  }
  res.notes.push_back("stable rows (unstable=0) report the steady-state squeezing; r, inv_r, s_lossless, s_dissipative are nan");
  res.table = std::move(t);
  return res;
}

inline RunResult run_optimize(const Scenario& sc) {
  SystemParams p = sc.params;
  std::optional<DerivedRates> rates;
  if (sc.setup) {
    rates = derive_rates(*sc.setup);
    p = to_system_params(*rates, optimal_detuning_approx(*rates));
  }
  const ThermalBathParams th = sc.thermal.value_or(ThermalBathParams{});
  const DetuningOptimum opt = optimal_detuning_exact(p, sc.objective, th);
  const double ng = th.n_bar * th.gamma_thermal;
  auto variance = [&](double delta) {
    return sc.objective == Objective::Dissipative ? dissipative_variance(delta, p.omega, p.g, p.kappa, p.gamma_disp)
                                          : thermal_variance(delta, p.omega, p.g, p.kappa, ng);
  };
  const double scale = rates ? rates->omega : 1.0;

  Table t;
  t.columns = {{"objective", "dissipative (displacement noise) or thermal (thermal bath)"},
               {"delta_opt", rates ? "exact optimal detuning (rad/s)" : "exact optimal detuning (units of unit_scale)"},
               {"delta_approx", "closed-form approximation, same units"},
               {"exact_over_approx", "delta_opt/delta_approx"},
               {"s_db", "asymptotic squeezing at delta_opt (dB)"},
               {"s_db_approx", "asymptotic squeezing at delta_approx (dB)"},
               {"instability_ratio", "4g^2/(Delta Omega) at delta_opt"},
               {"at_lower_bound", "optimum on Delta = Omega"},
               {"at_upper_bound", "optimum on Delta = 1e6 Omega"}};
  const double s_approx = std::isfinite(opt.approx) ? squeezing_db(variance(opt.approx)) : std::numeric_limits<double>::quiet_NaN();
  t.rows.push_back({to_string(sc.objective), opt.delta * scale, opt.approx * scale, opt.delta / opt.approx,
                    squeezing_db(opt.variance), s_approx, 4.0 * p.g * p.g / (opt.delta * p.omega), opt.at_lower_bound,
                    opt.at_upper_bound});
  RunResult res;
  res.table = std::move(t);
  return res;
}

inline RunResult run_rates(const Scenario& sc) {
  const PhysicalSetup setup = sc.setup.value_or(PhysicalSetup{});
  const DerivedRates d = derive_rates(setup);
  const double delta = optimal_detuning_approx(d);
  const SystemParams p = to_system_params(d, delta);
  json at_opt{{"delta", delta}, {"instability_ratio", instability_ratio(p)}, {"unstable", is_unstable(p)}};
  if (is_unstable(p)) {
    const double r = compute_normal_form(p).r * d.omega;
    at_opt["r"] = r;
    at_opt["inv_r"] = 1.0 / r;
    at_opt["s_dissipative_db"] = squeezing_db(dissipative_variance(p.delta, p.omega, p.g, p.kappa, p.gamma_disp));
  }
  RunResult res;
  res.report = json{{"setup", setup},
                    {"rates", d},
                    {"omega_over_2pi_hz", d.omega / (2.0 * std::numbers::pi)},
                    {"units", "rates in rad/s, mass in kg, lengths in m"},
                    {"delta_opt_approx", at_opt},
                    {"delta_opt_exact", optimal_detuning_exact(p).delta * d.omega},
                    {"extension_threshold", extension_threshold(d.mass, d.omega, setup.lambda_c)}};
  return res;
}

inline RunResult run_scenario(const Scenario& sc) {
  validate_scenario(sc);
  switch (sc.kind) {
    case Kind::Simulate: return run_simulate(sc);
    case Kind::SimulateReduced: return run_simulate_reduced(sc);
    case Kind::NormalForm: return run_normalform(sc);
    case Kind::Wigner: return run_wigner(sc);
    case Kind::StabilityMap: return run_stability_map(sc);
    case Kind::SqueezingMap: return run_squeezing_map(sc);
    case Kind::Feasibility: return run_feasibility(sc);
    case Kind::Optimize: return run_optimize(sc);
    case Kind::Rates: return run_rates(sc);
  }
  throw ConfigError("cli", "unhandled scenario kind");
}

// ---------------------------------------------------------------------------

/// Scalar reports are always JSON; tables honour `format`.
inline void write_result(const RunResult& res, const Scenario& sc, const std::string& format, std::ostream& out) {
  if (!res.table || format == "json") {
    json doc{{"mechsq_version", kVersion}, {"kind", to_string(sc.kind)}, {"config", sc}};
    if (!res.notes.empty()) doc["notes"] = res.notes;
    if (res.table) {
      json cols = json::array();
      for (const auto& c : res.table->columns) cols.push_back(json{{"name", c.name}, {"doc", c.doc}});
      doc["columns"] = cols;
      doc["rows"] = res.table->rows;
    } else {
      doc["result"] = res.report;
    }
    out << doc.dump(2) << "\n";
    return;
  }
  const Table& t = *res.table;
  out << "# mechsq " << kVersion << "\n";
  out << "# kind: " << to_string(sc.kind) << "\n";
  out << "# config: " << json(sc).dump() << "\n";
  out << "# columns:\n";
  for (const auto& c : t.columns) out << "#   " << c.name << ": " << c.doc << "\n";
  for (const auto& n : res.notes) out << "# note: " << n << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i].name;
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::format_cell(row[i]);
    out << "\n";
  }
}

}  // namespace mechsq
