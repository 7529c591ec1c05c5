#pragma once

// Coherent-scattering setups: physical rates, optimal detuning, and the
// parameter maps and sweeps behind the design figures.

#include "mechsq/constants.hpp"
#include "mechsq/dynamics.hpp"
#include "mechsq/errors.hpp"
#include "mechsq/metrics.hpp"
#include "mechsq/model.hpp"
#include "mechsq/normalform.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mechsq {

/// SI units throughout. Defaults are the levitated silica nanosphere of the
/// coherent-scattering design study.
struct PhysicalSetup {
  double P_t = 29e-3;         // tweezers power (W)
  double W_t = 0.7e-6;        // tweezers waist (m)
  double A_x = 0.9;
  double A_y = 0.8;
  double lambda_t = 1064e-9;  // m
  double lambda_c = 1064e-9;  // m
  double R = 100e-9;          // particle radius (m)
  double epsilon_rel = 2.1;   // silica
  double rho_mass = 2200.0;   // silica (kg/m^3)
  double L_c = 300e-6;        // cavity length (m)
  double finesse = 1e5;

  bool operator==(const PhysicalSetup&) const = default;
};

struct DerivedRates {
  double omega = 0;       // rad/s
  double g = 0;           // rad/s
  double kappa = 0;       // rad/s
  double gamma_disp = 0;  // rad/s
  double mass = 0;        // kg
  double alpha = 0;       // SI polarizability (F m^2)
  double W_c = 0;         // cavity waist (m)
};

inline void check_setup(const PhysicalSetup& s) {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || !(v > 0)) throw ConfigError("design", std::string(name) + " must be finite and > 0");
  };
  positive(s.P_t, "P_t");
  positive(s.W_t, "W_t");
  positive(s.A_x, "A_x");
  positive(s.A_y, "A_y");
  positive(s.lambda_t, "lambda_t");
  positive(s.lambda_c, "lambda_c");
  positive(s.R, "R");
  positive(s.epsilon_rel, "epsilon_rel");
  positive(s.rho_mass, "rho_mass");
  positive(s.L_c, "L_c");
  positive(s.finesse, "finesse");
  if (s.A_x > 1 || s.A_y > 1) throw ConfigError("design", "A_x and A_y must lie in (0, 1]");
  if (!(s.R < s.lambda_t)) throw ConfigError("design", "particle radius must be below the tweezers wavelength");
  if (!(s.epsilon_rel > 1)) throw ConfigError("design", "epsilon_rel must exceed 1 for a positive polarizability");
}

inline DerivedRates derive_rates(const PhysicalSetup& s) {
  check_setup(s);
  using constants::c;
  using constants::epsilon0;
  using constants::pi;

  DerivedRates d;
  const double volume = 4.0 / 3.0 * pi * s.R * s.R * s.R;
  d.mass = s.rho_mass * volume;
  d.alpha = 3.0 * epsilon0 * volume * (s.epsilon_rel - 1.0) / (s.epsilon_rel + 2.0);
  const double omega_c = 2.0 * pi * c / s.lambda_c;
  const double omega_t = 2.0 * pi * c / s.lambda_t;
  d.W_c = std::sqrt(c * s.L_c / omega_c);
  const double asym = s.A_y / s.A_x;

  d.omega = 2.0 / (s.A_y * s.A_y * s.W_t * s.W_t) * std::sqrt(s.P_t * d.alpha / (pi * epsilon0 * c * d.mass) * asym);
  const double gc = d.alpha * omega_c * omega_c / (pi * epsilon0);
  d.g = 1.0 / (c * d.W_c) * std::pow(s.P_t / (4.0 * c * d.mass * s.L_c * s.L_c) * asym * gc * gc * gc, 0.25);
  d.kappa = pi * c / (s.L_c * s.finesse);
  const double gt = d.alpha * omega_t * omega_t / (pi * epsilon0);
  d.gamma_disp = omega_t * omega_t / (30.0 * std::pow(c, 5)) * std::sqrt(s.P_t / (c * d.mass) * asym * gt * gt * gt);
  return d;
}

/// Dimensionless model parameters in units of Ω for a detuning in rad/s.
inline SystemParams to_system_params(const DerivedRates& d, double delta_si) {
  SystemParams p;
  p.unit_scale = d.omega;
  p.delta = delta_si / d.omega;
  p.omega = 1.0;
  p.g = d.g / d.omega;
  p.kappa = d.kappa / d.omega;
  p.gamma_disp = d.gamma_disp / d.omega;
  check_params(p);
  return p;
}

// ---------------------------------------------------------------------------
// Optimal detuning.

inline double optimal_detuning_approx(double g, double kappa, double gamma) {
  if (!(gamma > 0)) throw RegimeError("design", "no finite optimal detuning for gamma_disp = 0");
  return g * std::sqrt(kappa / (3.0 * gamma));
}

/// g√(κ/(3Γ)) in the units of `p`; `p.delta` is ignored.
inline double optimal_detuning_approx(const SystemParams& p) {
  check_params(p);
  return optimal_detuning_approx(p.g, p.kappa, p.gamma_disp);
}

/// In rad/s.
inline double optimal_detuning_approx(const DerivedRates& d) {
  return optimal_detuning_approx(d.g, d.kappa, d.gamma_disp);
}

enum class Objective { Dissipative, Thermal };

struct DetuningOptimum {
  double delta = 0;       // minimizer
  double variance = 0;    // objective at the minimizer
  double approx = 0;      // g√(κ/3Γ) or Ωκ/(2n̄γ); NaN when undefined
  bool at_lower_bound = false;
  bool at_upper_bound = false;
};

inline constexpr double kDetuningMinRatio = 1.0;  // Δ/Ω bracket
inline constexpr double kDetuningMaxRatio = 1e6;

/// Minimizes the closed-form asymptotic variance over Δ ∈ [Ω, 10⁶Ω]
/// (Brent's method in ln Δ). `p.delta` is ignored; for Thermal the
/// bath's n̄γ replaces Γ.
inline DetuningOptimum optimal_detuning_exact(const SystemParams& p, Objective obj = Objective::Dissipative,
                                              const ThermalBathParams& th = {}) {
  check_params(p);
  check_params(th);
  if (!(p.g > 0)) throw RegimeError("design", "optimal detuning needs g > 0");
  const double ng = th.n_bar * th.gamma_thermal;
  auto variance = [&](double delta) {
    return obj == Objective::Dissipative ? dissipative_variance(delta, p.omega, p.g, p.kappa, p.gamma_disp)
                                 : thermal_variance(delta, p.omega, p.g, p.kappa, ng);
  };

  const double lo = std::log(kDetuningMinRatio * p.omega);
  const double hi = std::log(kDetuningMaxRatio * p.omega);
  auto f = [&](double ln_delta) { return variance(std::exp(ln_delta)); };
  if (!std::isfinite(f(lo)) || !std::isfinite(f(hi))) throw NumericError("design", "objective not finite on the bracket");
  auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, 48);
  if (!std::isfinite(fx)) throw NumericError("design", "minimization failed");
  // Brent stops short of an end point; a monotone objective belongs on it.
  for (const double end : {lo, hi})
    if (f(end) <= fx) {
      x = end;
      fx = f(end);
    }

  DetuningOptimum out;
  out.delta = std::exp(x);
  out.variance = fx;
  const double tol = 1e-6 * (hi - lo);
  out.at_lower_bound = x - lo < tol;
  out.at_upper_bound = hi - x < tol;
  if (obj == Objective::Dissipative)
    out.approx = p.gamma_disp > 0 ? optimal_detuning_approx(p.g, p.kappa, p.gamma_disp)
                                  : std::numeric_limits<double>::quiet_NaN();
  else
    out.approx = ng > 0 ? p.omega * p.kappa / (2.0 * ng) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// ---------------------------------------------------------------------------
// Maps.

struct StabilityCell {
  double omega_over_delta = 0;
  double g_over_delta = 0;
  double ratio = 0;   // 4g²/(ΔΩ)
  bool unstable = false;
  double timescale = std::numeric_limits<double>::quiet_NaN();         // Δ/r, exact
  double timescale_approx = std::numeric_limits<double>::quiet_NaN();  // Δ/(2g√(Ω/Δ))
};

/// Cells in row-major order: omega_over_delta outer, g_over_delta inner.
inline std::vector<StabilityCell> stability_map(const std::vector<double>& omega_over_delta,
                                                const std::vector<double>& g_over_delta) {
  std::vector<StabilityCell> cells;
  cells.reserve(omega_over_delta.size() * g_over_delta.size());
  for (const double w : omega_over_delta)
    for (const double g : g_over_delta) {
      SystemParams p;
      p.delta = 1.0;
      p.omega = w;
      p.g = g;
      check_params(p);
      StabilityCell c;
      c.omega_over_delta = w;
      c.g_over_delta = g;
      c.ratio = instability_ratio(p);
      c.unstable = c.ratio > 1.0;
      if (c.unstable) {
        c.timescale = 1.0 / compute_normal_form(p).r;
        c.timescale_approx = 1.0 / (2.0 * g * std::sqrt(w));
      }
      cells.push_back(c);
    }
  return cells;
}

struct SqueezingCell {
  double kappa = 0;  // κ/Ω
  double noise = 0;  // Γ/Ω (Dissipative) or n̄γ/Ω (Thermal)
  double delta_opt = 0;
  double s_db = 0;
  double delta_approx = std::numeric_limits<double>::quiet_NaN();  // g√(κ/3Γ) or Ωκ/(2n̄γ)
  double s_db_approx = std::numeric_limits<double>::quiet_NaN();
  bool unstable = false;
  bool far_detuned = false;  // Δ_opt ≥ 10Ω
  bool at_bound = false;
};

/// S at the exact optimal detuning, in units of Ω. Row-major: κ outer.
inline std::vector<SqueezingCell> squeezing_map(const std::vector<double>& kappa_over_omega,
                                                const std::vector<double>& noise_over_omega, double g_over_omega,
                                                Objective obj = Objective::Dissipative) {
  std::vector<SqueezingCell> cells;
  cells.reserve(kappa_over_omega.size() * noise_over_omega.size());
  for (const double k : kappa_over_omega)
    for (const double n : noise_over_omega) {
      SystemParams p;
      p.omega = 1.0;
      p.g = g_over_omega;
      p.kappa = k;
      ThermalBathParams th;
      if (obj == Objective::Dissipative) {
        p.gamma_disp = n;
      } else {
        th.gamma_thermal = n;
        th.n_bar = 1.0;
      }
      const DetuningOptimum opt = optimal_detuning_exact(p, obj, th);
      SqueezingCell c;
      c.kappa = k;
      c.noise = n;
      c.delta_opt = opt.delta;
      c.s_db = squeezing_db(opt.variance);
      if (std::isfinite(opt.approx) && opt.approx > 0) {
        c.delta_approx = opt.approx;
        c.s_db_approx = squeezing_db(obj == Objective::Dissipative ? dissipative_variance(opt.approx, p.omega, p.g, k, n)
                                                          : thermal_variance(opt.approx, p.omega, p.g, k, n));
      }
      c.unstable = 4.0 * p.g * p.g > opt.delta * p.omega;
      c.far_detuned = opt.delta >= kFarDetunedMinRatio * p.omega;
      c.at_bound = opt.at_lower_bound || opt.at_upper_bound;
      cells.push_back(c);
    }
  return cells;
}

// ---------------------------------------------------------------------------
// Feasibility sweep over cavity length.

struct SweepOptions {
  double plateau_lo = 8.0;   // t·r window averaged for the simulated plateau
  double plateau_hi = 12.0;
  double horizon = 20.0;     // t·r simulated (covers the t* crossing)
  int samples = 2001;
};

struct SweepPoint {
  double n_b = 0;
  double s_db = std::numeric_limits<double>::quiet_NaN();   // simulated plateau or steady state
  double t_star = std::numeric_limits<double>::infinity();  // s
  std::string error;
};

struct SweepRow {
  double L_c = 0;
  DerivedRates rates;
  double delta_opt = 0;        // approximate optimum, rad/s (simulated)
  double delta_opt_exact = 0;  // exact minimizer of the dissipative asymptote, rad/s
  double ratio = 0;            // 4g²/(Δ_opt Ω)
  bool unstable = false;
  double r = std::numeric_limits<double>::quiet_NaN();  // rad/s
  double s_lossless = std::numeric_limits<double>::quiet_NaN();
  double s_dissipative = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepPoint> points;
  std::string error;
};

namespace detail {

inline SweepPoint simulate_point(const SystemParams& p, double r, double n_b, double threshold,
                                 const SweepOptions& opts) {
  SweepPoint pt;
  pt.n_b = n_b;
  const auto dd = build_drift_diffusion<quad>(p);
  const auto s0 = make_thermal_vacuum_state<quad>({n_b, true});
  if (r > 0) {
    const auto traj = evolve(dd, s0, uniform_grid(opts.horizon / r, opts.samples));
    double sum = 0;
    int count = 0;
    std::vector<double> sxx;
    sxx.reserve(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const double tr = traj.times[k] * r;
      sxx.push_back(to_double(traj.states[k].cov(2, 2)));
      if (tr >= opts.plateau_lo && tr <= opts.plateau_hi) {
        sum += to_double(squeezing_report(traj.states[k]).var_min);
        ++count;
      }
    }
    if (count == 0) {
      pt.error = traj.halted ? traj.diagnostic : "plateau window not reached";
    } else {
      pt.s_db = squeezing_db(sum / count);
    }
    const auto ext = extension_time(traj.times, sxx, threshold);
    if (ext.crossed) pt.t_star = ext.t / p.unit_scale;
  } else {
    pt.s_db = squeezing_db(to_double(squeezing_report(stationary_state(dd)).var_min));
  }
  return pt;
}

}  // namespace detail

/// For each L_c: rates, approximate Δ_opt, exact master-equation simulation
/// per initial occupation, and the analytic curves. Failures are recorded
/// per row/point and the sweep continues.
inline std::vector<SweepRow> feasibility_sweep(const PhysicalSetup& base, const std::vector<double>& lengths,
                                               const std::vector<double>& n_b_values, const SweepOptions& opts = {}) {
  std::vector<SweepRow> rows;
  for (const double L : lengths) {
    SweepRow row;
    row.L_c = L;
    try {
      PhysicalSetup setup = base;
      setup.L_c = L;
      row.rates = derive_rates(setup);
      row.delta_opt = optimal_detuning_approx(row.rates);
      const SystemParams p = to_system_params(row.rates, row.delta_opt);
      row.delta_opt_exact = optimal_detuning_exact(p).delta * row.rates.omega;
      row.ratio = instability_ratio(p);
      row.unstable = row.ratio > 1.0;
      double r = 0;
      if (row.unstable) {
        r = compute_normal_form(p).r;
        row.r = r * row.rates.omega;
        row.s_lossless = squeezing_db(p.omega / (2.0 * p.delta));
        row.s_dissipative = squeezing_db(dissipative_variance(p.delta, p.omega, p.g, p.kappa, p.gamma_disp));
      }
      const double threshold = extension_threshold(row.rates.mass, row.rates.omega, setup.lambda_c);
      for (const double nb : n_b_values) {
        try {
          row.points.push_back(detail::simulate_point(p, r, nb, threshold, opts));
        } catch (const Error& e) {
          SweepPoint pt;
          pt.n_b = nb;
          pt.error = e.what();
          row.points.push_back(pt);
        }
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mechsq
