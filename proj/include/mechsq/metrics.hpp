#pragma once

// Squeezing diagnostics, closed-form asymptotes, the extension time t* and
// Wigner grids of the mechanical mode.

#include "mechsq/constants.hpp"
#include "mechsq/errors.hpp"
#include "mechsq/model.hpp"
#include "mechsq/normalform.hpp"

#include <boost/math/interpolators/pchip.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace mechsq {

template <typename Real = double>
struct SqueezingReport {
  Real var_min = 0;         // Δ²X_sq from 1/2 + ⟨b†b⟩ − |⟨b²⟩|
  Real var_min_eigen = 0;   // smallest eigenvalue of the mechanical block
  double theta_sq = 0;      // in [0, π)
  double s_db = 0;          // −10 log₁₀(2Δ²X_sq)
  Real n_b_mean = 0;        // ⟨b†b⟩
  std::complex<double> b_sq;  // ⟨b²⟩
};

/// θ ↦ θ mod π in [0, π).
inline double wrap_pi(double theta) {
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0) t += std::numbers::pi;
  if (t >= std::numbers::pi) t = 0.0;
  return t;
}

/// Report for the mechanical mode. Means enter ⟨b†b⟩ and ⟨b²⟩ but the
/// variance and angle refer to the fluctuations. Throws ConfigError for
/// a state violating the uncertainty relation by more than `eps`.
template <typename Real>
SqueezingReport<Real> squeezing_report(const GaussianState<Real>& s, double eps = 1e-9) {
  using std::sqrt;
  if (!is_physical(s, eps)) throw ConfigError("metrics", "non-physical covariance matrix");

  const Mat2<Real> b = s.mechanical_block();
  const Real sxx = b(0, 0), spp = b(1, 1), sxp = (b(0, 1) + b(1, 0)) / 2;
  const Real half = Real(1) / 2;
  const Real n_fluct = (sxx + spp - 1) / 2;
  const Real re = (sxx - spp) / 2;
  const Real im = sxp;
  const Real abs_b2 = sqrt(re * re + im * im);

  SqueezingReport<Real> rep;
  rep.var_min = half + n_fluct - abs_b2;

  const Mat2<Real> sym = (b + b.transpose()) / Real(2);
  Eigen::SelfAdjointEigenSolver<Mat2<Real>> es(sym, Eigen::EigenvaluesOnly);
  rep.var_min_eigen = es.eigenvalues()(0);

  rep.theta_sq = (re == 0 && im == 0) ? 0.0 : wrap_pi(std::atan2(to_double(im), to_double(re)) / 2);
  rep.s_db = -10.0 * std::log10(2.0 * to_double(rep.var_min));

  const Real xm = s.mean(2), pm = s.mean(3);
  rep.n_b_mean = n_fluct + (xm * xm + pm * pm) / 2;
  rep.b_sq = {to_double(re + (xm * xm - pm * pm) / 2), to_double(im + xm * pm)};
  return rep;
}

/// S in dB for a variance.
inline double squeezing_db(double var) { return -10.0 * std::log10(2.0 * var); }

// ---------------------------------------------------------------------------
// Closed-form asymptotes. Each returns the value with the regime warnings
// of the approximation it rests on.

struct Asymptote {
  double value = 0;
  std::vector<std::string> warnings;
};

inline const std::string kWarnNotUnstable = "parameters are not in the unstable regime (4g^2 <= delta*omega)";
inline const std::string kWarnThermalRate = "n_bar*gamma << delta violated (n_bar*gamma/delta > 0.1)";

namespace detail {

inline std::vector<std::string> asymptote_warnings(const SystemParams& p) {
  std::vector<std::string> w = validate_params(p);
  if (!is_unstable(p)) w.insert(w.begin(), kWarnNotUnstable);
  return w;
}

inline void require_coupling(const SystemParams& p) {
  if (!(p.g > 0)) throw RegimeError("metrics", "asymptote undefined for g = 0");
}

}  // namespace detail

/// Ω/(2Δ).
inline Asymptote asymptotic_var_lossless(const SystemParams& p) {
  return {p.omega / (2.0 * p.delta), detail::asymptote_warnings(p)};
}

/// θ_sq = arg(−1 + ΔΩ/(2g²) + i√(ΔΩ)/g)/2 in [0, π).
inline Asymptote asymptotic_angle(const SystemParams& p) {
  check_params(p);
  detail::require_coupling(p);
  const double dw = p.delta * p.omega;
  const std::complex<double> e2(-1.0 + dw / (2.0 * p.g * p.g), std::sqrt(dw) / p.g);
  return {wrap_pi(std::arg(e2) / 2.0), detail::asymptote_warnings(p)};
}

/// (Ω/2Δ)[1 + (κ/4g)√(Δ/Ω) + (ΓΔ²/4g³)√(Δ/Ω)].
inline double dissipative_variance(double delta, double omega, double g, double kappa, double gamma) {
  const double s = std::sqrt(delta / omega);
  return omega / (2.0 * delta) * (1.0 + kappa / (4.0 * g) * s + gamma * delta * delta / (4.0 * g * g * g) * s);
}

/// (Ω/2Δ)[1 + (κ/4g)√(Δ/Ω) + (n̄γ/2g)(Δ/Ω)^{3/2}].
inline double thermal_variance(double delta, double omega, double g, double kappa, double n_gamma) {
  const double s = std::sqrt(delta / omega);
  return omega / (2.0 * delta) * (1.0 + kappa / (4.0 * g) * s + n_gamma / (2.0 * g) * s * s * s);
}

inline Asymptote asymptotic_var_dissipative(const SystemParams& p) {
  check_params(p);
  detail::require_coupling(p);
  return {dissipative_variance(p.delta, p.omega, p.g, p.kappa, p.gamma_disp), detail::asymptote_warnings(p)};
}

/// Thermal-bath asymptote; `p.gamma_disp` is not part of it.
inline Asymptote asymptotic_var_thermal(const SystemParams& p, const ThermalBathParams& th) {
  check_params(p);
  check_params(th);
  detail::require_coupling(p);
  const double ng = th.n_bar * th.gamma_thermal;
  Asymptote a{thermal_variance(p.delta, p.omega, p.g, p.kappa, ng), detail::asymptote_warnings(p)};
  if (ng > kRotatingWaveMaxRatio * p.delta) a.warnings.push_back(kWarnThermalRate);
  return a;
}

// ---------------------------------------------------------------------------
// Extension time.

/// Σ_XbXb at which the position spread √(ħΣ/(mΩ)) equals 0.1 λ_c.
inline double extension_threshold(double mass, double omega_si, double lambda_c) {
  if (!(mass > 0) || !(omega_si > 0) || !(lambda_c > 0))
    throw ConfigError("metrics", "extension threshold needs positive mass, frequency and wavelength");
  const double x = 0.1 * lambda_c;
  return x * x * mass * omega_si / constants::hbar;
}

struct ExtensionTime {
  double t = std::numeric_limits<double>::infinity();  // +inf when never crossed
  bool crossed = false;
  bool recrossed = false;  // fell back below the threshold after the first crossing
};

/// First time √Σ_XbXb reaches √threshold, interpolated with a monotone
/// cubic (PCHIP) through √Σ_XbXb(t). Times are in the trajectory's units.
inline ExtensionTime extension_time(const std::vector<double>& times, const std::vector<double>& sigma_xx,
                                    double threshold) {
  if (times.size() != sigma_xx.size() || times.empty())
    throw ConfigError("metrics", "extension_time needs matching, non-empty time and variance series");
  if (!(threshold > 0)) throw ConfigError("metrics", "extension threshold must be > 0");

  std::vector<double> y(sigma_xx.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sqrt(std::max(sigma_xx[i], 0.0));
  const double target = std::sqrt(threshold);

  ExtensionTime out;
  std::size_t hit = y.size();
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] >= target) {
      hit = i;
      break;
    }
  if (hit == y.size()) return out;
  out.crossed = true;
  for (std::size_t i = hit + 1; i < y.size(); ++i)
    if (y[i] < target) out.recrossed = true;
  if (hit == 0) {
    out.t = times[0];
    return out;
  }

  const double t0 = times[hit - 1], t1 = times[hit];
  if (y.size() < 4) {
    out.t = t0 + (target - y[hit - 1]) / (y[hit] - y[hit - 1]) * (t1 - t0);
    return out;
  }
  auto spline = boost::math::interpolators::pchip(std::vector<double>(times), std::vector<double>(y));
  // The interpolant is monotone on [t0, t1] and brackets the target.
  double lo = t0, hi = t1;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (spline(mid) < target ? lo : hi) = mid;
  }
  out.t = 0.5 * (lo + hi);
  return out;
}

// ---------------------------------------------------------------------------
// Wigner function of the mechanical mode.

struct WignerGrid {
  std::vector<double> x, p;
  std::vector<double> w;  // w[i * p.size() + j] = W(x[i], p[j])

  double at(std::size_t i, std::size_t j) const { return w[i * p.size() + j]; }
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw ConfigError("metrics", "grid needs n >= 2 and hi > lo");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  return v;
}

/// Gaussian Wigner function of the reduced mechanical state.
template <typename Real>
WignerGrid wigner_grid(const GaussianState<Real>& s, const std::vector<double>& xs, const std::vector<double>& ps) {
  if (xs.empty() || ps.empty()) throw ConfigError("metrics", "empty Wigner grid");
  const Eigen::Matrix2d sb = s.mechanical_block().template cast<double>();
  const double det = sb.determinant();
  if (!(det > 0) || !std::isfinite(det)) throw NumericError("metrics", "singular mechanical covariance block");
  const Eigen::Matrix2d inv = sb.inverse();
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
  const double xm = to_double(s.mean(2)), pm = to_double(s.mean(3));

  WignerGrid g{xs, ps, std::vector<double>(xs.size() * ps.size())};
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const Eigen::Vector2d d(xs[i] - xm, ps[j] - pm);
      g.w[i * ps.size() + j] = norm * std::exp(-0.5 * d.dot(inv * d));
    }
  return g;
}

}  // namespace mechsq
