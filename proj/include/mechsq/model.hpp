#pragma once

// Parameter and state types shared by all modules.
//
// Conventions:
//  * hbar = 1; every rate is a dimensionless multiple of `unit_scale`.
//  * Quadratures X = (o + o†)/√2, P = i(o† − o)/√2; state vectors are
//    ordered (X_a, P_a, X_b, P_b) with a the cavity and b the mechanics.
//  * Covariance Σ_ij = ⟨{δR_i, δR_j}⟩/2, so the vacuum has Σ = I/2.

#include "mechsq/errors.hpp"
#include "mechsq/linalg.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mechsq {

struct SystemParams {
  double delta = 1.0;       // cavity detuning Δ = ω_c − ω_t
  double omega = 0.01;      // mechanical frequency Ω
  double g = 0.0;           // optomechanical coupling
  double kappa = 0.0;       // photon loss, d⟨a†a⟩/dt = −κ⟨a†a⟩
  double gamma_disp = 0.0;  // displacement noise, d⟨b†b⟩/dt = Γ
  double unit_scale = 1.0;  // reference frequency (rad/s) the rates are scaled by

  bool operator==(const SystemParams&) const = default;
};

struct ThermalBathParams {
  double gamma_thermal = 0.0;  // mechanical decay γ
  double n_bar = 0.0;          // bath occupation

  bool operator==(const ThermalBathParams&) const = default;
};

struct InitialConditions {
  double n_bar_b = 0.0;  // initial mechanical thermal occupation
  bool cavity_vacuum = true;

  bool operator==(const InitialConditions&) const = default;
};

template <typename Real = double>
struct GaussianState {
  Vec4<Real> mean = Vec4<Real>::Zero();
  Mat4<Real> cov = Mat4<Real>::Identity() / Real(2);

  Mat2<Real> mechanical_block() const { return cov.template bottomRightCorner<2, 2>(); }
  Mat2<Real> cavity_block() const { return cov.template topLeftCorner<2, 2>(); }

  template <typename Other>
  GaussianState<Other> cast() const {
    return {mean.template cast<Other>(), cov.template cast<Other>()};
  }

  bool operator==(const GaussianState&) const = default;
};

namespace detail {

inline void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError("model", std::string(name) + " is not finite");
}

inline void require_nonnegative(double v, const char* name) {
  require_finite(v, name);
  if (v < 0) throw ConfigError("model", std::string(name) + " must be >= 0");
}

inline void require_positive(double v, const char* name) {
  require_finite(v, name);
  if (!(v > 0)) throw ConfigError("model", std::string(name) + " must be > 0");
}

}  // namespace detail

/// Hard checks; throws ConfigError. Use validate_params() for regime warnings.
inline void check_params(const SystemParams& p) {
  detail::require_positive(p.delta, "delta");
  detail::require_positive(p.omega, "omega");
  detail::require_nonnegative(p.g, "g");
  detail::require_nonnegative(p.kappa, "kappa");
  detail::require_nonnegative(p.gamma_disp, "gamma_disp");
  detail::require_positive(p.unit_scale, "unit_scale");
}

inline void check_params(const ThermalBathParams& th) {
  detail::require_nonnegative(th.gamma_thermal, "gamma_thermal");
  detail::require_nonnegative(th.n_bar, "n_bar");
}

inline void check_params(const InitialConditions& ic) {
  detail::require_nonnegative(ic.n_bar_b, "n_bar_b");
}

// Ratios at which the analytic approximations are flagged as weak.
inline constexpr double kFarDetunedMinRatio = 10.0;  // Δ/Ω
inline constexpr double kRotatingWaveMaxRatio = 0.1;  // κ/Δ

inline const std::string kWarnFarDetuned = "far-detuned assumption weak (delta/omega < 10)";
inline const std::string kWarnRotatingWave = "kappa << delta violated (kappa/delta > 0.1)";

/// Validates hard constraints (throws) and returns regime warnings for the
/// analytic approximations: the rotating-wave step needs κ ≪ Δ and the
/// far-detuned asymptotics need Δ ≫ Ω.
inline std::vector<std::string> validate_params(const SystemParams& p) {
  check_params(p);
  std::vector<std::string> warnings;
  if (p.delta < kFarDetunedMinRatio * p.omega) warnings.push_back(kWarnFarDetuned);
  if (p.kappa > kRotatingWaveMaxRatio * p.delta) warnings.push_back(kWarnRotatingWave);
  return warnings;
}

/// Cavity in vacuum, mechanics thermal with occupation n̄_b, zero means.
template <typename Real = double>
GaussianState<Real> make_thermal_vacuum_state(const InitialConditions& ic) {
  check_params(ic);
  GaussianState<Real> s;
  s.mean.setZero();
  s.cov.setZero();
  const Real half = Real(1) / 2;
  const Real thermal = Real(ic.n_bar_b) + half;
  s.cov(0, 0) = half;
  s.cov(1, 1) = half;
  s.cov(2, 2) = thermal;
  s.cov(3, 3) = thermal;
  return s;
}

/// Smallest eigenvalue of Σ + (i/2)Ω_s; the state is physical iff it is >= 0.
template <typename Real>
Real physicality_margin(const GaussianState<Real>& s) {
  const Mat4<Real> sym = (s.cov + s.cov.transpose()) / Real(2);
  const Mat4<Real> omega = linalg::symplectic_form<Real>() / Real(2);
  return linalg::min_eigenvalue_hermitian<Real, 4>(sym, omega);
}

template <typename Real>
Real symmetry_defect(const GaussianState<Real>& s) {
  return linalg::max_abs(s.cov - s.cov.transpose());
}

/// Heisenberg physicality with absolute tolerance `eps`.
template <typename Real>
bool is_physical(const GaussianState<Real>& s, double eps = 1e-9) {
  return symmetry_defect(s) <= Real(eps) && physicality_margin(s) >= -Real(eps);
}

}  // namespace mechsq
