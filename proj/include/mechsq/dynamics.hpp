#pragma once

// Moment dynamics of the linearized master equation
//
//   dρ/dt = −i[H, ρ] + κ D[a]ρ − (Γ/2)[b + b†, [b + b†, ρ]]
//
// (optionally with a thermal mechanical bath), and the reduced model of the
// squeezed normal mode ĉ₂.
//
// For the ordering R = (X_a, P_a, X_b, P_b) the Heisenberg–Langevin
// equations give d⟨R⟩/dt = A⟨R⟩ and dΣ/dt = AΣ + ΣAᵀ + D with
//
//       [ −κ/2   Δ    0   0 ]
//   A = [ −Δ   −κ/2  −2g  0 ] ,   D = diag(κ/2, κ/2, 0, 2Γ).
//       [  0     0    0   Ω ]
//       [ −2g    0   −Ω   0 ]
//
// The cavity terms fix the vacuum (−κΣ + κ/2 = 0 at Σ = 1/2) and the
// displacement noise −(Γ/2)[√2X_b, [√2X_b, ρ]] diffuses P_b at rate 2Γ,
// i.e. d⟨b†b⟩/dt = Γ.

#include "mechsq/errors.hpp"
#include "mechsq/linalg.hpp"
#include "mechsq/model.hpp"
#include "mechsq/normalform.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <vector>

namespace mechsq {

template <typename Real = double>
struct DriftDiffusion {
  Mat4<Real> A = Mat4<Real>::Zero();
  Mat4<Real> D = Mat4<Real>::Zero();
};

template <typename Real = double>
DriftDiffusion<Real> build_drift_diffusion(const SystemParams& p) {
  check_params(p);
  DriftDiffusion<Real> dd;
  const Real half_kappa = Real(p.kappa) / 2;
  dd.A(0, 0) = -half_kappa;
  dd.A(0, 1) = Real(p.delta);
  dd.A(1, 0) = -Real(p.delta);
  dd.A(1, 1) = -half_kappa;
  dd.A(1, 2) = -2 * Real(p.g);
  dd.A(2, 3) = Real(p.omega);
  dd.A(3, 0) = -2 * Real(p.g);
  dd.A(3, 2) = -Real(p.omega);
  dd.D(0, 0) = half_kappa;
  dd.D(1, 1) = half_kappa;
  dd.D(3, 3) = 2 * Real(p.gamma_disp);
  return dd;
}

/// Adds the thermal mechanical bath γ(n̄+1)D[b] + γn̄D[b†] to the base model.
template <typename Real = double>
DriftDiffusion<Real> build_drift_diffusion_thermal(const SystemParams& p, const ThermalBathParams& th) {
  check_params(th);
  DriftDiffusion<Real> dd = build_drift_diffusion<Real>(p);
  const Real gamma = Real(th.gamma_thermal);
  dd.A(2, 2) -= gamma / 2;
  dd.A(3, 3) -= gamma / 2;
  dd.D(2, 2) += gamma * (Real(th.n_bar) + Real(1) / 2);
  dd.D(3, 3) += gamma * (Real(th.n_bar) + Real(1) / 2);
  return dd;
}

/// Largest real part of the drift spectrum (the growth rate of the means).
template <typename Real>
double max_growth_rate(const DriftDiffusion<Real>& dd) {
  const Eigen::Matrix4d a = dd.A.template cast<double>();
  Eigen::EigenSolver<Eigen::Matrix4d> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

/// Covariance entry magnitude at which integration stops. Tied to the
/// precision of Real so the smallest mechanical eigenvalue stays resolved.
template <typename Real>
double default_growth_limit() {
  if constexpr (std::is_same_v<Real, quad>) return 1e24;
  else return 1e12;
}

template <typename Real = double>
struct EvolveOptions {
  double max_entry = default_growth_limit<Real>();
};

template <typename Real = double>
struct Trajectory {
  std::vector<double> times;
  std::vector<GaussianState<Real>> states;
  bool halted = false;
  double t_reached = 0.0;
  std::string diagnostic;
};

/// Exact one-interval propagator: Σ ↦ ΦΣΦᵀ + Q, ⟨R⟩ ↦ Φ⟨R⟩ with
/// Φ = e^{A dt} and Q = ∫₀^dt e^{As} D e^{Aᵀs} ds from the Van Loan block
/// exponential of [[−A, D], [0, Aᵀ]]·dt.
template <typename Real>
struct Propagator {
  Mat4<Real> phi;
  Mat4<Real> q;

  GaussianState<Real> apply(const GaussianState<Real>& s) const {
    GaussianState<Real> out;
    out.mean = phi * s.mean;
    out.cov = phi * s.cov * phi.transpose() + q;
    out.cov = ((out.cov + out.cov.transpose()) / Real(2)).eval();
    return out;
  }
};

/// The block exponential contains e^{−A dt}, which blows up for long
/// intervals of damped dynamics, so the interval is halved until ‖A‖dt ≤ 1/2
/// and the propagator is composed back: (Φ, Q) ∘ (Φ, Q) = (Φ², ΦQΦᵀ + Q).
template <typename Real>
Propagator<Real> make_propagator(const DriftDiffusion<Real>& dd, double dt) {
  using Mat8 = Eigen::Matrix<Real, 8, 8>;
  const double norm = to_double(linalg::norm1(dd.A)) * dt;
  int halvings = 0;
  if (norm > 0.5) halvings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));

  Real h = Real(dt);
  for (int i = 0; i < halvings; ++i) h /= 2;
  Mat8 m = Mat8::Zero();
  m.template topLeftCorner<4, 4>() = -dd.A * h;
  m.template topRightCorner<4, 4>() = dd.D * h;
  m.template bottomRightCorner<4, 4>() = dd.A.transpose() * h;
  const Mat8 e = linalg::expm<Real, 8>(m);
  Propagator<Real> prop;
  prop.phi = e.template bottomRightCorner<4, 4>().transpose();
  prop.q = prop.phi * e.template topRightCorner<4, 4>();
  prop.q = ((prop.q + prop.q.transpose()) / Real(2)).eval();
  for (int i = 0; i < halvings; ++i) {
    prop.q = (prop.phi * prop.q * prop.phi.transpose() + prop.q).eval();
    prop.q = ((prop.q + prop.q.transpose()) / Real(2)).eval();
    prop.phi = (prop.phi * prop.phi).eval();
  }
  return prop;
}

inline void check_time_grid(const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("dynamics", "time grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0) throw ConfigError("dynamics", "time grid must be finite and >= 0");
    if (i > 0 && !(times[i] > times[i - 1])) throw ConfigError("dynamics", "time grid must be strictly increasing");
  }
}

/// Uniform grid t_k = t_max·k/(samples−1), k = 0..samples−1.
inline std::vector<double> uniform_grid(double t_max, int samples) {
  if (samples < 2 || !(t_max > 0)) throw ConfigError("dynamics", "uniform grid needs samples >= 2 and t_max > 0");
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) t[static_cast<std::size_t>(k)] = t_max * k / (samples - 1);
  return t;
}

/// Exact moment evolution on `times` (ascending, starting anywhere >= 0;
/// s0 is the state at t = 0). Stops early, flagging `halted`, once a
/// covariance entry exceeds `opts.max_entry` or turns non-finite; the states
/// computed so far are returned.
template <typename Real>
Trajectory<Real> evolve(const DriftDiffusion<Real>& dd, const GaussianState<Real>& s0,
                        const std::vector<double>& times, const EvolveOptions<Real>& opts = {}) {
  check_time_grid(times);
  Trajectory<Real> traj;
  traj.times.reserve(times.size());
  traj.states.reserve(times.size());

  GaussianState<Real> state = s0;
  double t_now = 0.0;
  double cached_dt = -1.0;
  Propagator<Real> prop;
  for (const double t : times) {
    const double dt = t - t_now;
    if (dt > 0) {
      if (dt != cached_dt) {
        prop = make_propagator(dd, dt);
        cached_dt = dt;
      }
      state = prop.apply(state);
      t_now = t;
    }
    const double biggest = to_double(linalg::max_abs(state.cov));
    if (!std::isfinite(biggest) || biggest > opts.max_entry) {
      traj.halted = true;
      traj.diagnostic = "covariance entry exceeded " + std::to_string(opts.max_entry) + " at t=" + std::to_string(t) +
                        "; last valid time " + std::to_string(traj.t_reached);
      return traj;
    }
    traj.times.push_back(t);
    traj.states.push_back(state);
    traj.t_reached = t;
  }
  return traj;
}

/// Steady state of a Hurwitz drift (AΣ + ΣAᵀ + D = 0, zero means).
template <typename Real>
GaussianState<Real> stationary_state(const DriftDiffusion<Real>& dd) {
  if (!(max_growth_rate(dd) < 0)) throw RegimeError("dynamics", "no steady state: drift is not Hurwitz");
  GaussianState<Real> s;
  s.mean.setZero();
  s.cov = linalg::solve_lyapunov<Real, 4>(dd.A, dd.D);
  return s;
}

/// Rotates the mechanical phase space by `angle`, as free evolution for a
/// time Ωt = angle does: X ↦ X cos φ + P sin φ, P ↦ −X sin φ + P cos φ.
/// After rotating by θ_sq + π/2 the position X̂(0) carries the minimal variance.
template <typename Real>
GaussianState<Real> rotate_mechanical(const GaussianState<Real>& s, double angle) {
  using std::cos;
  using std::sin;
  Mat4<Real> rot = Mat4<Real>::Identity();
  const Real c = Real(std::cos(angle));
  const Real sn = Real(std::sin(angle));
  rot(2, 2) = c;
  rot(2, 3) = sn;
  rot(3, 2) = -sn;
  rot(3, 3) = c;
  GaussianState<Real> out;
  out.mean = rot * s.mean;
  out.cov = rot * s.cov * rot.transpose();
  out.cov = ((out.cov + out.cov.transpose()) / Real(2)).eval();
  return out;
}

// ---------------------------------------------------------------------------
// Reduced model of the squeezed normal mode.

using Moments3 = std::array<std::complex<double>, 3>;  // ⟨c₂†c₂⟩, ⟨c₂†²⟩, ⟨c₂²⟩

struct ReducedModel {
  double gamma_d = 0;            // κ|T₁₂|²
  double gamma_a = 0;            // κ|T₁₄|²
  std::complex<double> w;        // κ T₁₂ T₁₄*
  std::complex<double> eta;      // 1 − iP₂₄
  Moments3 moments{};
};

/// Rates of the ĉ₂ cavity and particle dissipators. The cavity loss
/// κD[a] with a = Σᵢ T₁ᵢφᵢ contributes κ|T₁₂|² D[c₂], κ|T₁₄|² D[c₂†] and the
/// cross term κT₁₂T₁₄*; far detuned these approach κg²/Δ² and
/// κg²/Δ² + iκr/(4Δ).
inline ReducedModel reduced_model_rates(const SystemParams& p, const NormalForm& nf) {
  if (!is_unstable(p)) throw RegimeError("dynamics", "reduced model requires the unstable regime");
  ReducedModel rm;
  rm.gamma_d = p.kappa * std::norm(nf.T(0, 1));
  rm.gamma_a = p.kappa * std::norm(nf.T(0, 3));
  rm.w = p.kappa * nf.T(0, 1) * std::conj(nf.T(0, 3));
  rm.eta = std::complex<double>(1.0, -nf.P24);
  return rm;
}

namespace detail {

// Permutation from state ordering (X_a, P_a, X_b, P_b) to mode-major (X_a, X_b, P_a, P_b).
inline Eigen::Matrix4d mode_major_permutation() {
  Eigen::Matrix4d pm = Eigen::Matrix4d::Zero();
  pm(0, 0) = 1;
  pm(1, 2) = 1;
  pm(2, 1) = 1;
  pm(3, 3) = 1;
  return pm;
}

}  // namespace detail

/// ⟨ΨΨ†⟩ for Ψ = (a, b, a†, b†) from the covariance (fluctuations only).
template <typename Real>
Matrix4c ladder_correlations(const GaussianState<Real>& s) {
  const Eigen::Matrix4d pm = detail::mode_major_permutation();
  const Eigen::Matrix4d sigma = pm * s.cov.template cast<double>() * pm.transpose();
  Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
  j.topRightCorner<2, 2>().setIdentity();
  j.bottomLeftCorner<2, 2>() = -Eigen::Matrix2d::Identity();
  const Matrix4c second = sigma.cast<std::complex<double>>() + std::complex<double>(0, 0.5) * j.cast<std::complex<double>>();
  const Matrix4c gm = quadrature_map();
  return gm.adjoint() * second * gm;
}

/// Initial ĉ₂ moments from a physical state: ⟨ΦΦ†⟩ = T⁻¹⟨ΨΨ†⟩T⁻†.
template <typename Real>
Moments3 reduced_initial_moments(const NormalForm& nf, const GaussianState<Real>& s) {
  const Matrix4c ti = inverse_transform(nf);
  const Matrix4c l = ti * ladder_correlations(s) * ti.adjoint();
  return {std::complex<double>(l(1, 1).real() - 1.0, 0.0), l(3, 1), l(1, 3)};
}

/// Closed-form solution of the ĉ₂ moment equations
///   d⟨c†c⟩/dt = r(⟨c†²⟩ + ⟨c²⟩) + γ^(a) + Γ|η|²
///   d⟨c†²⟩/dt = 2r⟨c†c⟩ + r − w − Γη²,   d⟨c²⟩/dt = conjugate.
/// With u = 2⟨c†c⟩ and s = ⟨c†²⟩ + ⟨c²⟩ the sums u ± s decouple with rates
/// ±2r and the difference ⟨c†²⟩ − ⟨c²⟩ grows linearly.
inline ReducedModel evolve_reduced(const ReducedModel& rm, double r, double gamma_disp, double t) {
  using C = std::complex<double>;
  const C eta = rm.eta;
  const C f1 = rm.gamma_a + gamma_disp * std::norm(eta);
  const C f2 = r - rm.w - gamma_disp * eta * eta;
  const C f3 = r - std::conj(rm.w) - gamma_disp * std::conj(eta) * std::conj(eta);

  const auto& m0 = rm.moments;
  const C u0 = 2.0 * m0[0];
  const C s0 = m0[1] + m0[2];
  const C d0 = m0[1] - m0[2];
  const C p0 = u0 + s0, q0 = u0 - s0;
  const C cp = 2.0 * f1 + (f2 + f3);
  const C cq = 2.0 * f1 - (f2 + f3);

  // (e^{±2rt} − 1)/(±2r), with the r → 0 limit t.
  auto growth = [t](double rate) { return rate == 0.0 ? t : std::expm1(rate * t) / rate; };
  const C p = p0 * std::exp(2.0 * r * t) + cp * growth(2.0 * r);
  const C q = q0 * std::exp(-2.0 * r * t) + cq * growth(-2.0 * r);
  const C d = d0 + (f2 - f3) * t;
  const C s = (p - q) / 2.0;

  ReducedModel out = rm;
  out.moments[0] = C(((p + q) / 4.0).real(), 0.0);
  out.moments[1] = (s + d) / 2.0;
  out.moments[2] = std::conj(out.moments[1]);
  return out;
}

/// Mechanical covariance block reconstructed from the ĉ₂ moments with ĉ₁
/// held in its vacuum and ĉ₁–ĉ₂ correlations dropped.
inline Eigen::Matrix2d reduced_mechanical_block(const NormalForm& nf, const Moments3& m) {
  Matrix4c l = Matrix4c::Zero();
  l(0, 0) = 1.0;               // ⟨c₁c₁†⟩
  l(1, 1) = m[0] + 1.0;        // ⟨c₂c₂†⟩
  l(3, 3) = m[0];              // ⟨c₂†c₂⟩
  l(1, 3) = m[2];              // ⟨c₂c₂⟩
  l(3, 1) = m[1];              // ⟨c₂†c₂†⟩
  const Matrix4c k = nf.T * l * nf.T.adjoint();
  const double n = k(1, 1).real() - 1.0;  // ⟨b†b⟩
  const std::complex<double> bb = k(1, 3);  // ⟨b²⟩
  Eigen::Matrix2d sigma;
  sigma(0, 0) = n + 0.5 + bb.real();
  sigma(1, 1) = n + 0.5 - bb.real();
  sigma(0, 1) = sigma(1, 0) = bb.imag();
  return sigma;
}

}  // namespace mechsq
