#pragma once

// Instability classification and the canonical transformation of the
// two-mode Hamiltonian H = Δa†a + Ωb†b + g(a + a†)(b + b†) to the normal
// form H = ω₁c₁†c₁ + (ir/2)(c₂†² − c₂²) in the unstable regime 4g² > ΔΩ.
//
// The transformation is Ψ = T Φ with Ψ = (a, b, a†, b†), Φ = (c₁, c₂, c₁†, c₂†)
// and T = G†PG. G maps (o₁, o₂, o₁†, o₂†) to the mode-major quadratures
// (X₁, X₂, P₁, P₂), so P is the real symplectic matrix taking normal-mode
// quadratures (X₁, X₂, P₁, P₂) to physical ones (X_a, X_b, P_a, P_b).

#include "mechsq/errors.hpp"
#include "mechsq/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace mechsq {

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;

/// 4g²/(ΔΩ); the dynamics is unstable iff the ratio exceeds 1.
inline double instability_ratio(const SystemParams& p) {
  check_params(p);
  return 4.0 * p.g * p.g / (p.delta * p.omega);
}

/// The boundary ratio == 1 counts as not unstable (r = 0 there).
inline bool is_unstable(const SystemParams& p) { return instability_ratio(p) > 1.0; }

struct NormalForm {
  double zeta = 0;    // ζ⁴ = (Δ² − Ω²)² + 16ΔΩg²
  double omega1 = 0;  // ω₁² = (ζ² + Δ² + Ω²)/2
  double r = 0;       // r² = (ζ² − Δ² − Ω²)/2
  double a_plus = 0, a_minus = 0, b_plus = 0, b_minus = 0;
  Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
  Matrix4c T = Matrix4c::Zero();
  double P24 = 0;  // P(2,4), 1-based; enters η = 1 − iP₂₄
};

namespace detail {

inline Matrix4c g_matrix() {
  using C = std::complex<double>;
  const double s = 1.0 / std::sqrt(2.0);
  const C i{0.0, 1.0};
  Matrix4c gm = Matrix4c::Zero();
  for (int k = 0; k < 2; ++k) {
    gm(k, k) = s;
    gm(k, k + 2) = s;
    gm(k + 2, k) = -i * s;
    gm(k + 2, k + 2) = i * s;
  }
  return gm;
}

}  // namespace detail

/// G of the factorisation T = G†PG: (o, o†) → (X, P), mode-major.
inline Matrix4c quadrature_map() { return detail::g_matrix(); }

/// 𝓘 = diag(1, 1, −1, −1).
inline Eigen::Matrix4d bosonic_metric() { return Eigen::Vector4d(1, 1, -1, -1).asDiagonal(); }

/// Closed-form normal form. Throws RegimeError unless 4g² > ΔΩ.
inline NormalForm compute_normal_form(const SystemParams& p) {
  const double ratio = instability_ratio(p);
  if (!(ratio > 1.0))
    throw RegimeError("normalform", "normal form requires 4g^2/(delta*omega) > 1, got " + std::to_string(ratio));

  const double d = p.delta, w = p.omega, g = p.g;
  const double d2 = d * d, w2 = w * w;
  const double zeta2 = std::sqrt((d2 - w2) * (d2 - w2) + 16.0 * d * w * g * g);

  // Radicands of a±, b±. The minus branches are written without the
  // ζ² − (Δ² ± Ω²) cancellation; they are algebraically identical.
  const double ap2 = (zeta2 + d2 + w2) / (2.0 * d2);
  const double am2 = 2.0 * w * (4.0 * g * g - d * w) / (d * (zeta2 + d2 + w2));
  const double bp2 = (zeta2 + d2 - w2) / (2.0 * d2);
  const double bm2 = 8.0 * w * g * g / (d * (zeta2 + d2 - w2));
  if (!(ap2 > 0) || !(am2 > 0) || !(bp2 > 0) || !(bm2 > 0))
    throw RegimeError("normalform", "negative radicand in transformation factors");

  NormalForm nf;
  nf.zeta = std::sqrt(zeta2);
  nf.a_plus = std::sqrt(ap2);
  nf.a_minus = std::sqrt(am2);
  nf.b_plus = std::sqrt(bp2);
  nf.b_minus = std::sqrt(bm2);
  nf.omega1 = d * nf.a_plus;
  nf.r = d * nf.a_minus;

  const double z = nf.zeta;
  const double ap = nf.a_plus, am = nf.a_minus, bp = nf.b_plus;
  const double gw = g * w;
  auto& m = nf.P;
  m.setZero();
  m(0, 0) = bp / std::sqrt(ap) * (d / z);
  m(0, 1) = -bm2 * (d2 / (2.0 * gw));
  m(0, 3) = (1.0 / am) * (gw / zeta2);
  m(1, 0) = 2.0 / (bp * std::sqrt(ap)) * (gw / (d * z));
  m(1, 1) = 1.0;
  m(1, 3) = -2.0 / (am * bm2) * std::pow(gw / (d * z), 2);
  m(2, 1) = (1.0 / am) * (bm2 * (d2 / (2.0 * gw)) - 2.0 * g / d);
  m(2, 2) = 1.0 / std::pow(ap, 1.5) * (bp * (d / z) + 4.0 / bp * (g * gw / (d2 * z)));
  m(2, 3) = 1.0 / am2 * (gw / zeta2 - 4.0 / bm2 * (g * g * gw * w / (d2 * d * zeta2)));
  m(3, 1) = am * (d / w);
  m(3, 2) = 2.0 * std::sqrt(ap) / bp * (g / z);
  m(3, 3) = 2.0 / bm2 * (g * gw / (d * zeta2));
  nf.P24 = m(1, 3);

  const Matrix4c gm = detail::g_matrix();
  nf.T = gm.adjoint() * m.cast<std::complex<double>>() * gm;
  return nf;
}

/// T⁻¹ = 𝓘T†𝓘 (exact for a symplectic T).
inline Matrix4c inverse_transform(const NormalForm& nf) {
  const Matrix4c metric = bosonic_metric().cast<std::complex<double>>();
  return metric * nf.T.adjoint() * metric;
}

/// Quadratic-form matrix of the linearized Hamiltonian, H = ½ Rᵀ H R with
/// R = (X_a, X_b, P_a, P_b) (mode-major, the ordering P acts on).
inline Eigen::Matrix4d hamiltonian_matrix(const SystemParams& p) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(0, 0) = p.delta;
  h(1, 1) = p.omega;
  h(0, 1) = h(1, 0) = 2.0 * p.g;
  h(2, 2) = p.delta;
  h(3, 3) = p.omega;
  return h;
}

/// Quadratic-form matrix of the normal form in (X₁, X₂, P₁, P₂):
/// ω₁(X₁² + P₁²)/2 + r X₂P₂.
inline Eigen::Matrix4d normal_form_matrix(const NormalForm& nf) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(0, 0) = h(2, 2) = nf.omega1;
  h(1, 3) = h(3, 1) = nf.r;
  return h;
}

/// Far-detuned (Δ ≫ Ω) approximation of P.
inline Eigen::Matrix4d far_detuned_P(const SystemParams& p) {
  check_params(p);
  const double d = p.delta, w = p.omega, g = p.g;
  const double s = std::sqrt(w / d);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = 1.0;
  m(0, 1) = -2.0 * g / d;
  m(0, 3) = 0.5 * s;
  m(1, 1) = 1.0;
  m(1, 3) = -(d / (4.0 * g)) * s;
  m(2, 1) = -(4.0 * g * g / (d * d)) * s;
  m(2, 2) = 1.0;
  m(3, 1) = 2.0 * g / std::sqrt(d * w);
  m(3, 2) = 2.0 * g / d;
  m(3, 3) = 0.5;
  return m;
}

/// ĉ₂ ≈ mechanical·(b + b†) + cavity·(a† − a) for Δ ≫ Ω.
struct C2Composition {
  std::complex<double> mechanical;
  std::complex<double> cavity;
};

inline C2Composition c2_far_detuned_composition(const SystemParams& p) {
  check_params(p);
  const std::complex<double> i{0.0, 1.0};
  const std::complex<double> lead = -i * (p.g / std::sqrt(p.omega * p.delta));
  return {lead, lead * i * std::sqrt(p.omega / p.delta)};
}

}  // namespace mechsq
