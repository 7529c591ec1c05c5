#pragma once

// Small dense linear algebra on fixed-size Eigen matrices, templated on the
// real scalar so the same code runs in double and binary128.

#include "mechsq/errors.hpp"
#include "mechsq/scalar.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace mechsq {

template <typename Real>
using Mat2 = Eigen::Matrix<Real, 2, 2>;
template <typename Real>
using Mat4 = Eigen::Matrix<Real, 4, 4>;
template <typename Real>
using Vec4 = Eigen::Matrix<Real, 4, 1>;

namespace linalg {

template <typename Derived>
auto norm1(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

template <typename Derived>
auto max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
/// The argument is scaled so that its 1-norm is at most 1/2, the series is
/// summed until the next term is below machine precision of `Real`, and the
/// result is squared back.
template <typename Real, int N>
Eigen::Matrix<Real, N, N> expm(const Eigen::Matrix<Real, N, N>& a) {
  using std::ceil;
  using std::log2;
  using Matrix = Eigen::Matrix<Real, N, N>;

  const double norm = to_double(norm1(a));
  if (!std::isfinite(norm)) throw NumericError("linalg", "expm of a non-finite matrix");

  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  Real scale = 1;
  for (int i = 0; i < squarings; ++i) scale /= 2;
  const Matrix x = a * scale;

  Matrix result = Matrix::Identity();
  Matrix term = Matrix::Identity();
  const Real tol = epsilon<Real>();
  for (int k = 1; k < 80; ++k) {
    term = (term * x) / Real(k);
    result += term;
    if (norm1(term) <= tol * norm1(result)) break;
  }
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();
  return result;
}

/// Symplectic form for the quadrature ordering (X_a, P_a, X_b, P_b).
template <typename Real>
Mat4<Real> symplectic_form() {
  Mat4<Real> j = Mat4<Real>::Zero();
  j(0, 1) = 1;
  j(1, 0) = -1;
  j(2, 3) = 1;
  j(3, 2) = -1;
  return j;
}

/// Smallest eigenvalue of the Hermitian matrix X + iY (X symmetric, Y
/// antisymmetric), via the real symmetric embedding [[X, -Y], [Y, X]],
/// whose spectrum is that of X + iY with every eigenvalue doubled.
template <typename Real, int N>
Real min_eigenvalue_hermitian(const Eigen::Matrix<Real, N, N>& x,
                              const Eigen::Matrix<Real, N, N>& y) {
  Eigen::Matrix<Real, 2 * N, 2 * N> emb;
  emb.template topLeftCorner<N, N>() = x;
  emb.template topRightCorner<N, N>() = -y;
  emb.template bottomLeftCorner<N, N>() = y;
  emb.template bottomRightCorner<N, N>() = x;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Real, 2 * N, 2 * N>> es(emb, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("linalg", "eigenvalue iteration did not converge");
  return es.eigenvalues()(0);
}

/// Solves A X + X Aᵀ + D = 0 for X by vectorisation (Kronecker form).
/// Requires A to have no pair of eigenvalues summing to zero.
template <typename Real, int N>
Eigen::Matrix<Real, N, N> solve_lyapunov(const Eigen::Matrix<Real, N, N>& a,
                                         const Eigen::Matrix<Real, N, N>& d) {
  constexpr int M = N * N;
  Eigen::Matrix<Real, M, M> k = Eigen::Matrix<Real, M, M>::Zero();
  // vec(A X) = (I ⊗ A) vec X, vec(X Aᵀ) = (A ⊗ I) vec X, column-major vec.
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int l = 0; l < N; ++l) {
        k(j * N + i, j * N + l) += a(i, l);
        k(j * N + i, l * N + i) += a(j, l);
      }
  Eigen::Matrix<Real, M, 1> rhs;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) rhs(j * N + i) = -d(i, j);
  Eigen::FullPivLU<Eigen::Matrix<Real, M, M>> lu(k);
  if (!lu.isInvertible()) throw NumericError("linalg", "Lyapunov operator is singular");
  const Eigen::Matrix<Real, M, 1> v = lu.solve(rhs);
  Eigen::Matrix<Real, N, N> x;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) x(i, j) = v(j * N + i);
  return (x + x.transpose()) / Real(2);
}

}  // namespace linalg
}  // namespace mechsq
