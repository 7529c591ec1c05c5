#pragma once

// Scalar types used by the numerics. Everything numeric is templated on a
// real scalar; `double` is the default and `quad` (IEEE binary128) is used
// for trajectories of the unstable dynamics, whose covariance grows as
// e^{2rt} and outruns double precision long before the squeezing plateau.

#include <boost/multiprecision/float128.hpp>

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <type_traits>

namespace mechsq {

using quad = boost::multiprecision::float128;

template <typename T>
inline constexpr bool is_real_scalar_v =
    std::is_floating_point_v<T> || std::is_same_v<T, quad>;

template <typename T>
concept RealScalar = is_real_scalar_v<T>;

template <RealScalar Real>
inline double to_double(const Real& x) {
  return static_cast<double>(x);
}

template <RealScalar Real>
inline Real epsilon() {
  return std::numeric_limits<Real>::epsilon();
}

}  // namespace mechsq

namespace Eigen {

template <>
struct NumTraits<mechsq::quad> : GenericNumTraits<mechsq::quad> {
  using Real = mechsq::quad;
  using NonInteger = mechsq::quad;
  using Nested = mechsq::quad;
  using Literal = mechsq::quad;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8
  };
  static inline int digits10() { return std::numeric_limits<mechsq::quad>::digits10; }
  static inline Real dummy_precision() { return Real(1e-28); }
};

}  // namespace Eigen
