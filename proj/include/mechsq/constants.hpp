#pragma once

// CODATA 2018 exact / recommended values, SI units.

#include <numbers>

namespace mechsq::constants {

inline constexpr double c = 299792458.0;            // m/s
inline constexpr double epsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double pi = std::numbers::pi;

}  // namespace mechsq::constants
