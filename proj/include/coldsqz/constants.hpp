#pragma once

#include <numbers>

namespace coldsqz::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA, six significant digits.
inline constexpr double boltzmann = 1.38065e-23;    // J/K
inline constexpr double cesium_mass = 2.20695e-25;  // kg, 133Cs
inline constexpr double standard_gravity = 9.80665; // m/s^2

} // namespace coldsqz::constants
