#pragma once

#include <numbers>

namespace bangbang::constants {

// CODATA 2018.
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double electron_mass_u = 5.48579909065e-4;    // u

// 40Ca atomic mass minus one electron.
inline constexpr double ca40_ion_mass_u = 39.962590863 - electron_mass_u;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace bangbang::constants
