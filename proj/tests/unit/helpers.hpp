#pragma once

#include "bangbang/constants.hpp"
#include "bangbang/oscillator.hpp"

namespace testing {

inline double mhz(double f) { return bangbang::constants::two_pi * f * 1e6; }
inline double khz(double f) { return bangbang::constants::two_pi * f * 1e3; }

inline bangbang::OscillatorParams ca40(double trap_mhz = 2.3505) {
    return {bangbang::constants::ca40_ion_mass_u, mhz(trap_mhz), 729e-9, bangbang::constants::pi / 4};
}

}  // namespace testing
