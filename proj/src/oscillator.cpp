#include "bangbang/oscillator.hpp"

#include <cmath>
#include <string>

#include "bangbang/constants.hpp"
#include "bangbang/error.hpp"

namespace bangbang {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw DomainError(std::string(name) + " must be positive and finite, got " +
                          std::to_string(value));
}

}  // namespace

double ground_state_extent(double ion_mass_u, double trap_freq) {
    require_positive(ion_mass_u, "ion_mass");
    require_positive(trap_freq, "trap_freq");
    const double mass = ion_mass_u * constants::atomic_mass_unit;
    return std::sqrt(constants::hbar / (2.0 * mass * trap_freq));
}

OscillatorParams::OscillatorParams(double ion_mass_u, double trap_freq, double wavelength,
                                   double beam_angle)
    : ion_mass_u_(ion_mass_u),
      trap_freq_(trap_freq),
      wavelength_(wavelength),
      beam_angle_(beam_angle) {
    require_positive(wavelength, "wavelength");
    if (!std::isfinite(beam_angle) || beam_angle < 0.0 || beam_angle > constants::pi / 2 + 1e-12)
        throw DomainError("beam_angle must lie in [0, pi/2] rad, got " + std::to_string(beam_angle));
    x0_ = bangbang::ground_state_extent(ion_mass_u, trap_freq);
    // cos(pi/2) is 6e-17 in floating point; clamp so perpendicular beams give exactly zero.
    double c = std::cos(beam_angle);
    if (std::abs(c) < 1e-15) c = 0.0;
    kx_ = constants::two_pi / wavelength * c;
    eta_ = kx_ * x0_;
}

OscillatorParams OscillatorParams::with_trap_freq(double trap_freq) const {
    return {ion_mass_u_, trap_freq, wavelength_, beam_angle_};
}

OscillatorParams OscillatorParams::with_beam_angle(double beam_angle) const {
    return {ion_mass_u_, trap_freq_, wavelength_, beam_angle};
}

double ground_state_extent(const OscillatorParams& params) { return params.ground_state_extent(); }

double lamb_dicke(const OscillatorParams& params) { return params.lamb_dicke(); }

double displacement_alpha(double x_d, const OscillatorParams& params) {
    if (!(x_d >= 0.0)) throw DomainError("displacement must be non-negative");
    return x_d / (2.0 * params.ground_state_extent());
}

double residual_alpha(double alpha0, double dwell_time, double trap_freq) {
    if (!(alpha0 >= 0.0)) throw DomainError("alpha0 must be non-negative");
    return 2.0 * alpha0 * std::abs(std::sin(0.5 * trap_freq * dwell_time));
}

void DisplacementProtocol::validate() const {
    if (!(x_d >= 0.0)) throw DomainError("x_d must be non-negative");
    if (!(dwell_time >= 0.0)) throw DomainError("dwell_time must be non-negative");
    if (hold_periods < 0) throw DomainError("hold_periods must be non-negative");
}

double DisplacementProtocol::effective_dwell(double trap_freq) const {
    if (!trigger_exact_period) return dwell_time;
    return static_cast<double>(hold_periods) * constants::two_pi / trap_freq;
}

}  // namespace bangbang
