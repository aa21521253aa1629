#pragma once

#include <cstdint>

namespace bangbang {

/// Axial trap mode plus probe-beam geometry. Derived quantities are
/// recomputed by every constructor / with_* call, so an instance is always
/// self-consistent.
class OscillatorParams {
  public:
    /// ion_mass in atomic mass units, trap_freq angular (rad/s),
    /// wavelength in m, beam_angle in rad between beam and motional axis.
    OscillatorParams(double ion_mass_u, double trap_freq, double wavelength, double beam_angle);

    double ion_mass_u() const noexcept { return ion_mass_u_; }
    double trap_freq() const noexcept { return trap_freq_; }
    double wavelength() const noexcept { return wavelength_; }
    double beam_angle() const noexcept { return beam_angle_; }

    double ground_state_extent() const noexcept { return x0_; }
    double wavevector_projection() const noexcept { return kx_; }
    double lamb_dicke() const noexcept { return eta_; }

    OscillatorParams with_trap_freq(double trap_freq) const;
    OscillatorParams with_beam_angle(double beam_angle) const;

    bool operator==(const OscillatorParams&) const = default;

  private:
    double ion_mass_u_;
    double trap_freq_;
    double wavelength_;
    double beam_angle_;
    double x0_;
    double kx_;
    double eta_;
};

/// Ground-state rms extent sqrt(hbar / (2 M w)).
double ground_state_extent(double ion_mass_u, double trap_freq);
double ground_state_extent(const OscillatorParams& params);

double lamb_dicke(const OscillatorParams& params);

/// Coherent amplitude created by a sudden shift of the well by x_d.
double displacement_alpha(double x_d, const OscillatorParams& params);

/// |alpha| left in the original well after a round trip of duration dwell in
/// the displaced well. Evaluated in the half-angle form 2 a0 |sin(w dt / 2)|,
/// which equals a0 sqrt(2 (1 - cos w dt)) without cancellation near dt = 2 pi k / w.
double residual_alpha(double alpha0, double dwell_time, double trap_freq);

struct DisplacementProtocol {
    double x_d = 0.0;         // m
    double dwell_time = 0.0;  // s
    std::int64_t hold_periods = 0;
    bool trigger_exact_period = false;

    void validate() const;

    /// Dwell time actually realized: snapped to hold_periods * 2 pi / w when
    /// the sequence is triggered on an exact period.
    double effective_dwell(double trap_freq) const;
};

}  // namespace bangbang
