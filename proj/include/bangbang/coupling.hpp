#pragma once

#include <cstdint>
#include <vector>

#include "bangbang/constants.hpp"
#include "bangbang/oscillator.hpp"
#include "bangbang/states.hpp"

namespace bangbang {

/// Probe laser tuned to sideband s.
struct SidebandDrive {
    int sideband = 0;
    double rabi0 = 0.0;       // rad/s
    double detune_off = 0.0;  // rad/s
    double decay = 0.0;       // 1/s

    void validate() const;
};

enum class StarkConvention {
    sideband_indexed,  // numerators use Omega_{n,n+s'}
    as_printed,        // numerators use Omega_{n,n+s} for every s'
};

/// Off-resonant couplings that shift the driven transition.
struct StarkEnvironment {
    bool enabled = true;
    double delta_secondary = constants::two_pi * 25.74e6;  // rad/s, gap to the secondary carrier
    double coupling_ratio = 2.2360679774997898;            // sqrt(5)
    int sum_cutoff = 20;
    StarkConvention convention = StarkConvention::sideband_indexed;

    void validate() const;
};

/// Omega_{n,n+s}: Omega0 exp(-eta^2/2) eta^|s| sqrt(n_<!/n_>!) |L_{n_<}^{|s|}(eta^2)|.
double rabi_frequency(std::int64_t n, int s, double eta, double rabi0);

/// delta_AC(n, s): coupling to the other sidebands of the driven transition
/// plus all sidebands of the secondary transition, |s' - s| <= sum_cutoff.
/// Throws NumericalError on an exactly resonant secondary sideband.
double ac_stark_shift(std::int64_t n, int s, const StarkEnvironment& env, double eta, double rabi0,
                      double trap_freq);

double total_detuning(std::int64_t n, const SidebandDrive& drive, const StarkEnvironment& env,
                      const OscillatorParams& params);

/// sum_n p(n) sqrt(Omega_{n,n+s}^2 + delta_tot(n,s)^2).
double mean_rabi(const DisplacedThermalSpec& spec, const SidebandDrive& drive, const StarkEnvironment& env,
                 const OscillatorParams& params, double mass_tol = kDefaultMassTol);

/// Secondary-transition sideband s' minimizing |Delta + w_m (s' - s)|.
int nearest_secondary_resonance(int s, const StarkEnvironment& env, double trap_freq);

/// Laguerre values L_j^k(x) for k in [0, max_order], j in [0, size), extended
/// on demand by continuing the recurrence in j.
class LaguerreTable {
  public:
    LaguerreTable(double x, int max_order);

    double x() const noexcept { return x_; }
    int max_order() const noexcept { return static_cast<int>(rows_.size()) - 1; }
    std::int64_t size() const noexcept { return static_cast<std::int64_t>(rows_.front().size()); }

    void reserve(std::int64_t n_max);
    double operator()(std::int64_t degree, int order) const {
        return rows_[static_cast<std::size_t>(order)][static_cast<std::size_t>(degree)];
    }

  private:
    double x_;
    std::vector<std::vector<double>> rows_;
};

/// Per-n coupling coefficients for one (eta, s, environment, w_m), normalized
/// so that Omega_{n,n+s} = rabi0 * rabi_ratio(n) and
/// delta_AC(n, s) = rabi0^2 * stark_coefficient(n).
class CouplingTable {
  public:
    CouplingTable(double eta, int sideband, const StarkEnvironment& env, double trap_freq);

    int sideband() const noexcept { return sideband_; }
    double eta() const noexcept { return eta_; }

    void reserve(std::int64_t n_max);
    double rabi_ratio(std::int64_t n) {
        reserve(n);
        return ratio_[static_cast<std::size_t>(n)];
    }
    double stark_coefficient(std::int64_t n) {
        reserve(n);
        return stark_[static_cast<std::size_t>(n)];
    }
    /// Omega_{n,n+s'}/Omega0 for any |s' - s| <= sum_cutoff (0 when n + s' < 0).
    double unit_rabi(std::int64_t n, int s_prime);

  private:
    double eta_;
    int sideband_;
    StarkEnvironment env_;
    double trap_freq_;
    LaguerreTable laguerre_;
    std::vector<double> ratio_;
    std::vector<double> stark_;
};

}  // namespace bangbang
