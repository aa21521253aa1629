#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bangbang/coupling.hpp"
#include "bangbang/oscillator.hpp"
#include "bangbang/states.hpp"

namespace bangbang {

/// P_down samples over probe times. shots == 0 marks a noiseless (ideal)
/// trace, in which case sigma is all zeros.
struct PopulationTrace {
    std::vector<double> probe_times;
    std::vector<double> p_down;
    std::vector<double> sigma;
    std::int64_t shots = 0;

    std::size_t size() const noexcept { return probe_times.size(); }
    void validate() const;
};

enum class ProbePhase {
    after_return,     // probe in the original well after the round trip
    while_displaced,  // probe in the displaced well, return after j periods
};

struct SequenceConfig {
    DisplacementProtocol protocol;
    SidebandDrive drive;
    StarkEnvironment env;
    double nbar_th = 0.0;
    ProbePhase probe_phase = ProbePhase::after_return;

    void validate() const;
};

/// Fit weighting policy for the standard error at sampled p in {0, 1}.
enum class SigmaFloor {
    laplace,  // use p = (k+1)/(N+2) in sqrt(p(1-p)/N)
    none,
};

/// Slow multiplicative drift of Omega0 across the traces of a scan,
/// piecewise-linear between evenly spaced knots over the acquisition index.
struct DriftModel {
    std::vector<double> knots;

    bool active() const noexcept { return !knots.empty(); }
    double factor(std::size_t index, std::size_t count) const;
};

/// (1/2) sum_n p(n) [1 + exp(-decay t) cos(Omega_{n,n+s} t)]
std::vector<double> p_down_decay(const NumberStateDistribution& dist, const SidebandDrive& drive, double eta,
                                 std::span<const double> times);
double p_down_decay(const NumberStateDistribution& dist, const SidebandDrive& drive, double eta, double t);

/// 1 - sum_n p(n) Omega^2/W^2 sin^2(W t / 2), W^2 = Omega^2 + delta_tot^2.
std::vector<double> p_down_detuned(const NumberStateDistribution& dist, const SidebandDrive& drive,
                                   const StarkEnvironment& env, const OscillatorParams& params,
                                   std::span<const double> times);
double p_down_detuned(const NumberStateDistribution& dist, const SidebandDrive& drive, const StarkEnvironment& env,
                      const OscillatorParams& params, double t);

/// Same sums with the per-n coupling coefficients taken from a shared table.
std::vector<double> p_down_decay(const NumberStateDistribution& dist, const SidebandDrive& drive,
                                 CouplingTable& table, std::span<const double> times);
std::vector<double> p_down_detuned(const NumberStateDistribution& dist, const SidebandDrive& drive,
                                   CouplingTable& table, std::span<const double> times);

/// Binomial projection-noise resampling of an ideal trace, one independent
/// counter-seeded generator per point.
PopulationTrace sample_trace(const PopulationTrace& ideal, std::int64_t shots, std::uint64_t seed,
                             SigmaFloor floor = SigmaFloor::laplace);

/// sqrt(p(1-p)/N) with the chosen degenerate-point policy.
double projection_sigma(std::int64_t successes, std::int64_t shots, SigmaFloor floor = SigmaFloor::laplace);

/// Motional state seen by the probe pulse.
DisplacedThermalSpec probed_state(const SequenceConfig& config, const OscillatorParams& params);
/// Motional state left in the original well when the sequence ends.
DisplacedThermalSpec final_state(const SequenceConfig& config, const OscillatorParams& params);

/// Noiseless P_down trace for the sequence. rabi_scale multiplies Omega0
/// (laser-power drift).
PopulationTrace ideal_trace(const SequenceConfig& config, const OscillatorParams& params,
                            std::span<const double> probe_times, double rabi_scale = 1.0);

/// ideal_trace followed by sample_trace when shots > 0.
PopulationTrace simulate_sequence(const SequenceConfig& config, const OscillatorParams& params,
                                  std::span<const double> probe_times, std::int64_t shots, std::uint64_t seed,
                                  double rabi_scale = 1.0);

/// Independent stream seed for item `index` of a larger run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Evenly spaced grid including both ends.
std::vector<double> linspace(double start, double stop, std::size_t count);

}  // namespace bangbang
