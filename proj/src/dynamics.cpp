#include "bangbang/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bangbang/error.hpp"

namespace bangbang {

void PopulationTrace::validate() const {
    if (p_down.size() != probe_times.size() || sigma.size() != probe_times.size())
        throw DomainError("PopulationTrace: column lengths differ");
    if (shots < 0) throw DomainError("PopulationTrace: shots must be non-negative");
    for (std::size_t i = 0; i < size(); ++i) {
        if (i > 0 && !(probe_times[i] > probe_times[i - 1]))
            throw DomainError("PopulationTrace: probe times must be strictly increasing");
        if (!(p_down[i] >= 0.0 && p_down[i] <= 1.0))
            throw DomainError("PopulationTrace: p_down out of [0, 1] at index " + std::to_string(i));
        if (!(sigma[i] >= 0.0)) throw DomainError("PopulationTrace: negative sigma");
    }
}

void SequenceConfig::validate() const {
    protocol.validate();
    drive.validate();
    if (env.enabled) env.validate();
    if (!(nbar_th >= 0.0)) throw DomainError("nbar_th must be non-negative");
    if (probe_phase == ProbePhase::while_displaced && protocol.hold_periods < 1)
        throw DomainError("probing while displaced needs hold_periods >= 1");
}

double DriftModel::factor(std::size_t index, std::size_t count) const {
    if (knots.empty()) return 1.0;
    if (knots.size() == 1 || count <= 1) return knots.front();
    const double u = static_cast<double>(index) / static_cast<double>(count - 1) *
                     static_cast<double>(knots.size() - 1);
    const auto k = std::min(static_cast<std::size_t>(u), knots.size() - 2);
    const double frac = u - static_cast<double>(k);
    return knots[k] * (1.0 - frac) + knots[k + 1] * frac;
}

std::vector<double> p_down_decay(const NumberStateDistribution& dist, const SidebandDrive& drive,
                                 CouplingTable& table, std::span<const double> times) {
    table.reserve(dist.n_max());
    std::vector<double> omega;
    std::vector<double> weight;
    omega.reserve(dist.size());
    weight.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const std::int64_t n = dist.n_min() + static_cast<std::int64_t>(i);
        // Forbidden transitions (n + s < 0) leave the spin in |down>.
        omega.push_back(n + drive.sideband < 0 ? 0.0 : drive.rabi0 * table.rabi_ratio(n));
        weight.push_back(dist.weights()[i] / dist.captured_mass());
    }
    std::vector<double> out(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        const double t = times[j];
        const double envelope = std::exp(-drive.decay * t);
        double sum = 0.0;
        for (std::size_t i = 0; i < omega.size(); ++i) sum += weight[i] * std::cos(omega[i] * t);
        out[j] = std::clamp(0.5 * (1.0 + envelope * sum), 0.0, 1.0);
    }
    return out;
}

std::vector<double> p_down_detuned(const NumberStateDistribution& dist, const SidebandDrive& drive,
                                   CouplingTable& table, std::span<const double> times) {
    table.reserve(dist.n_max());
    std::vector<double> gen;  // generalized Rabi frequency
    std::vector<double> amp;  // weight * Omega^2 / W^2
    gen.reserve(dist.size());
    amp.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const std::int64_t n = dist.n_min() + static_cast<std::int64_t>(i);
        if (n + drive.sideband < 0) continue;
        const double omega = drive.rabi0 * table.rabi_ratio(n);
        const double delta = drive.detune_off + drive.rabi0 * drive.rabi0 * table.stark_coefficient(n);
        const double w2 = omega * omega + delta * delta;
        if (w2 == 0.0) continue;
        gen.push_back(std::sqrt(w2));
        amp.push_back(dist.weights()[i] / dist.captured_mass() * omega * omega / w2);
    }
    std::vector<double> out(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        const double t = times[j];
        double sum = 0.0;
        for (std::size_t i = 0; i < gen.size(); ++i) {
            const double s = std::sin(0.5 * gen[i] * t);
            sum += amp[i] * s * s;
        }
        out[j] = std::clamp(1.0 - sum, 0.0, 1.0);
    }
    return out;
}

std::vector<double> p_down_decay(const NumberStateDistribution& dist, const SidebandDrive& drive, double eta,
                                 std::span<const double> times) {
    drive.validate();
    StarkEnvironment off;
    off.enabled = false;
    CouplingTable table(eta, drive.sideband, off, 1.0);
    return p_down_decay(dist, drive, table, times);
}

double p_down_decay(const NumberStateDistribution& dist, const SidebandDrive& drive, double eta, double t) {
    return p_down_decay(dist, drive, eta, std::span<const double>(&t, 1)).front();
}

std::vector<double> p_down_detuned(const NumberStateDistribution& dist, const SidebandDrive& drive,
                                   const StarkEnvironment& env, const OscillatorParams& params,
                                   std::span<const double> times) {
    drive.validate();
    CouplingTable table(params.lamb_dicke(), drive.sideband, env, params.trap_freq());
    return p_down_detuned(dist, drive, table, times);
}

double p_down_detuned(const NumberStateDistribution& dist, const SidebandDrive& drive, const StarkEnvironment& env,
                      const OscillatorParams& params, double t) {
    return p_down_detuned(dist, drive, env, params, std::span<const double>(&t, 1)).front();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

double projection_sigma(std::int64_t successes, std::int64_t shots, SigmaFloor floor) {
    if (shots <= 0) throw DomainError("projection_sigma: shots must be positive");
    const double n = static_cast<double>(shots);
    double p = static_cast<double>(successes) / n;
    if (floor == SigmaFloor::laplace && (successes == 0 || successes == shots))
        p = (static_cast<double>(successes) + 1.0) / (n + 2.0);
    return std::sqrt(p * (1.0 - p) / n);
}

PopulationTrace sample_trace(const PopulationTrace& ideal, std::int64_t shots, std::uint64_t seed,
                             SigmaFloor floor) {
    if (shots < 1) throw DomainError("sample_trace: shots must be >= 1");
    PopulationTrace out;
    out.probe_times = ideal.probe_times;
    out.shots = shots;
    out.p_down.resize(ideal.size());
    out.sigma.resize(ideal.size());
    for (std::size_t i = 0; i < ideal.size(); ++i) {
        const double p = std::clamp(ideal.p_down[i], 0.0, 1.0);
        std::int64_t k;
        if (p == 0.0) {
            k = 0;
        } else if (p == 1.0) {
            k = shots;
        } else {
            std::mt19937_64 rng(derive_seed(seed, i));
            std::binomial_distribution<std::int64_t> draw(shots, p);
            k = draw(rng);
        }
        out.p_down[i] = (k == shots) ? 1.0 : static_cast<double>(k) / static_cast<double>(shots);
        out.sigma[i] = projection_sigma(k, shots, floor);
    }
    return out;
}

DisplacedThermalSpec probed_state(const SequenceConfig& config, const OscillatorParams& params) {
    const double alpha0 = displacement_alpha(config.protocol.x_d, params);
    if (config.probe_phase == ProbePhase::while_displaced) return {config.nbar_th, alpha0};
    const double dwell = config.protocol.effective_dwell(params.trap_freq());
    return {config.nbar_th, residual_alpha(alpha0, dwell, params.trap_freq())};
}

DisplacedThermalSpec final_state(const SequenceConfig& config, const OscillatorParams& params) {
    if (config.probe_phase == ProbePhase::after_return) return probed_state(config, params);
    // The return switch happens after hold_periods full periods; when the sequence
    // is triggered on an exact period the residual displacement vanishes.
    const double alpha0 = displacement_alpha(config.protocol.x_d, params);
    const double dwell = config.protocol.trigger_exact_period
                             ? config.protocol.effective_dwell(params.trap_freq())
                             : config.protocol.dwell_time;
    return {config.nbar_th, residual_alpha(alpha0, dwell, params.trap_freq())};
}

PopulationTrace ideal_trace(const SequenceConfig& config, const OscillatorParams& params,
                            std::span<const double> probe_times, double rabi_scale) {
    config.validate();
    if (!(rabi_scale > 0.0)) throw DomainError("rabi_scale must be positive");
    SidebandDrive drive = config.drive;
    drive.rabi0 *= rabi_scale;
    const auto dist = displaced_thermal_pmf(probed_state(config, params));
    PopulationTrace out;
    out.probe_times.assign(probe_times.begin(), probe_times.end());
    if (config.env.enabled)
        out.p_down = p_down_detuned(dist, drive, config.env, params, probe_times);
    else
        out.p_down = p_down_decay(dist, drive, params.lamb_dicke(), probe_times);
    out.sigma.assign(out.size(), 0.0);
    out.validate();
    return out;
}

PopulationTrace simulate_sequence(const SequenceConfig& config, const OscillatorParams& params,
                                  std::span<const double> probe_times, std::int64_t shots, std::uint64_t seed,
                                  double rabi_scale) {
    auto ideal = ideal_trace(config, params, probe_times, rabi_scale);
    if (shots <= 0) return ideal;
    return sample_trace(ideal, shots, seed);
}

std::vector<double> linspace(double start, double stop, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = start;
        return out;
    }
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = start + step * static_cast<double>(i);
    out.back() = stop;
    return out;
}

}  // namespace bangbang
