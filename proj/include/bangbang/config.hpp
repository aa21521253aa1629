#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bangbang/analysis.hpp"
#include "bangbang/dynamics.hpp"
#include "bangbang/oscillator.hpp"

namespace bangbang {

enum class QuantityKind { angular_frequency, rate, length, time, angle, mass };

/// Converts value in `unit` to SI (angular frequencies to rad/s). Throws
/// ConfigError for units that do not belong to the kind.
double to_si(double value, std::string_view unit, QuantityKind kind);

/// "2.3505 MHz" style strings, used at the CLI boundary.
double parse_quantity(std::string_view text, QuantityKind kind);

enum class ScanVariable { dwell_time, displacement };

struct ScanSpec {
    ScanVariable variable = ScanVariable::dwell_time;
    std::vector<double> values;
};

enum class FitMode {
    per_trace,  // independent fit of every trace
    set,        // shared parameters, alpha per trace from x_d or a calibration
};

struct FitDirectives {
    FitMode mode = FitMode::per_trace;
    TraceModelKind model = TraceModelKind::decay;
    ParameterSet parameters;
    FitOptions options{};
    // Dwell scans only: the |alpha|(dt) curve fit and the optional drift band.
    double alpha0_init = 5.0;
    double trap_freq_init = 0.0;  // 0: use the oscillator trap frequency
    double drift_delta_rabi0 = -1.0;       // < 0: no drift band
    std::string alpha_calibration;        // path to an alpha_scan dataset (set mode)
};

struct SpectrumDirectives {
    SpectrumOptions spectrum{};
    LorentzianOptions lorentzian{};
};

/// Everything a command needs, in SI units. `normalized` is the canonical
/// JSON form of the semantic fields; `hash` is derived from it.
struct ExperimentConfig {
    OscillatorParams oscillator{constants::ca40_ion_mass_u, constants::two_pi * 2.35e6, 729e-9, constants::pi / 4};
    SequenceConfig sequence{};
    std::vector<double> probe_times;
    std::optional<ScanSpec> scan;
    std::int64_t shots = 0;
    std::uint64_t seed = 1;
    DriftModel drift{};
    std::optional<FitDirectives> fit;
    SpectrumDirectives spectrum{};
    std::string output;
    nlohmann::json normalized;
    std::string hash;
};

ExperimentConfig parse_config(std::string_view text, std::string_view source_name = "config");
ExperimentConfig load_config(const std::string& path);

/// Recomputes normalized/hash after a programmatic change (e.g. --seed).
void refresh_hash(ExperimentConfig& config);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace bangbang
