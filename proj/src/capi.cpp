#include "bangbang/bangbang.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "bangbang/analysis.hpp"
#include "bangbang/commands.hpp"
#include "bangbang/config.hpp"
#include "bangbang/coupling.hpp"
#include "bangbang/dataset.hpp"
#include "bangbang/dynamics.hpp"
#include "bangbang/error.hpp"
#include "bangbang/fockmath.hpp"
#include "bangbang/oscillator.hpp"
#include "bangbang/states.hpp"

struct bb_oscillator {
    bangbang::OscillatorParams params;
};

struct bb_distribution {
    bangbang::NumberStateDistribution dist;
};

struct bb_trace {
    bangbang::PopulationTrace trace;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_summary;

bb_status fail(bb_status status, const std::string& message) {
    last_error = message;
    return status;
}

template <class F>
bb_status guarded(F&& body) {
    try {
        body();
        return BB_OK;
    } catch (const bangbang::ConvergenceError& e) {
        return fail(BB_ERR_CONVERGENCE, e.what());
    } catch (const bangbang::NumericalError& e) {
        return fail(BB_ERR_NUMERICAL, e.what());
    } catch (const bangbang::DomainError& e) {
        return fail(BB_ERR_DOMAIN, e.what());
    } catch (const bangbang::ConfigError& e) {
        return fail(BB_ERR_CONFIG, e.what());
    } catch (const std::bad_alloc&) {
        return fail(BB_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(BB_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(BB_ERR_INTERNAL, "unknown error");
    }
}

#define BB_REQUIRE(ptr)                                         \
    do {                                                        \
        if ((ptr) == nullptr) return fail(BB_ERR_NULL, #ptr " is NULL"); \
    } while (0)

bangbang::SidebandDrive to_drive(const bb_drive& d) {
    return {d.sideband, d.rabi0, d.detune_off, d.decay};
}

bangbang::StarkEnvironment to_env(const bb_stark_env& e) {
    bangbang::StarkEnvironment env;
    env.enabled = e.enabled != 0;
    env.delta_secondary = e.delta_secondary;
    env.coupling_ratio = e.coupling_ratio;
    env.sum_cutoff = e.sum_cutoff;
    env.convention = e.convention == BB_STARK_AS_PRINTED ? bangbang::StarkConvention::as_printed
                                                         : bangbang::StarkConvention::sideband_indexed;
    return env;
}

bangbang::SequenceConfig to_sequence(const bb_sequence& s) {
    bangbang::SequenceConfig seq;
    seq.protocol.x_d = s.x_d;
    seq.protocol.dwell_time = s.dwell_time;
    seq.protocol.hold_periods = s.hold_periods;
    seq.protocol.trigger_exact_period = s.trigger_exact_period != 0;
    seq.probe_phase = s.probe_phase == BB_PROBE_WHILE_DISPLACED ? bangbang::ProbePhase::while_displaced
                                                                : bangbang::ProbePhase::after_return;
    seq.nbar_th = s.nbar_th;
    seq.drive = to_drive(s.drive);
    seq.env = to_env(s.env);
    return seq;
}

bangbang::ExperimentConfig load_with_options(const char* path, const bb_run_options* options) {
    auto cfg = bangbang::load_config(path);
    if (options != nullptr && options->has_seed != 0) {
        cfg.seed = options->seed;
        bangbang::refresh_hash(cfg);
    }
    if (options != nullptr && options->min_probe_time > 0.0) {
        auto& t = cfg.probe_times;
        const auto before = t.size();
        std::erase_if(t, [&](double v) { return v < options->min_probe_time; });
        if (t.empty()) throw bangbang::ConfigError("no probe time at or above the minimum probe time");
        if (t.size() != before) bangbang::refresh_hash(cfg);
    }
    return cfg;
}

std::string output_path(const char* explicit_path, const bangbang::ExperimentConfig& cfg) {
    if (explicit_path != nullptr) return explicit_path;
    if (cfg.output.empty()) throw bangbang::ConfigError("no output path given and the config has no \"output\"");
    return cfg.output;
}

}  // namespace

extern "C" {

const char* bb_version(void) { return bangbang::kToolVersion; }

const char* bb_last_error(void) { return last_error.c_str(); }

const char* bb_last_summary(void) { return last_summary.c_str(); }

const char* bb_status_name(bb_status status) {
    switch (status) {
        case BB_OK: return "ok";
        case BB_ERR_DOMAIN: return "domain error";
        case BB_ERR_NUMERICAL: return "numerical error";
        case BB_ERR_CONVERGENCE: return "convergence failure";
        case BB_ERR_CONFIG: return "configuration error";
        case BB_ERR_NULL: return "null argument";
        case BB_ERR_BUFFER: return "buffer too small";
        case BB_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

int bb_exit_code(bb_status status) {
    switch (status) {
        case BB_OK: return 0;
        case BB_ERR_DOMAIN:
        case BB_ERR_CONFIG:
        case BB_ERR_NULL:
        case BB_ERR_BUFFER: return 1;
        default: return 2;
    }
}

bb_status bb_parse_quantity(const char* text, bb_quantity_kind kind, double* out) {
    BB_REQUIRE(text);
    BB_REQUIRE(out);
    if (kind < BB_ANGULAR_FREQUENCY || kind > BB_MASS) return fail(BB_ERR_DOMAIN, "unknown quantity kind");
    return guarded([&] { *out = bangbang::parse_quantity(text, static_cast<bangbang::QuantityKind>(kind)); });
}

bb_status bb_laguerre(int64_t n, int order, double x, double* out) {
    BB_REQUIRE(out);
    return guarded([&] { *out = bangbang::fock::laguerre(n, order, x); });
}

bb_status bb_bessel_j(int order, double x, double* out) {
    BB_REQUIRE(out);
    return guarded([&] { *out = bangbang::fock::bessel_j(order, x); });
}

bb_status bb_oscillator_create(double ion_mass_u, double trap_freq, double wavelength, double beam_angle,
                               bb_oscillator** out) {
    BB_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        *out = new bb_oscillator{bangbang::OscillatorParams(ion_mass_u, trap_freq, wavelength, beam_angle)};
    });
}

void bb_oscillator_destroy(bb_oscillator* osc) { delete osc; }

bb_status bb_oscillator_ground_state_extent(const bb_oscillator* osc, double* out) {
    BB_REQUIRE(osc);
    BB_REQUIRE(out);
    *out = osc->params.ground_state_extent();
    return BB_OK;
}

bb_status bb_oscillator_lamb_dicke(const bb_oscillator* osc, double* out) {
    BB_REQUIRE(osc);
    BB_REQUIRE(out);
    *out = osc->params.lamb_dicke();
    return BB_OK;
}

bb_status bb_displacement_alpha(const bb_oscillator* osc, double x_d, double* out) {
    BB_REQUIRE(osc);
    BB_REQUIRE(out);
    return guarded([&] { *out = bangbang::displacement_alpha(x_d, osc->params); });
}

bb_status bb_residual_alpha(double alpha0, double dwell_time, double trap_freq, double* out) {
    BB_REQUIRE(out);
    return guarded([&] { *out = bangbang::residual_alpha(alpha0, dwell_time, trap_freq); });
}

bb_status bb_distribution_displaced_thermal(double nbar_th, double alpha, double mass_tol, bb_distribution** out) {
    BB_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        bangbang::DisplacedThermalSpec spec{nbar_th, alpha};
        *out = new bb_distribution{bangbang::displaced_thermal_pmf(spec, mass_tol)};
    });
}

bb_status bb_distribution_matrix_oracle(double nbar_th, double alpha, int dim, bb_distribution** out) {
    BB_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        bangbang::DisplacedThermalSpec spec{nbar_th, alpha};
        *out = new bb_distribution{bangbang::matrix_oracle_pmf(spec, dim)};
    });
}

void bb_distribution_destroy(bb_distribution* dist) { delete dist; }

bb_status bb_distribution_range(const bb_distribution* dist, int64_t* n_min, int64_t* n_max) {
    BB_REQUIRE(dist);
    if (n_min != nullptr) *n_min = dist->dist.n_min();
    if (n_max != nullptr) *n_max = dist->dist.n_max();
    return BB_OK;
}

bb_status bb_distribution_weights(const bb_distribution* dist, double* buffer, size_t capacity, size_t* count) {
    BB_REQUIRE(dist);
    const auto& w = dist->dist.weights();
    if (count != nullptr) *count = w.size();
    if (buffer == nullptr || capacity < w.size()) {
        return fail(BB_ERR_BUFFER, "weights need " + std::to_string(w.size()) + " entries");
    }
    std::copy(w.begin(), w.end(), buffer);
    return BB_OK;
}

bb_status bb_distribution_moments(const bb_distribution* dist, double* mean, double* variance, double* mass) {
    BB_REQUIRE(dist);
    return guarded([&] {
        if (mean != nullptr) *mean = dist->dist.mean();
        if (variance != nullptr) *variance = dist->dist.variance();
        if (mass != nullptr) *mass = dist->dist.captured_mass();
    });
}

void bb_stark_env_default(bb_stark_env* env) {
    if (env == nullptr) return;
    const bangbang::StarkEnvironment d;
    env->enabled = d.enabled ? 1 : 0;
    env->delta_secondary = d.delta_secondary;
    env->coupling_ratio = d.coupling_ratio;
    env->sum_cutoff = d.sum_cutoff;
    env->convention = BB_STARK_SIDEBAND_INDEXED;
}

bb_status bb_rabi_frequency(int64_t n, int sideband, double eta, double rabi0, double* out) {
    BB_REQUIRE(out);
    return guarded([&] { *out = bangbang::rabi_frequency(n, sideband, eta, rabi0); });
}

bb_status bb_ac_stark_shift(int64_t n, int sideband, const bb_stark_env* env, double eta, double rabi0,
                            double trap_freq, double* out) {
    BB_REQUIRE(env);
    BB_REQUIRE(out);
    return guarded([&] {
        const auto e = to_env(*env);
        e.validate();
        *out = bangbang::ac_stark_shift(n, sideband, e, eta, rabi0, trap_freq);
    });
}

bb_status bb_mean_rabi(const bb_oscillator* osc, double nbar_th, double alpha, const bb_drive* drive,
                       const bb_stark_env* env, double* out) {
    BB_REQUIRE(osc);
    BB_REQUIRE(drive);
    BB_REQUIRE(env);
    BB_REQUIRE(out);
    return guarded([&] {
        const auto d = to_drive(*drive);
        const auto e = to_env(*env);
        d.validate();
        e.validate();
        *out = bangbang::mean_rabi({nbar_th, alpha}, d, e, osc->params);
    });
}

bb_status bb_trace_simulate(const bb_oscillator* osc, const bb_sequence* seq, const double* probe_times,
                            size_t count, int64_t shots, uint64_t seed, bb_trace** out) {
    BB_REQUIRE(osc);
    BB_REQUIRE(seq);
    BB_REQUIRE(out);
    *out = nullptr;
    if (count > 0) BB_REQUIRE(probe_times);
    return guarded([&] {
        const auto config = to_sequence(*seq);
        config.validate();
        std::vector<double> times(probe_times, probe_times + count);
        *out = new bb_trace{bangbang::simulate_sequence(config, osc->params, times, shots, seed)};
    });
}

void bb_trace_destroy(bb_trace* trace) { delete trace; }

bb_status bb_trace_size(const bb_trace* trace, size_t* count) {
    BB_REQUIRE(trace);
    BB_REQUIRE(count);
    *count = trace->trace.size();
    return BB_OK;
}

bb_status bb_trace_data(const bb_trace* trace, double* probe_times, double* p_down, double* sigma, size_t capacity) {
    BB_REQUIRE(trace);
    const auto& t = trace->trace;
    if (capacity < t.size()) return fail(BB_ERR_BUFFER, "trace needs " + std::to_string(t.size()) + " entries");
    if (probe_times != nullptr) std::copy(t.probe_times.begin(), t.probe_times.end(), probe_times);
    if (p_down != nullptr) std::copy(t.p_down.begin(), t.p_down.end(), p_down);
    if (sigma != nullptr) std::copy(t.sigma.begin(), t.sigma.end(), sigma);
    return BB_OK;
}

bb_status bb_trace_spectrum_peak(const bb_trace* trace, int padding, int remove_mean, int window_bins,
                                 double* center, double* sigma_center, double* width) {
    BB_REQUIRE(trace);
    return guarded([&] {
        bangbang::SpectrumOptions so;
        so.padding = padding;
        so.remove_mean = remove_mean != 0;
        bangbang::LorentzianOptions lo;
        lo.window_bins = window_bins;
        const auto fit = bangbang::fit_lorentzian(bangbang::rabi_spectrum(trace->trace, so), lo);
        if (center != nullptr) *center = fit.center;
        if (sigma_center != nullptr) *sigma_center = fit.sigma_center;
        if (width != nullptr) *width = fit.width;
    });
}

bb_status bb_cmd_simulate(const char* config_path, const char* out_path, const bb_run_options* options) {
    BB_REQUIRE(config_path);
    last_summary.clear();
    return guarded([&] {
        const auto cfg = load_with_options(config_path, options);
        const auto path = output_path(out_path, cfg);
        const auto data = bangbang::simulate_dataset(cfg);
        bangbang::write_dataset(path, data);
        last_summary = "wrote " + std::to_string(data.rows.size()) + " rows (" + data.kind + ") to " + path + "\n";
    });
}

bb_status bb_cmd_fit(const char* config_path, const char* data_path, const char* report_path,
                     const bb_run_options* options) {
    BB_REQUIRE(config_path);
    BB_REQUIRE(data_path);
    last_summary.clear();
    bool all_converged = true;
    const auto status = guarded([&] {
        const auto cfg = load_with_options(config_path, options);
        const auto data = bangbang::read_dataset(data_path);
        const auto path = output_path(report_path, cfg);
        const auto report = bangbang::fit_report(cfg, data, all_converged);
        bangbang::write_file_atomic(path, report.dump(2) + "\n");
        last_summary = bangbang::summarize_report(report);
    });
    if (status == BB_OK && !all_converged) return fail(BB_ERR_CONVERGENCE, "one or more fits did not converge");
    return status;
}

bb_status bb_cmd_scan(const char* config_path, const char* quantity, const char* out_path,
                      const bb_run_options* options) {
    BB_REQUIRE(config_path);
    BB_REQUIRE(quantity);
    last_summary.clear();
    return guarded([&] {
        const auto cfg = load_with_options(config_path, options);
        const auto path = output_path(out_path, cfg);
        const auto data = bangbang::scan_dataset(cfg, quantity);
        bangbang::write_dataset(path, data);
        last_summary = "wrote " + std::to_string(data.rows.size()) + " rows (" + data.kind + ") to " + path + "\n";
        if (data.meta.contains("minima")) last_summary += "minima: " + data.meta["minima"].dump() + "\n";
    });
}

bb_status bb_cmd_spectrum(const char* config_path, const char* data_path, const char* out_path,
                          const bb_spectrum_options* overrides) {
    BB_REQUIRE(data_path);
    last_summary.clear();
    return guarded([&] {
        bangbang::ExperimentConfig cfg;
        if (config_path != nullptr) cfg = bangbang::load_config(config_path);
        if (overrides != nullptr) {
            if (overrides->padding > 0) cfg.spectrum.spectrum.padding = overrides->padding;
            if (overrides->remove_mean >= 0) cfg.spectrum.spectrum.remove_mean = overrides->remove_mean != 0;
            if (overrides->window_bins > 0) cfg.spectrum.lorentzian.window_bins = overrides->window_bins;
        }
        const auto path = output_path(out_path, cfg);
        const auto input = bangbang::read_dataset(data_path);
        if (config_path == nullptr && input.kind == "displacement_scan")
            throw bangbang::ConfigError("a displacement_scan spectrum needs the experiment config");
        const auto data = bangbang::spectrum_dataset(cfg, input);
        bangbang::write_dataset(path, data);
        last_summary = "wrote " + std::to_string(data.rows.size()) + " rows (" + data.kind + ") to " + path + "\n";
        if (data.meta.contains("lorentzian")) last_summary += "lorentzian: " + data.meta["lorentzian"].dump() + "\n";
    });
}

bb_status bb_cmd_reproduce(const char* figure, const char* out_dir, const bb_run_options* options) {
    BB_REQUIRE(figure);
    BB_REQUIRE(out_dir);
    last_summary.clear();
    return guarded([&] {
        const std::uint64_t seed = options != nullptr && options->has_seed != 0 ? options->seed : 1;
        std::string summary;
        const auto files = bangbang::reproduce_figure(figure, out_dir, seed, summary);
        last_summary = summary;
        for (const auto& f : files) last_summary += "wrote " + f + "\n";
    });
}

}  // extern "C"
