#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bangbang/coupling.hpp"
#include "bangbang/dynamics.hpp"
#include "bangbang/fit.hpp"
#include "bangbang/oscillator.hpp"
#include "bangbang/states.hpp"

namespace bangbang {

enum class TraceModelKind {
    decay,    // (1/2) sum p(n) [1 + e^{-decay t} cos(Omega t)]
    detuned,  // 1 - sum p(n) Omega^2/W^2 sin^2(W t / 2)
};

/// Everything about a P_down model that is not a fit parameter.
struct TraceModelSpec {
    TraceModelKind kind = TraceModelKind::decay;
    OscillatorParams params{40.0, 1.0, 1.0, 0.0};
    int sideband = 0;
    StarkEnvironment env{};
    double mass_tol = kDefaultMassTol;
};

/// Fit parameters of a trace model. Names used by ParameterSet: "rabi0",
/// "decay", "alpha", "nbar", "detune_off".
struct ModelParameters {
    double rabi0 = 0.0;
    double decay = 0.0;
    double alpha = 0.0;
    double nbar = 0.0;
    double detune_off = 0.0;
};

std::vector<std::string> model_parameter_names(TraceModelKind kind);

struct ParameterSpec {
    std::string name;
    double value = 0.0;
    bool floating = false;
};
using ParameterSet = std::vector<ParameterSpec>;

/// P_down evaluator with caches for the pieces that stay fixed inside a fit:
/// the number-state distribution for fixed (nbar, alpha) and the cosine table
/// for fixed rabi0.
class TraceModel {
  public:
    explicit TraceModel(TraceModelSpec spec, std::shared_ptr<CouplingTable> table = nullptr);

    const TraceModelSpec& spec() const noexcept { return spec_; }
    std::vector<double> evaluate(const ModelParameters& p, std::span<const double> times);

  private:
    const NumberStateDistribution& distribution(double nbar, double alpha);

    TraceModelSpec spec_;
    std::shared_ptr<CouplingTable> table_;
    std::optional<DisplacedThermalSpec> dist_key_;
    NumberStateDistribution dist_;
    // cos(rabi0 r_n t_j) for n in [0, cos_rows), keyed by rabi0 and the time grid.
    double cos_rabi0_ = -1.0;
    double last_rabi0_ = -1.0;
    std::vector<double> cos_times_;
    std::int64_t cos_rows_ = 0;
    std::vector<double> cos_table_;
};

/// Weighted least squares of one trace; weights 1/sigma^2, unit weights for
/// noiseless traces.
FitResult fit_trace(const PopulationTrace& trace, const TraceModelSpec& spec, const ParameterSet& parameters,
                    const FitOptions& options = {});

/// Joint fit of several traces of one sideband. Each trace carries its own
/// fixed alpha; every other parameter is shared.
FitResult fit_trace_set(std::span<const PopulationTrace> traces, std::span<const double> alphas,
                        const TraceModelSpec& spec, const ParameterSet& shared, const FitOptions& options = {});

struct AlphaPoint {
    double dwell_time = 0.0;
    double alpha = 0.0;
    double sigma = 0.0;
    bool converged = false;
    std::string warning;
};

struct AlphaScanOptions {
    double alpha_init = -1.0;   // < 0: coarse grid search for the start value
    double alpha_search_max = 15.0;
    int search_points = 31;
    FitOptions fit{};
};

struct DwellTrace {
    double dwell_time = 0.0;
    PopulationTrace trace;
};

/// Per-dwell single-parameter |alpha| fits with rabi0, decay, nbar fixed.
/// Non-converged points come back with converged == false and a warning.
std::vector<AlphaPoint> extract_alpha_scan(std::span<const DwellTrace> traces, const TraceModelSpec& spec,
                                           double rabi0, double decay, double nbar,
                                           const AlphaScanOptions& options = {});

/// Fits |alpha|(dt) = alpha0 sqrt(2 (1 - cos(w dt))) for ("alpha0", "trap_freq").
/// Points that did not converge or have non-finite sigma are skipped.
FitResult fit_alpha_curve(std::span<const AlphaPoint> scan, double alpha0_init, double trap_freq_init,
                          const FitOptions& options = {});

double alpha_curve(double alpha0, double trap_freq, double dwell_time);

struct DriftBand {
    FitResult central;
    FitResult low;   // refit with rabi0 + delta: smaller alpha0
    FitResult high;  // refit with rabi0 - delta: larger alpha0
    std::vector<double> dwell_grid;
    std::vector<double> band_low;
    std::vector<double> band_high;
};

/// Repeats the alpha scan and the curve fit with rabi0 shifted by +- delta.
DriftBand drift_sensitivity(std::span<const DwellTrace> traces, const TraceModelSpec& spec, double rabi0,
                            double delta_rabi0, double decay, double nbar, double alpha0_init, double trap_freq_init,
                            std::span<const double> dwell_grid, const AlphaScanOptions& options = {});

struct SpectrumOptions {
    int padding = 1;           // zero-padding factor on the time record
    bool remove_mean = false;  // subtract the record mean before transforming
};

/// One-sided DFT magnitude (1/N normalization) with linearly propagated
/// shot-noise standard errors per bin. omega is angular frequency.
struct RabiSpectrum {
    std::vector<double> omega;
    std::vector<double> magnitude;
    std::vector<double> sigma;
    double bin_width() const { return omega.size() > 1 ? omega[1] - omega[0] : 0.0; }
};

RabiSpectrum rabi_spectrum(const PopulationTrace& trace, const SpectrumOptions& options = {});

struct LorentzianOptions {
    int window_bins = 10;
};

struct LorentzianFit {
    double center = 0.0;  // rad/s
    double width = 0.0;   // half width at half maximum, rad/s
    double amplitude = 0.0;
    double offset = 0.0;
    double sigma_center = 0.0;
    FitResult fit;
};

double lorentzian(double omega, double center, double width, double amplitude, double offset);

/// Symmetric Lorentzian + constant fitted in a window around the largest
/// non-DC bin. Throws DomainError when no bin stands out (max <= 3 x median).
LorentzianFit fit_lorentzian(const RabiSpectrum& spectrum, const LorentzianOptions& options = {});

struct MinimaResult {
    std::vector<double> minima;    // interpolated x positions
    std::vector<double> spacings;  // successive differences
};

/// Local minima of a sampled curve by parabolic interpolation over each
/// bracketing triple. Requires x strictly increasing with step <= max_step.
MinimaResult minima_spacing(std::span<const double> x, std::span<const double> y, double max_step = 10e-9);

}  // namespace bangbang
