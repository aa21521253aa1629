#include "bangbang/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bangbang/constants.hpp"
#include "bangbang/error.hpp"

namespace bangbang {

std::vector<std::string> model_parameter_names(TraceModelKind kind) {
    if (kind == TraceModelKind::decay) return {"rabi0", "decay", "alpha", "nbar"};
    return {"rabi0", "alpha", "nbar", "detune_off"};
}

namespace {

double& field(ModelParameters& p, const std::string& name) {
    if (name == "rabi0") return p.rabi0;
    if (name == "decay") return p.decay;
    if (name == "alpha") return p.alpha;
    if (name == "nbar") return p.nbar;
    if (name == "detune_off") return p.detune_off;
    throw DomainError("unknown model parameter '" + name + "'");
}

std::shared_ptr<CouplingTable> make_table(const TraceModelSpec& spec) {
    StarkEnvironment env = spec.env;
    if (spec.kind == TraceModelKind::decay) env.enabled = false;
    return std::make_shared<CouplingTable>(spec.params.lamb_dicke(), spec.sideband, env, spec.params.trap_freq());
}

double weight_of(const PopulationTrace& trace, std::size_t i) {
    const double s = trace.sigma[i];
    return (trace.shots > 0 && s > 0.0) ? s : 1.0;
}

struct Unpacked {
    ModelParameters base;
    std::vector<std::string> floating_names;
    std::vector<double> init;
};

Unpacked unpack(TraceModelKind kind, const ParameterSet& parameters, bool alpha_per_trace) {
    const auto names = model_parameter_names(kind);
    Unpacked out;
    std::map<std::string, bool> seen;
    for (const auto& spec : parameters) {
        if (std::find(names.begin(), names.end(), spec.name) == names.end())
            throw DomainError("parameter '" + spec.name + "' is not part of this model");
        if (seen.count(spec.name)) throw DomainError("parameter '" + spec.name + "' given twice");
        seen[spec.name] = true;
        if (alpha_per_trace && spec.name == "alpha") throw DomainError("alpha is fixed per trace in a set fit");
        field(out.base, spec.name) = spec.value;
        if (spec.floating) {
            out.floating_names.push_back(spec.name);
            out.init.push_back(spec.value);
        }
    }
    for (const auto& n : names) {
        if (alpha_per_trace && n == "alpha") continue;
        if (!seen.count(n)) throw DomainError("model parameter '" + n + "' is neither fixed nor floating");
    }
    if (out.floating_names.empty()) throw DomainError("no floating parameters");
    return out;
}

void check_points(std::size_t points, std::size_t floating) {
    if (points < 2 * floating)
        throw DomainError("need at least twice as many data points as floating parameters");
}

}  // namespace

TraceModel::TraceModel(TraceModelSpec spec, std::shared_ptr<CouplingTable> table)
    : spec_(std::move(spec)), table_(table ? std::move(table) : make_table(spec_)) {
    if (table_->sideband() != spec_.sideband) throw DomainError("TraceModel: coupling table sideband mismatch");
}

const NumberStateDistribution& TraceModel::distribution(double nbar, double alpha) {
    const DisplacedThermalSpec key{nbar, alpha};
    if (!dist_key_ || !(*dist_key_ == key)) {
        dist_ = displaced_thermal_pmf(key, spec_.mass_tol);
        dist_key_ = key;
    }
    return dist_;
}

std::vector<double> TraceModel::evaluate(const ModelParameters& p, std::span<const double> times) {
    // Magnitudes only: the model is even in alpha and the physical ranges are non-negative.
    const double alpha = std::abs(p.alpha);
    const double nbar = std::abs(p.nbar);
    SidebandDrive drive{spec_.sideband, std::abs(p.rabi0), p.detune_off, std::abs(p.decay)};
    const auto& dist = distribution(nbar, alpha);
    if (spec_.kind == TraceModelKind::detuned) return p_down_detuned(dist, drive, *table_, times);

    const bool same_grid = cos_times_.size() == times.size() && std::equal(times.begin(), times.end(), cos_times_.begin());
    if (drive.rabi0 != cos_rabi0_ || !same_grid || dist.n_max() >= cos_rows_) {
        // Two consecutive calls with the same rabi0 are the signature of a fit with rabi0 fixed.
        if (drive.rabi0 != last_rabi0_ || !same_grid) {
            last_rabi0_ = drive.rabi0;
            cos_times_.assign(times.begin(), times.end());
            return p_down_decay(dist, drive, *table_, times);
        }
        cos_rabi0_ = drive.rabi0;
        cos_rows_ = std::max<std::int64_t>(dist.n_max() + 1, 2 * cos_rows_);
        table_->reserve(cos_rows_);
        cos_table_.assign(static_cast<std::size_t>(cos_rows_) * times.size(), 0.0);
        for (std::int64_t n = 0; n < cos_rows_; ++n) {
            const double omega = n + spec_.sideband < 0 ? 0.0 : drive.rabi0 * table_->rabi_ratio(n);
            double* row = cos_table_.data() + static_cast<std::size_t>(n) * times.size();
            for (std::size_t j = 0; j < times.size(); ++j) row[j] = std::cos(omega * times[j]);
        }
    }
    std::vector<double> sum(times.size(), 0.0);
    const double inv_mass = 1.0 / dist.captured_mass();
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const double w = dist.weights()[i] * inv_mass;
        const double* row = cos_table_.data() + static_cast<std::size_t>(dist.n_min() + static_cast<std::int64_t>(i)) * times.size();
        for (std::size_t j = 0; j < times.size(); ++j) sum[j] += w * row[j];
    }
    for (std::size_t j = 0; j < times.size(); ++j)
        sum[j] = std::clamp(0.5 * (1.0 + std::exp(-drive.decay * times[j]) * sum[j]), 0.0, 1.0);
    return sum;
}

FitResult fit_trace(const PopulationTrace& trace, const TraceModelSpec& spec, const ParameterSet& parameters,
                    const FitOptions& options) {
    trace.validate();
    const auto u = unpack(spec.kind, parameters, false);
    check_points(trace.size(), u.floating_names.size());
    auto model = std::make_shared<TraceModel>(spec);
    ResidualFunction fn = [&, model](std::span<const double> p, std::span<double> r) {
        ModelParameters mp = u.base;
        for (std::size_t k = 0; k < p.size(); ++k) field(mp, u.floating_names[k]) = p[k];
        const auto pred = model->evaluate(mp, trace.probe_times);
        for (std::size_t i = 0; i < trace.size(); ++i) r[i] = (trace.p_down[i] - pred[i]) / weight_of(trace, i);
    };
    return least_squares(fn, u.floating_names, u.init, trace.size(), options);
}

FitResult fit_trace_set(std::span<const PopulationTrace> traces, std::span<const double> alphas,
                        const TraceModelSpec& spec, const ParameterSet& shared, const FitOptions& options) {
    if (traces.size() != alphas.size()) throw DomainError("fit_trace_set: one alpha per trace required");
    if (traces.empty()) throw DomainError("fit_trace_set: no traces");
    std::size_t total = 0;
    for (const auto& t : traces) {
        t.validate();
        total += t.size();
    }
    const auto u = unpack(spec.kind, shared, true);
    check_points(total, u.floating_names.size());
    auto table = make_table(spec);
    std::vector<std::shared_ptr<TraceModel>> models;
    for (std::size_t k = 0; k < traces.size(); ++k) models.push_back(std::make_shared<TraceModel>(spec, table));
    ResidualFunction fn = [&, models](std::span<const double> p, std::span<double> r) {
        ModelParameters mp = u.base;
        for (std::size_t k = 0; k < p.size(); ++k) field(mp, u.floating_names[k]) = p[k];
        std::size_t offset = 0;
        for (std::size_t k = 0; k < traces.size(); ++k) {
            mp.alpha = alphas[k];
            const auto pred = models[k]->evaluate(mp, traces[k].probe_times);
            for (std::size_t i = 0; i < traces[k].size(); ++i)
                r[offset + i] = (traces[k].p_down[i] - pred[i]) / weight_of(traces[k], i);
            offset += traces[k].size();
        }
    };
    return least_squares(fn, u.floating_names, u.init, total, options);
}

std::vector<AlphaPoint> extract_alpha_scan(std::span<const DwellTrace> traces, const TraceModelSpec& spec,
                                           double rabi0, double decay, double nbar, const AlphaScanOptions& options) {
    TraceModel model(spec);
    std::vector<AlphaPoint> out;
    out.reserve(traces.size());
    for (const auto& item : traces) {
        const auto& trace = item.trace;
        AlphaPoint point;
        point.dwell_time = item.dwell_time;
        try {
            trace.validate();
            check_points(trace.size(), 1);
            ModelParameters base;
            base.rabi0 = rabi0;
            base.decay = decay;
            base.nbar = nbar;
            auto chi2_at = [&](double a, std::span<double> r) {
                ModelParameters mp = base;
                mp.alpha = a;
                const auto pred = model.evaluate(mp, trace.probe_times);
                double sum = 0.0;
                for (std::size_t i = 0; i < trace.size(); ++i) {
                    r[i] = (trace.p_down[i] - pred[i]) / weight_of(trace, i);
                    sum += r[i] * r[i];
                }
                return sum;
            };
            double start = options.alpha_init;
            if (start < 0.0) {
                std::vector<double> scratch(trace.size());
                const auto grid = linspace(0.0, options.alpha_search_max, static_cast<std::size_t>(options.search_points));
                double best = std::numeric_limits<double>::infinity();
                for (double a : grid) {
                    const double c = chi2_at(a, scratch);
                    if (c < best) {
                        best = c;
                        start = a;
                    }
                }
                // alpha = 0 is a stationary point of the even model; start just off it.
                if (start == 0.0) start = 0.25 * (grid[1] - grid[0]);
            }
            ResidualFunction fn = [&](std::span<const double> p, std::span<double> r) { chi2_at(p[0], r); };
            const auto fit = least_squares(fn, {"alpha"}, {start}, trace.size(), options.fit);
            point.alpha = std::abs(fit.values[0]);
            point.sigma = fit.errors[0];
            point.converged = true;
        } catch (const std::exception& e) {
            point.converged = false;
            point.warning = e.what();
        }
        out.push_back(point);
    }
    return out;
}

double alpha_curve(double alpha0, double trap_freq, double dwell_time) {
    return 2.0 * alpha0 * std::abs(std::sin(0.5 * trap_freq * dwell_time));
}

FitResult fit_alpha_curve(std::span<const AlphaPoint> scan, double alpha0_init, double trap_freq_init,
                          const FitOptions& options) {
    std::vector<AlphaPoint> used;
    for (const auto& p : scan)
        if (p.converged && std::isfinite(p.sigma) && std::isfinite(p.alpha)) used.push_back(p);
    if (used.size() < 4) throw DomainError("fit_alpha_curve: fewer than 4 usable points");
    const auto [lo, hi] = std::minmax_element(used.begin(), used.end(),
                                              [](const auto& a, const auto& b) { return a.dwell_time < b.dwell_time; });
    if ((hi->dwell_time - lo->dwell_time) * trap_freq_init < constants::two_pi)
        throw DomainError("fit_alpha_curve: scan must span at least one oscillation period");
    // Noiseless scans can report zero sigma; fall back to uniform weights.
    const bool uniform = std::any_of(used.begin(), used.end(), [](const auto& p) { return !(p.sigma > 0.0); });
    ResidualFunction fn = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < used.size(); ++i) {
            const double w = uniform ? 1.0 : used[i].sigma;
            r[i] = (used[i].alpha - alpha_curve(p[0], p[1], used[i].dwell_time)) / w;
        }
    };
    return least_squares(fn, {"alpha0", "trap_freq"}, {alpha0_init, trap_freq_init}, used.size(), options);
}

DriftBand drift_sensitivity(std::span<const DwellTrace> traces, const TraceModelSpec& spec, double rabi0,
                            double delta_rabi0, double decay, double nbar, double alpha0_init, double trap_freq_init,
                            std::span<const double> dwell_grid, const AlphaScanOptions& options) {
    if (!(delta_rabi0 >= 0.0) || !(delta_rabi0 < rabi0)) throw DomainError("drift_sensitivity: need 0 <= delta < rabi0");
    auto run = [&](double r0) {
        const auto scan = extract_alpha_scan(traces, spec, r0, decay, nbar, options);
        return fit_alpha_curve(scan, alpha0_init, trap_freq_init, options.fit);
    };
    DriftBand band;
    band.central = run(rabi0);
    if (delta_rabi0 == 0.0) {
        band.low = band.central;
        band.high = band.central;
    } else {
        band.low = run(rabi0 + delta_rabi0);
        band.high = run(rabi0 - delta_rabi0);
    }
    band.dwell_grid.assign(dwell_grid.begin(), dwell_grid.end());
    for (double dt : dwell_grid) {
        band.band_low.push_back(alpha_curve(band.low.value("alpha0"), band.low.value("trap_freq"), dt));
        band.band_high.push_back(alpha_curve(band.high.value("alpha0"), band.high.value("trap_freq"), dt));
    }
    return band;
}

MinimaResult minima_spacing(std::span<const double> x, std::span<const double> y, double max_step) {
    if (x.size() != y.size()) throw DomainError("minima_spacing: x and y differ in length");
    if (x.size() < 3) throw DomainError("minima_spacing: need at least 3 samples");
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double step = x[i] - x[i - 1];
        if (!(step > 0.0)) throw DomainError("minima_spacing: x must be strictly increasing");
        if (step > max_step * (1.0 + 1e-9)) throw DomainError("minima_spacing: grid too coarse");
    }
    MinimaResult out;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (!(y[i] < y[i - 1] && y[i] <= y[i + 1])) continue;
        const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
        const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double curv = (d12 - d01) / (x2 - x0);
        double vertex = x1;
        if (curv > 0.0) vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
        out.minima.push_back(std::clamp(vertex, x0, x2));
    }
    if (out.minima.size() < 2) throw DomainError("minima_spacing: fewer than 2 minima found");
    for (std::size_t i = 1; i < out.minima.size(); ++i) out.spacings.push_back(out.minima[i] - out.minima[i - 1]);
    return out;
}

}  // namespace bangbang
