#include "bangbang/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "bangbang/error.hpp"

namespace bangbang {

using nlohmann::json;

namespace {

json base_meta(const ExperimentConfig& cfg, const char* command) {
    return {{"command", command}, {"config_hash", cfg.hash}, {"seed", cfg.seed}, {"tool_version", kToolVersion}};
}

void append_trace(Dataset& d, std::vector<double> prefix, const PopulationTrace& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        auto row = prefix;
        row.insert(row.end(), {t.probe_times[i], t.p_down[i], t.sigma[i], static_cast<double>(t.shots)});
        d.rows.push_back(std::move(row));
    }
}

struct KeyedTrace {
    double key = 0.0;  // dwell time or x_d
    int sideband = 0;
    PopulationTrace trace;
};

// Consecutive rows sharing the leading key columns form one trace.
std::vector<KeyedTrace> group_traces(const Dataset& d) {
    std::size_t key_col = 0, sb_col = 0, t_col = 0;
    bool has_key = false, has_sb = false;
    if (d.kind == "trace") {
    } else if (d.kind == "dwell_scan") {
        has_key = true;
        key_col = d.column_index("dwell_time");
    } else if (d.kind == "displacement_scan") {
        has_key = has_sb = true;
        key_col = d.column_index("x_d");
        sb_col = d.column_index("sideband");
    } else {
        throw ConfigError("expected a trace, dwell_scan or displacement_scan dataset, got '" + d.kind + "'");
    }
    if (d.rows.empty()) throw ConfigError("dataset has no rows");
    t_col = d.column_index("t_p");
    const auto p_col = d.column_index("p_down");
    const auto s_col = d.column_index("sigma");
    const auto n_col = d.column_index("shots");
    std::vector<KeyedTrace> out;
    for (const auto& row : d.rows) {
        const double key = has_key ? row[key_col] : 0.0;
        const int sb = has_sb ? static_cast<int>(row[sb_col]) : 0;
        if (has_sb && static_cast<double>(sb) != row[sb_col]) throw ConfigError("sideband column must hold integers");
        if (out.empty() || out.back().key != key || out.back().sideband != sb ||
            !(row[t_col] > out.back().trace.probe_times.back())) {
            out.push_back({key, sb, {}});
            out.back().trace.shots = static_cast<std::int64_t>(row[n_col]);
        }
        auto& t = out.back().trace;
        t.probe_times.push_back(row[t_col]);
        t.p_down.push_back(row[p_col]);
        t.sigma.push_back(row[s_col]);
        if (static_cast<double>(t.shots) != row[n_col]) throw ConfigError("shots must be constant within a trace");
    }
    for (auto& k : out) {
        try {
            k.trace.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("dataset trace invalid: ") + e.what());
        }
    }
    return out;
}

TraceModelSpec model_spec(const ExperimentConfig& cfg, int sideband, TraceModelKind kind) {
    TraceModelSpec spec;
    spec.kind = kind;
    spec.params = cfg.oscillator;
    spec.sideband = sideband;
    spec.env = cfg.sequence.env;
    return spec;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json fit_json(const FitResult& r) {
    json params = json::object();
    for (std::size_t i = 0; i < r.names.size(); ++i)
        params[r.names[i]] = {{"value", r.values[i]}, {"error", finite_or_null(r.errors[i])}};
    return {{"parameters", params},
            {"rss", r.rss},
            {"chi2_reduced", finite_or_null(r.chi2_reduced)},
            {"dof", r.dof},
            {"iterations", r.iterations},
            {"converged", r.converged}};
}

json failure_json(const std::exception& e) {
    json j = {{"converged", false}, {"error", e.what()}};
    if (const auto* c = dynamic_cast<const ConvergenceError*>(&e)) {
        j["last_rss"] = c->last_rss();
        j["iterations"] = c->iterations();
    }
    return j;
}

const FitDirectives& directives(const ExperimentConfig& cfg) {
    if (!cfg.fit) throw ConfigError("config has no fit block");
    return *cfg.fit;
}

double fixed_value(const FitDirectives& fit, const std::string& name, double fallback) {
    for (const auto& p : fit.parameters)
        if (p.name == name) return p.value;
    return fallback;
}

std::map<double, double> load_alpha_calibration(const std::string& path) {
    const auto d = read_dataset(path);
    if (d.kind != "displacement_alpha") throw ConfigError("alpha calibration '" + path + "' must be displacement_alpha");
    std::map<double, double> out;
    const auto x = d.column("x_d");
    const auto a = d.column("alpha");
    const auto ok = d.column("converged");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (ok[i] != 0.0) out[x[i]] = a[i];
    return out;
}

json fit_dwell_scan(const ExperimentConfig& cfg, const std::vector<KeyedTrace>& groups, bool& ok) {
    const auto& fit = directives(cfg);
    std::vector<DwellTrace> traces;
    for (const auto& g : groups) traces.push_back({g.key, g.trace});
    const double rabi0 = fixed_value(fit, "rabi0", cfg.sequence.drive.rabi0);
    const double decay = fixed_value(fit, "decay", cfg.sequence.drive.decay);
    const double nbar = fixed_value(fit, "nbar", cfg.sequence.nbar_th);
    const auto spec = model_spec(cfg, cfg.sequence.drive.sideband, TraceModelKind::decay);
    AlphaScanOptions opts;
    opts.fit = fit.options;
    const auto scan = extract_alpha_scan(traces, spec, rabi0, decay, nbar, opts);
    json points = json::array();
    for (const auto& p : scan) {
        json j = {{"dwell_time", p.dwell_time}, {"alpha", p.alpha}, {"sigma", finite_or_null(p.sigma)},
                  {"converged", p.converged}};
        if (!p.converged) {
            j["warning"] = p.warning;
            ok = false;
        }
        points.push_back(j);
    }
    json report = {{"kind", "alpha_scan_fit"}, {"sideband", spec.sideband}, {"alpha_scan", points},
                   {"fixed", {{"rabi0", rabi0}, {"decay", decay}, {"nbar", nbar}}}};
    const double w0 = fit.trap_freq_init > 0.0 ? fit.trap_freq_init : cfg.oscillator.trap_freq();
    const auto [lo, hi] = std::minmax_element(traces.begin(), traces.end(),
                                              [](const auto& a, const auto& b) { return a.dwell_time < b.dwell_time; });
    if ((hi->dwell_time - lo->dwell_time) * w0 < constants::two_pi) {
        report["alpha_curve"] = {{"skipped", "scan shorter than one oscillation period"}};
        return report;
    }
    try {
        report["alpha_curve"] = fit_json(fit_alpha_curve(scan, fit.alpha0_init, w0, fit.options));
    } catch (const std::exception& e) {
        if (!dynamic_cast<const NumericalError*>(&e) && !dynamic_cast<const DomainError*>(&e)) throw;
        report["alpha_curve"] = failure_json(e);
        ok = false;
    }
    if (fit.drift_delta_rabi0 >= 0.0 && report["alpha_curve"].value("converged", false)) {
        try {
            const auto band = drift_sensitivity(traces, spec, rabi0, fit.drift_delta_rabi0, decay, nbar,
                                                fit.alpha0_init, w0, {}, opts);
            report["drift"] = {{"delta_rabi0", fit.drift_delta_rabi0},
                               {"rabi0_plus", fit_json(band.low)},
                               {"rabi0_minus", fit_json(band.high)}};
        } catch (const std::exception& e) {
            if (!dynamic_cast<const NumericalError*>(&e) && !dynamic_cast<const DomainError*>(&e)) throw;
            report["drift"] = failure_json(e);
            ok = false;
        }
    }
    return report;
}

json fit_per_trace(const ExperimentConfig& cfg, const std::vector<KeyedTrace>& groups, bool displacement, bool& ok) {
    const auto& fit = directives(cfg);
    json rows = json::array();
    for (const auto& g : groups) {
        const int sb = displacement ? g.sideband : cfg.sequence.drive.sideband;
        auto params = fit.parameters;
        if (displacement) {
            // Nominal alpha from x_d; the physical start value for a tracked fit.
            const double nominal = displacement_alpha(g.key, cfg.oscillator);
            for (auto& p : params)
                if (p.name == "alpha") p.value = nominal;
        }
        json row = displacement ? json{{"x_d", g.key}, {"sideband", sb}} : json::object();
        try {
            row["fit"] = fit_json(fit_trace(g.trace, model_spec(cfg, sb, fit.model), params, fit.options));
        } catch (const NumericalError& e) {
            row["fit"] = failure_json(e);
            ok = false;
        }
        rows.push_back(row);
    }
    if (!displacement) {
        json report = rows.front();
        report["kind"] = "trace_fit";
        report["model"] = fit.model == TraceModelKind::decay ? "decay" : "detuned";
        return report;
    }
    return {{"kind", "displacement_fit"}, {"model", fit.model == TraceModelKind::decay ? "decay" : "detuned"},
            {"traces", rows}};
}

json fit_sets(const ExperimentConfig& cfg, const std::vector<KeyedTrace>& groups, bool& ok) {
    const auto& fit = directives(cfg);
    std::map<double, double> calibration;
    if (!fit.alpha_calibration.empty()) calibration = load_alpha_calibration(fit.alpha_calibration);
    std::map<int, std::vector<const KeyedTrace*>> by_sideband;
    for (const auto& g : groups) by_sideband[g.sideband].push_back(&g);
    json table = json::array();
    for (const auto& [sb, items] : by_sideband) {
        std::vector<PopulationTrace> traces;
        std::vector<double> alphas;
        for (const auto* g : items) {
            double alpha = displacement_alpha(g->key, cfg.oscillator);
            if (!calibration.empty()) {
                const auto it = calibration.find(g->key);
                if (it == calibration.end()) continue;
                alpha = it->second;
            }
            traces.push_back(g->trace);
            alphas.push_back(alpha);
        }
        json row = {{"sideband", sb}, {"traces", traces.size()}};
        try {
            row["fit"] = fit_json(fit_trace_set(traces, alphas, model_spec(cfg, sb, fit.model), fit.parameters, fit.options));
        } catch (const std::exception& e) {
            if (!dynamic_cast<const NumericalError*>(&e) && !dynamic_cast<const DomainError*>(&e)) throw;
            row["fit"] = failure_json(e);
            ok = false;
        }
        table.push_back(row);
    }
    return {{"kind", "sideband_set_fit"}, {"model", fit.model == TraceModelKind::decay ? "decay" : "detuned"},
            {"table", table}};
}

}  // namespace

Dataset simulate_dataset(const ExperimentConfig& cfg) {
    if (cfg.probe_times.empty()) throw ConfigError("simulate needs probe_times");
    Dataset d;
    auto run = [&](SequenceConfig seq, std::size_t index, std::size_t count) {
        return simulate_sequence(seq, cfg.oscillator, cfg.probe_times, cfg.shots, derive_seed(cfg.seed, index),
                                 cfg.drift.factor(index, count));
    };
    if (!cfg.scan) {
        d = make_dataset("trace");
        append_trace(d, {}, run(cfg.sequence, 0, 1));
    } else if (cfg.scan->variable == ScanVariable::dwell_time) {
        d = make_dataset("dwell_scan");
        const auto& v = cfg.scan->values;
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto seq = cfg.sequence;
            seq.protocol.dwell_time = v[i];
            append_trace(d, {v[i]}, run(seq, i, v.size()));
        }
    } else {
        d = make_dataset("displacement_scan");
        const auto& v = cfg.scan->values;
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto seq = cfg.sequence;
            seq.protocol.x_d = v[i];
            append_trace(d, {v[i], static_cast<double>(seq.drive.sideband)}, run(seq, i, v.size()));
        }
    }
    d.meta = base_meta(cfg, "simulate");
    d.meta["shots"] = cfg.shots;
    return d;
}

json fit_report(const ExperimentConfig& cfg, const Dataset& data, bool& all_converged) {
    const auto& fit = directives(cfg);
    const auto groups = group_traces(data);
    all_converged = true;
    json report;
    if (data.kind == "dwell_scan") {
        report = fit_dwell_scan(cfg, groups, all_converged);
    } else if (data.kind == "trace") {
        report = fit_per_trace(cfg, groups, false, all_converged);
    } else if (fit.mode == FitMode::per_trace) {
        report = fit_per_trace(cfg, groups, true, all_converged);
    } else {
        report = fit_sets(cfg, groups, all_converged);
    }
    report["meta"] = base_meta(cfg, "fit");
    if (data.meta.contains("config_hash")) report["meta"]["dataset_config_hash"] = data.meta["config_hash"];
    report["converged"] = all_converged;
    return report;
}

Dataset scan_dataset(const ExperimentConfig& cfg, const std::string& quantity) {
    if (!cfg.scan) throw ConfigError("scan needs a scan block");
    const auto& v = cfg.scan->values;
    Dataset d;
    if (quantity == "mean_rabi") {
        if (cfg.scan->variable != ScanVariable::displacement) throw ConfigError("mean_rabi scans run over x_d");
        d = make_dataset("mean_rabi_curve");
        std::vector<double> y;
        for (double xd : v) {
            const DisplacedThermalSpec state{cfg.sequence.nbar_th, displacement_alpha(xd, cfg.oscillator)};
            y.push_back(mean_rabi(state, cfg.sequence.drive, cfg.sequence.env, cfg.oscillator));
            d.rows.push_back({xd, static_cast<double>(cfg.sequence.drive.sideband), y.back()});
        }
        d.meta = base_meta(cfg, "scan");
        try {
            const auto m = minima_spacing(v, y);
            d.meta["minima"] = m.minima;
            d.meta["spacings"] = m.spacings;
        } catch (const DomainError& e) {
            d.meta["minima_error"] = e.what();
        }
    } else if (quantity == "residual_alpha") {
        if (cfg.scan->variable != ScanVariable::dwell_time) throw ConfigError("residual_alpha scans run over dwell_time");
        d.kind = "curve";
        d.columns = {"dwell_time", "alpha"};
        d.units = {"s", "1"};
        const double a0 = displacement_alpha(cfg.sequence.protocol.x_d, cfg.oscillator);
        for (double dt : v) d.rows.push_back({dt, residual_alpha(a0, dt, cfg.oscillator.trap_freq())});
        d.meta = base_meta(cfg, "scan");
    } else {
        throw ConfigError("unknown scan quantity '" + quantity + "' (mean_rabi, residual_alpha)");
    }
    return d;
}

namespace {

json lorentzian_json(const LorentzianFit& f) {
    return {{"center", f.center}, {"width", f.width}, {"amplitude", f.amplitude}, {"offset", f.offset},
            {"sigma_center", finite_or_null(f.sigma_center)}};
}

}  // namespace

Dataset spectrum_dataset(const ExperimentConfig& cfg, const Dataset& data) {
    const auto groups = group_traces(data);
    if (data.kind == "trace") {
        const auto spec = rabi_spectrum(groups.front().trace, cfg.spectrum.spectrum);
        Dataset d = make_dataset("spectrum");
        for (std::size_t k = 0; k < spec.omega.size(); ++k) d.rows.push_back({spec.omega[k], spec.magnitude[k], spec.sigma[k]});
        d.meta = base_meta(cfg, "spectrum");
        try {
            d.meta["lorentzian"] = lorentzian_json(fit_lorentzian(spec, cfg.spectrum.lorentzian));
        } catch (const std::exception& e) {
            d.meta["lorentzian_error"] = e.what();
        }
        return d;
    }
    if (data.kind != "displacement_scan") throw ConfigError("spectrum takes a trace or displacement_scan dataset");
    Dataset d = make_dataset("rabi_centers");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t failed = 0;
    for (const auto& g : groups) {
        auto drive = cfg.sequence.drive;
        drive.sideband = g.sideband;
        const double theory = mean_rabi({cfg.sequence.nbar_th, displacement_alpha(g.key, cfg.oscillator)}, drive,
                                        cfg.sequence.env, cfg.oscillator);
        double center = nan, sigma = nan, width = nan;
        try {
            const auto f = fit_lorentzian(rabi_spectrum(g.trace, cfg.spectrum.spectrum), cfg.spectrum.lorentzian);
            center = f.center;
            sigma = f.sigma_center;
            width = f.width;
        } catch (const std::exception&) {
            ++failed;
        }
        d.rows.push_back({g.key, static_cast<double>(g.sideband), center, sigma, width, theory});
    }
    d.meta = base_meta(cfg, "spectrum");
    d.meta["failed_fits"] = failed;
    return d;
}

std::string summarize_report(const json& report) {
    std::ostringstream os;
    auto khz = [](double w) { return w / constants::two_pi / 1e3; };
    auto show_fit = [&](const json& f, const std::string& indent) {
        if (!f.value("converged", false)) {
            os << indent << "not converged: " << f.value("error", std::string("unknown")) << "\n";
            return;
        }
        for (const auto& [name, v] : f["parameters"].items()) {
            os << indent << name << " = " << v["value"].get<double>();
            if (!v["error"].is_null()) os << " +- " << v["error"].get<double>();
            os << "\n";
        }
        os << indent << "chi2_reduced = " << (f["chi2_reduced"].is_null() ? "n/a" : f["chi2_reduced"].dump()) << "\n";
    };
    const auto kind = report.value("kind", std::string());
    if (kind == "trace_fit") {
        os << "trace fit (" << report.value("model", std::string()) << ")\n";
        show_fit(report["fit"], "  ");
    } else if (kind == "alpha_scan_fit") {
        std::size_t bad = 0;
        for (const auto& p : report["alpha_scan"]) bad += !p["converged"].get<bool>();
        os << "alpha scan: " << report["alpha_scan"].size() << " dwell times, " << bad << " not converged\n";
        os << "alpha curve:\n";
        show_fit(report["alpha_curve"], "  ");
        if (report.contains("drift") && report["drift"].contains("rabi0_plus")) {
            os << "drift band, rabi0 + delta:\n";
            show_fit(report["drift"]["rabi0_plus"], "  ");
            os << "drift band, rabi0 - delta:\n";
            show_fit(report["drift"]["rabi0_minus"], "  ");
        }
    } else if (kind == "displacement_fit") {
        std::size_t bad = 0;
        for (const auto& t : report["traces"]) bad += !t["fit"].value("converged", false);
        os << "per-trace fits: " << report["traces"].size() << " traces, " << bad << " not converged\n";
    } else if (kind == "sideband_set_fit") {
        os << "  s   Omega0/2pi (kHz)      delta_off/2pi (kHz)\n";
        for (const auto& row : report["table"]) {
            os << "  " << row["sideband"].get<int>() << "   ";
            const auto& f = row["fit"];
            if (!f.value("converged", false)) {
                os << "not converged: " << f.value("error", std::string()) << "\n";
                continue;
            }
            auto cell = [&](const char* name) {
                if (!f["parameters"].contains(name)) {
                    os << "(fixed)               ";
                    return;
                }
                const auto& v = f["parameters"][name];
                char buf[64];
                std::snprintf(buf, sizeof buf, "%9.2f +- %-8.2f  ", khz(v["value"].get<double>()),
                              v["error"].is_null() ? std::nan("") : khz(v["error"].get<double>()));
                os << buf;
            };
            cell("rabi0");
            cell("detune_off");
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace bangbang
