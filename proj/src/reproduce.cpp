#include <cmath>
#include <filesystem>
#include <sstream>

#include "bangbang/commands.hpp"
#include "bangbang/error.hpp"

namespace bangbang {

using nlohmann::json;

namespace {

constexpr double kHz = constants::two_pi * 1e3;
constexpr double kMHz = constants::two_pi * 1e6;

OscillatorParams ca40(double trap_freq) {
    return OscillatorParams(constants::ca40_ion_mass_u, trap_freq, 729e-9, constants::pi / 4);
}

// Coherent-state experiments (Fig. 2): s = 1 probe, first-fit calibration.
ExperimentConfig fig2_base(double trap_freq, double alpha0) {
    ExperimentConfig cfg;
    cfg.oscillator = ca40(trap_freq);
    cfg.sequence.probe_phase = ProbePhase::after_return;
    cfg.sequence.protocol.x_d = alpha0 * 2.0 * cfg.oscillator.ground_state_extent();
    cfg.sequence.drive = {1, 181.0 * kHz, 0.0, 2.2e3};
    cfg.sequence.env.enabled = false;
    cfg.sequence.nbar_th = 0.2;
    cfg.shots = 1000;
    FitDirectives fit;
    fit.model = TraceModelKind::decay;
    fit.parameters = {{"rabi0", 181.0 * kHz, false}, {"decay", 2.2e3, false}, {"nbar", 0.2, false},
                      {"alpha", 0.0, true}};
    fit.alpha0_init = 5.0;
    cfg.fit = fit;
    return cfg;
}

std::string write(const std::string& dir, const std::string& name, const Dataset& d, std::vector<std::string>& files) {
    const auto path = (std::filesystem::path(dir) / name).string();
    write_dataset(path, d);
    files.push_back(path);
    return path;
}

void write_json(const std::string& dir, const std::string& name, const json& j, std::vector<std::string>& files) {
    const auto path = (std::filesystem::path(dir) / name).string();
    write_file_atomic(path, j.dump(2) + "\n");
    files.push_back(path);
}

Dataset alpha_dataset(const ExperimentConfig& cfg, const json& report) {
    Dataset d = make_dataset("alpha_scan");
    for (const auto& p : report["alpha_scan"])
        d.rows.push_back({p["dwell_time"].get<double>(), p["alpha"].get<double>(),
                          p["sigma"].is_null() ? std::numeric_limits<double>::infinity() : p["sigma"].get<double>(),
                          p["converged"].get<bool>() ? 1.0 : 0.0});
    d.meta = {{"command", "reproduce"}, {"config_hash", cfg.hash}, {"seed", cfg.seed}, {"tool_version", kToolVersion}};
    return d;
}

double param(const json& fit, const char* name) { return fit["parameters"][name]["value"].get<double>(); }

std::vector<std::string> fig2a(const std::string& dir, std::uint64_t seed, std::ostream& log) {
    std::vector<std::string> files;
    auto cfg = figure_config("fig2a");
    cfg.seed = seed;
    refresh_hash(cfg);
    const auto data = simulate_dataset(cfg);
    write(dir, "fig2a_traces.csv", data, files);
    bool ok = true;
    const auto report = fit_report(cfg, data, ok);
    write_json(dir, "fig2a_report.json", report, files);
    write(dir, "fig2a_alpha.csv", alpha_dataset(cfg, report), files);
    Dataset curve;
    curve.kind = "curve";
    curve.columns = {"dwell_time", "alpha_fit", "band_low", "band_high"};
    curve.units = {"s", "1", "1", "1"};
    curve.meta = alpha_dataset(cfg, report).meta;
    const auto& fc = report["alpha_curve"];
    const bool have_band = report.contains("drift") && report["drift"].contains("rabi0_plus");
    if (fc.value("converged", false)) {
        for (double dt : linspace(0.0, cfg.scan->values.back(), 401)) {
            const double mid = alpha_curve(param(fc, "alpha0"), param(fc, "trap_freq"), dt);
            double lo = mid, hi = mid;
            if (have_band) {
                const auto& p = report["drift"]["rabi0_plus"];
                const auto& m = report["drift"]["rabi0_minus"];
                lo = alpha_curve(param(p, "alpha0"), param(p, "trap_freq"), dt);
                hi = alpha_curve(param(m, "alpha0"), param(m, "trap_freq"), dt);
            }
            curve.rows.push_back({dt, mid, lo, hi});
        }
        write(dir, "fig2a_curve.csv", curve, files);
    }
    log << summarize_report(report);
    return files;
}

std::vector<std::string> fig2b(const std::string& dir, std::uint64_t seed, std::ostream& log) {
    std::vector<std::string> files;
    auto cfg = figure_config("fig2b");
    cfg.seed = seed;
    refresh_hash(cfg);
    const auto data = simulate_dataset(cfg);
    write(dir, "fig2b_traces.csv", data, files);
    bool ok = true;
    const auto report = fit_report(cfg, data, ok);
    write_json(dir, "fig2b_report.json", report, files);
    write(dir, "fig2b_alpha.csv", alpha_dataset(cfg, report), files);
    Dataset theory = scan_dataset(cfg, "residual_alpha");
    write(dir, "fig2b_theory.csv", theory, files);
    const double period = constants::two_pi / cfg.oscillator.trap_freq();
    const auto& pts = report["alpha_scan"];
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (std::abs(pts[i]["dwell_time"].get<double>() - period) < std::abs(pts[best]["dwell_time"].get<double>() - period))
            best = i;
    log << "alpha nearest one period (dt = " << pts[best]["dwell_time"].get<double>() * 1e9 << " ns): "
        << pts[best]["alpha"].get<double>() << " +- " << pts[best]["sigma"].dump() << "\n";
    return files;
}

std::vector<std::string> fig2c(const std::string& dir, std::uint64_t seed, std::ostream& log) {
    std::vector<std::string> files;
    const double w = 2.52 * kMHz;
    auto base = fig2_base(w, 85.0);
    base.probe_times = linspace(2e-6, 100e-6, 50);
    base.fit->parameters = {{"rabi0", 181.0 * kHz, true}, {"decay", 2.2e3, true}, {"nbar", 0.2, true},
                            {"alpha", 0.0, false}};
    auto initial = base;
    initial.sequence.protocol.x_d = 0.0;
    initial.sequence.nbar_th = 0.15;
    initial.seed = derive_seed(seed, 0);
    refresh_hash(initial);
    auto returned = base;
    returned.sequence.protocol.hold_periods = 1;
    returned.sequence.protocol.trigger_exact_period = true;
    returned.sequence.nbar_th = 0.21;
    returned.seed = derive_seed(seed, 1);
    refresh_hash(returned);
    json report = {{"kind", "fig2c"}};
    Dataset out;
    out.kind = "curve";
    out.columns = {"t_p", "p_initial", "sigma_initial", "fit_initial", "p_returned", "sigma_returned", "fit_returned"};
    out.units = {"s", "1", "1", "1", "1", "1", "1"};
    std::vector<std::vector<double>> cols;
    for (auto* cfg : {&initial, &returned}) {
        const auto data = simulate_dataset(*cfg);
        bool ok = true;
        const auto r = fit_report(*cfg, data, ok);
        report[cfg == &initial ? "initial" : "returned"] = r;
        PopulationTrace tr;
        tr.probe_times = data.column("t_p");
        tr.p_down = data.column("p_down");
        tr.sigma = data.column("sigma");
        cols.push_back(tr.p_down);
        cols.push_back(tr.sigma);
        std::vector<double> model(tr.size(), std::numeric_limits<double>::quiet_NaN());
        if (r["fit"].value("converged", false)) {
            TraceModelSpec spec;
            spec.params = cfg->oscillator;
            spec.sideband = 1;
            spec.env.enabled = false;
            TraceModel m(spec);
            model = m.evaluate({param(r["fit"], "rabi0"), param(r["fit"], "decay"), 0.0, param(r["fit"], "nbar"), 0.0},
                               tr.probe_times);
        }
        cols.push_back(model);
        log << (cfg == &initial ? "initial state (nbar_th = 0.15):\n" : "returned after one period (nbar_th = 0.21):\n")
            << summarize_report(r);
    }
    for (std::size_t i = 0; i < base.probe_times.size(); ++i)
        out.rows.push_back({base.probe_times[i], cols[0][i], cols[1][i], cols[2][i], cols[3][i], cols[4][i], cols[5][i]});
    out.meta = {{"command", "reproduce"}, {"seed", seed}, {"tool_version", kToolVersion}};
    write(dir, "fig2c_traces.csv", out, files);
    write_json(dir, "fig2c_report.json", report, files);
    return files;
}

Dataset fig3_data(std::uint64_t seed) {
    Dataset all = make_dataset("displacement_scan");
    for (int s = 0; s <= 5; ++s) {
        auto cfg = figure_config("fig3a", s);
        cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(s));
        refresh_hash(cfg);
        const auto d = simulate_dataset(cfg);
        all.rows.insert(all.rows.end(), d.rows.begin(), d.rows.end());
    }
    all.meta = {{"command", "reproduce"}, {"seed", seed}, {"tool_version", kToolVersion}, {"shots", 1000}};
    return all;
}

std::vector<std::string> fig3a(const std::string& dir, std::uint64_t seed, std::ostream& log) {
    std::vector<std::string> files;
    const auto data = fig3_data(seed);
    write(dir, "fig3a_data.csv", data, files);
    log << "fig3a: " << data.rows.size() << " rows, sidebands 0..5\n";
    return files;
}

std::vector<std::string> fig3b(const std::string& dir, std::uint64_t seed, std::ostream& log) {
    std::vector<std::string> files;
    const auto data = fig3_data(seed);
    // Carrier calibration: rabi0 from the non-displaced state, decay 0, |alpha| floating.
    auto carrier = figure_config("fig3a", 0);
    carrier.seed = seed;
    FitDirectives cal;
    cal.mode = FitMode::per_trace;
    cal.model = TraceModelKind::decay;
    cal.parameters = {{"rabi0", 204.3 * kHz, false}, {"decay", 0.0, false}, {"nbar", 0.21, false}, {"alpha", 0.0, true}};
    carrier.fit = cal;
    refresh_hash(carrier);
    Dataset carrier_data = data;
    carrier_data.rows.clear();
    for (const auto& r : data.rows)
        if (r[1] == 0.0) carrier_data.rows.push_back(r);
    bool ok = true;
    const auto cal_report = fit_report(carrier, carrier_data, ok);
    Dataset alphas = make_dataset("displacement_alpha");
    for (const auto& t : cal_report["traces"]) {
        const auto& f = t["fit"];
        const bool conv = f.value("converged", false);
        alphas.rows.push_back({t["x_d"].get<double>(), conv ? std::abs(param(f, "alpha")) : 0.0,
                               conv && !f["parameters"]["alpha"]["error"].is_null()
                                   ? f["parameters"]["alpha"]["error"].get<double>()
                                   : std::numeric_limits<double>::infinity(),
                               conv ? 1.0 : 0.0});
    }
    alphas.meta = {{"command", "reproduce"}, {"seed", seed}, {"tool_version", kToolVersion}};
    const auto alpha_path = write(dir, "fig3b_alpha.csv", alphas, files);

    json table = json::array();
    Dataset model = make_dataset("displacement_scan");
    for (int s = 0; s <= 5; ++s) {
        auto cfg = figure_config("fig3a", s);
        cfg.seed = seed;
        const auto d0 = table2_drive(s);
        FitDirectives fit;
        fit.mode = FitMode::set;
        fit.model = TraceModelKind::detuned;
        fit.parameters = {{"rabi0", d0.rabi0, true}, {"detune_off", d0.detune_off, s != 0}, {"nbar", 0.21, false}};
        fit.alpha_calibration = alpha_path;
        cfg.fit = fit;
        refresh_hash(cfg);
        Dataset sub = data;
        sub.rows.clear();
        for (const auto& r : data.rows)
            if (r[1] == static_cast<double>(s)) sub.rows.push_back(r);
        bool set_ok = true;
        const auto rep = fit_report(cfg, sub, set_ok);
        const auto& row = rep["table"].front();
        table.push_back(row);
        if (!row["fit"].value("converged", false)) continue;
        auto drive = d0;
        drive.rabi0 = param(row["fit"], "rabi0");
        if (s != 0) drive.detune_off = param(row["fit"], "detune_off");
        const auto cal_alpha = alphas.column("alpha");
        const auto cal_x = alphas.column("x_d");
        for (std::size_t i = 0; i < cal_x.size(); ++i) {
            const DisplacedThermalSpec state{0.21, cal_alpha[i]};
            const auto dist = displaced_thermal_pmf(state);
            const auto p = p_down_detuned(dist, drive, cfg.sequence.env, cfg.oscillator, cfg.probe_times);
            for (std::size_t j = 0; j < p.size(); ++j)
                model.rows.push_back({cal_x[i], static_cast<double>(s), cfg.probe_times[j], p[j], 0.0, 0.0});
        }
    }
    model.meta = {{"command", "reproduce"}, {"seed", seed}, {"tool_version", kToolVersion}, {"shots", 0}};
    write(dir, "fig3b_model.csv", model, files);
    json report = {{"kind", "sideband_set_fit"}, {"table", table}, {"carrier_calibration", cal_report["converged"]}};
    write_json(dir, "fig3b_table.json", report, files);
    log << summarize_report(report);
    return files;
}

std::vector<std::string> fig3c(const std::string& dir, std::uint64_t seed, std::ostream& log) {
    std::vector<std::string> files;
    const auto data = fig3_data(seed);
    Dataset centers = make_dataset("rabi_centers");
    Dataset theory = make_dataset("mean_rabi_curve");
    json spacing = json::object();
    for (int s = 0; s <= 5; ++s) {
        auto cfg = figure_config("fig3a", s);
        cfg.spectrum.spectrum.padding = 8;
        cfg.spectrum.spectrum.remove_mean = true;
        Dataset sub = data;
        sub.rows.clear();
        for (const auto& r : data.rows)
            if (r[1] == static_cast<double>(s)) sub.rows.push_back(r);
        const auto c = spectrum_dataset(cfg, sub);
        centers.rows.insert(centers.rows.end(), c.rows.begin(), c.rows.end());
        cfg.scan->values = linspace(0.0, 1.5e-6, 301);
        const auto t = scan_dataset(cfg, "mean_rabi");
        theory.rows.insert(theory.rows.end(), t.rows.begin(), t.rows.end());
        spacing[std::to_string(s)] = t.meta.contains("spacings") ? t.meta["spacings"] : json(t.meta["minima_error"]);
        if (t.meta.contains("spacings")) {
            log << "s = " << s << " theory minima spacings (nm):";
            for (const auto& v : t.meta["spacings"]) log << " " << v.get<double>() * 1e9;
            log << "\n";
        }
    }
    const json meta = {{"command", "reproduce"}, {"seed", seed}, {"tool_version", kToolVersion}};
    centers.meta = meta;
    theory.meta = meta;
    theory.meta["spacings"] = spacing;
    write(dir, "fig3c_centers.csv", centers, files);
    write(dir, "fig3c_theory.csv", theory, files);
    return files;
}

}  // namespace

SidebandDrive table2_drive(int sideband) {
    static const double rabi_khz[] = {205, 211, 218, 224, 226, 226};
    static const double offset_khz[] = {0, 4, -4, -12, -23, -32};
    if (sideband < 0 || sideband > 5) throw DomainError("Table 2 covers sidebands 0..5");
    return {sideband, rabi_khz[sideband] * kHz, offset_khz[sideband] * kHz, 0.0};
}

ExperimentConfig figure_config(const std::string& figure, int sideband) {
    ExperimentConfig cfg;
    if (figure == "fig2a") {
        cfg = fig2_base(2.3505 * kMHz, 5.11);
        cfg.probe_times = linspace(1.5e-6, 60e-6, 40);
        cfg.scan = ScanSpec{ScanVariable::dwell_time, linspace(0.0, 2e-6, 81)};
        cfg.fit->trap_freq_init = cfg.oscillator.trap_freq();
        cfg.fit->drift_delta_rabi0 = 3.2 * kHz;
    } else if (figure == "fig2b") {
        cfg = fig2_base(2.53 * kMHz, 85.0);
        const double period = constants::two_pi / cfg.oscillator.trap_freq();
        cfg.probe_times = linspace(2e-6, 100e-6, 50);
        cfg.scan = ScanSpec{ScanVariable::dwell_time, linspace(period - 1e-9, period + 1e-9, 41)};
    } else if (figure == "fig3a") {
        cfg.oscillator = ca40(2.35 * kMHz);
        cfg.sequence.probe_phase = ProbePhase::while_displaced;
        cfg.sequence.protocol.hold_periods = 1;
        cfg.sequence.protocol.trigger_exact_period = true;
        cfg.sequence.drive = table2_drive(sideband);
        cfg.sequence.nbar_th = 0.21;
        cfg.shots = 1000;
        cfg.probe_times = linspace(1.4e-6, 80e-6, 197);
        cfg.scan = ScanSpec{ScanVariable::displacement, linspace(0.0, 1.5e-6, 61)};
    } else {
        throw ConfigError("unknown figure '" + figure + "'");
    }
    refresh_hash(cfg);
    return cfg;
}

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {"fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c"};
    return ids;
}

std::vector<std::string> reproduce_figure(const std::string& figure, const std::string& out_dir, std::uint64_t seed,
                                          std::string& summary) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");
    std::ostringstream log;
    std::vector<std::string> files;
    if (figure == "fig2a") files = fig2a(out_dir, seed, log);
    else if (figure == "fig2b") files = fig2b(out_dir, seed, log);
    else if (figure == "fig2c") files = fig2c(out_dir, seed, log);
    else if (figure == "fig3a") files = fig3a(out_dir, seed, log);
    else if (figure == "fig3b") files = fig3b(out_dir, seed, log);
    else if (figure == "fig3c") files = fig3c(out_dir, seed, log);
    else throw ConfigError("unknown figure '" + figure + "' (fig2a, fig2b, fig2c, fig3a, fig3b, fig3c)");
    summary = log.str();
    return files;
}

}  // namespace bangbang
