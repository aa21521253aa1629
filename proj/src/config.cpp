#include "bangbang/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bangbang/error.hpp"

namespace bangbang {

using nlohmann::json;

namespace {

struct UnitEntry {
    QuantityKind kind;
    double scale;
};

const std::map<std::string, UnitEntry, std::less<>>& unit_table() {
    static const std::map<std::string, UnitEntry, std::less<>> table = {
        {"Hz", {QuantityKind::angular_frequency, constants::two_pi}},
        {"kHz", {QuantityKind::angular_frequency, constants::two_pi * 1e3}},
        {"MHz", {QuantityKind::angular_frequency, constants::two_pi * 1e6}},
        {"GHz", {QuantityKind::angular_frequency, constants::two_pi * 1e9}},
        {"rad/s", {QuantityKind::angular_frequency, 1.0}},
        {"1/s", {QuantityKind::rate, 1.0}},
        {"1/ms", {QuantityKind::rate, 1e3}},
        {"1/us", {QuantityKind::rate, 1e6}},
        {"m", {QuantityKind::length, 1.0}},
        {"mm", {QuantityKind::length, 1e-3}},
        {"um", {QuantityKind::length, 1e-6}},
        {"\xC2\xB5m", {QuantityKind::length, 1e-6}},
        {"nm", {QuantityKind::length, 1e-9}},
        {"pm", {QuantityKind::length, 1e-12}},
        {"s", {QuantityKind::time, 1.0}},
        {"ms", {QuantityKind::time, 1e-3}},
        {"us", {QuantityKind::time, 1e-6}},
        {"\xC2\xB5s", {QuantityKind::time, 1e-6}},
        {"ns", {QuantityKind::time, 1e-9}},
        {"ps", {QuantityKind::time, 1e-12}},
        {"rad", {QuantityKind::angle, 1.0}},
        {"deg", {QuantityKind::angle, constants::pi / 180.0}},
        {"u", {QuantityKind::mass, 1.0}},
        {"kg", {QuantityKind::mass, 1.0 / constants::atomic_mass_unit}},
    };
    return table;
}

const char* kind_name(QuantityKind kind) {
    switch (kind) {
        case QuantityKind::angular_frequency: return "frequency";
        case QuantityKind::rate: return "rate";
        case QuantityKind::length: return "length";
        case QuantityKind::time: return "time";
        case QuantityKind::angle: return "angle";
        case QuantityKind::mass: return "mass";
    }
    return "quantity";
}

}  // namespace

double to_si(double value, std::string_view unit, QuantityKind kind) {
    const auto& table = unit_table();
    const auto it = table.find(unit);
    if (it == table.end() || it->second.kind != kind)
        throw ConfigError("'" + std::string(unit) + "' is not a " + kind_name(kind) + " unit");
    // Masses are stored in atomic mass units, everything else in SI.
    return value * it->second.scale;
}

double parse_quantity(std::string_view text, QuantityKind kind) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr == text.data()) throw ConfigError("cannot read a number from '" + std::string(text) + "'");
    std::string_view unit(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr));
    while (!unit.empty() && unit.front() == ' ') unit.remove_prefix(1);
    if (unit.empty()) throw ConfigError("'" + std::string(text) + "' has no unit");
    return to_si(value, unit, kind);
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// Best-effort line lookup: follows the path's keys through the raw text.
class Reader {
  public:
    Reader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
        std::string where = "/";
        for (std::size_t i = 0; i < path.size(); ++i) where += (i ? "/" : "") + path[i];
        std::string out = std::string(source_);
        if (const auto line = line_of(path)) out += ":" + std::to_string(*line);
        throw ConfigError(out + ": " + where + ": " + message);
    }

    std::optional<std::size_t> line_of(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        bool found = false;
        for (const auto& key : path) {
            if (!key.empty() && key.front() == '[') continue;
            const auto next = text_.find("\"" + key + "\"", pos);
            if (next == std::string_view::npos) break;
            pos = next;
            found = true;
        }
        if (!found) return std::nullopt;
        std::size_t line = 1;
        for (std::size_t i = 0; i < pos; ++i)
            if (text_[i] == '\n') ++line;
        return line;
    }

  private:
    std::string_view text_;
    std::string_view source_;
};

using Path = std::vector<std::string>;

Path join(Path p, const std::string& key) {
    p.push_back(key);
    return p;
}

void only_keys(const Reader& rd, const json& obj, const Path& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) rd.fail(path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!ok.count(key)) rd.fail(join(path, key), "unknown key");
}

double number(const Reader& rd, const json& v, const Path& path) {
    if (!v.is_number()) rd.fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) rd.fail(path, "expected a finite number");
    return x;
}

std::int64_t integer(const Reader& rd, const json& v, const Path& path) {
    if (!v.is_number_integer()) rd.fail(path, "expected an integer");
    return v.get<std::int64_t>();
}

bool boolean(const Reader& rd, const json& v, const Path& path) {
    if (!v.is_boolean()) rd.fail(path, "expected true or false");
    return v.get<bool>();
}

std::string string(const Reader& rd, const json& v, const Path& path) {
    if (!v.is_string()) rd.fail(path, "expected a string");
    return v.get<std::string>();
}

double quantity(const Reader& rd, const json& v, const Path& path, QuantityKind kind) {
    if (!v.is_object() || !v.contains("value") || !v.contains("unit"))
        rd.fail(path, std::string("expected {\"value\": ..., \"unit\": ...} for a ") + kind_name(kind));
    only_keys(rd, v, path, {"value", "unit"});
    const double x = number(rd, v["value"], join(path, "value"));
    const auto unit = string(rd, v["unit"], join(path, "unit"));
    try {
        return to_si(x, unit, kind);
    } catch (const ConfigError& e) {
        rd.fail(join(path, "unit"), e.what());
    }
}

// {"start", "stop", "count"} with quantities, or {"values": [...], "unit": u}.
std::vector<double> grid(const Reader& rd, const json& v, const Path& path, QuantityKind kind,
                         std::initializer_list<const char*> extra = {}) {
    if (!v.is_object()) rd.fail(path, "expected an object");
    std::vector<const char*> allowed = {"start", "stop", "count", "values", "unit"};
    allowed.insert(allowed.end(), extra.begin(), extra.end());
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : v.items())
        if (!ok.count(key)) rd.fail(join(path, key), "unknown key");
    std::vector<double> out;
    if (v.contains("values")) {
        if (v.contains("start") || v.contains("stop") || v.contains("count"))
            rd.fail(path, "give either values or start/stop/count");
        if (!v.contains("unit")) rd.fail(path, "values need a unit");
        const auto unit = string(rd, v["unit"], join(path, "unit"));
        const auto& arr = v["values"];
        if (!arr.is_array() || arr.empty()) rd.fail(join(path, "values"), "expected a non-empty array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const double x = number(rd, arr[i], join(join(path, "values"), "[" + std::to_string(i) + "]"));
            try {
                out.push_back(to_si(x, unit, kind));
            } catch (const ConfigError& e) {
                rd.fail(join(path, "unit"), e.what());
            }
        }
    } else {
        for (const char* key : {"start", "stop", "count"})
            if (!v.contains(key)) rd.fail(join(path, key), "missing");
        if (v.contains("unit")) rd.fail(join(path, "unit"), "unit belongs inside start and stop");
        const double a = quantity(rd, v["start"], join(path, "start"), kind);
        const double b = quantity(rd, v["stop"], join(path, "stop"), kind);
        const auto n = integer(rd, v["count"], join(path, "count"));
        if (n < 1) rd.fail(join(path, "count"), "must be >= 1");
        if (n == 1) {
            if (a != b) rd.fail(join(path, "count"), "count 1 needs start == stop");
            out.push_back(a);
        } else {
            out = linspace(a, b, static_cast<std::size_t>(n));
        }
    }
    return out;
}

const std::map<std::string, QuantityKind>& parameter_kinds() {
    static const std::map<std::string, QuantityKind> kinds = {
        {"rabi0", QuantityKind::angular_frequency},
        {"detune_off", QuantityKind::angular_frequency},
        {"decay", QuantityKind::rate},
    };
    return kinds;
}

void parse_oscillator(const Reader& rd, const json& v, ExperimentConfig& cfg) {
    const Path path{"oscillator"};
    only_keys(rd, v, path, {"ion_mass", "trap_freq", "wavelength", "beam_angle"});
    double mass = cfg.oscillator.ion_mass_u();
    double freq = cfg.oscillator.trap_freq();
    double wavelength = cfg.oscillator.wavelength();
    double angle = cfg.oscillator.beam_angle();
    if (v.contains("ion_mass")) mass = quantity(rd, v["ion_mass"], join(path, "ion_mass"), QuantityKind::mass);
    if (v.contains("trap_freq"))
        freq = quantity(rd, v["trap_freq"], join(path, "trap_freq"), QuantityKind::angular_frequency);
    if (v.contains("wavelength"))
        wavelength = quantity(rd, v["wavelength"], join(path, "wavelength"), QuantityKind::length);
    if (v.contains("beam_angle"))
        angle = quantity(rd, v["beam_angle"], join(path, "beam_angle"), QuantityKind::angle);
    try {
        cfg.oscillator = OscillatorParams(mass, freq, wavelength, angle);
    } catch (const DomainError& e) {
        rd.fail(path, e.what());
    }
}

void parse_sequence(const Reader& rd, const json& v, ExperimentConfig& cfg) {
    const Path path{"sequence"};
    only_keys(rd, v, path, {"probe_phase", "x_d", "dwell_time", "hold_periods", "trigger_exact_period", "nbar_th"});
    auto& seq = cfg.sequence;
    if (v.contains("probe_phase")) {
        const auto s = string(rd, v["probe_phase"], join(path, "probe_phase"));
        if (s == "after_return") seq.probe_phase = ProbePhase::after_return;
        else if (s == "while_displaced") seq.probe_phase = ProbePhase::while_displaced;
        else rd.fail(join(path, "probe_phase"), "expected after_return or while_displaced");
    }
    if (v.contains("x_d")) seq.protocol.x_d = quantity(rd, v["x_d"], join(path, "x_d"), QuantityKind::length);
    if (v.contains("dwell_time"))
        seq.protocol.dwell_time = quantity(rd, v["dwell_time"], join(path, "dwell_time"), QuantityKind::time);
    if (v.contains("hold_periods")) seq.protocol.hold_periods = integer(rd, v["hold_periods"], join(path, "hold_periods"));
    if (v.contains("trigger_exact_period"))
        seq.protocol.trigger_exact_period = boolean(rd, v["trigger_exact_period"], join(path, "trigger_exact_period"));
    if (v.contains("nbar_th")) seq.nbar_th = number(rd, v["nbar_th"], join(path, "nbar_th"));
}

void parse_drive(const Reader& rd, const json& v, ExperimentConfig& cfg) {
    const Path path{"drive"};
    only_keys(rd, v, path, {"sideband", "rabi0", "detune_off", "decay"});
    auto& d = cfg.sequence.drive;
    if (v.contains("sideband")) d.sideband = static_cast<int>(integer(rd, v["sideband"], join(path, "sideband")));
    if (v.contains("rabi0")) d.rabi0 = quantity(rd, v["rabi0"], join(path, "rabi0"), QuantityKind::angular_frequency);
    if (v.contains("detune_off"))
        d.detune_off = quantity(rd, v["detune_off"], join(path, "detune_off"), QuantityKind::angular_frequency);
    if (v.contains("decay")) d.decay = quantity(rd, v["decay"], join(path, "decay"), QuantityKind::rate);
}

void parse_stark(const Reader& rd, const json& v, ExperimentConfig& cfg) {
    const Path path{"stark"};
    only_keys(rd, v, path, {"enabled", "delta_secondary", "coupling_ratio", "sum_cutoff", "convention"});
    auto& env = cfg.sequence.env;
    if (v.contains("enabled")) env.enabled = boolean(rd, v["enabled"], join(path, "enabled"));
    if (v.contains("delta_secondary"))
        env.delta_secondary =
            quantity(rd, v["delta_secondary"], join(path, "delta_secondary"), QuantityKind::angular_frequency);
    if (v.contains("coupling_ratio")) env.coupling_ratio = number(rd, v["coupling_ratio"], join(path, "coupling_ratio"));
    if (v.contains("sum_cutoff")) env.sum_cutoff = static_cast<int>(integer(rd, v["sum_cutoff"], join(path, "sum_cutoff")));
    if (v.contains("convention")) {
        const auto s = string(rd, v["convention"], join(path, "convention"));
        if (s == "sideband_indexed") env.convention = StarkConvention::sideband_indexed;
        else if (s == "as_printed") env.convention = StarkConvention::as_printed;
        else rd.fail(join(path, "convention"), "expected sideband_indexed or as_printed");
    }
}

void parse_scan(const Reader& rd, const json& v, ExperimentConfig& cfg) {
    const Path path{"scan"};
    if (!v.is_object() || !v.contains("variable")) rd.fail(path, "scan needs a variable");
    ScanSpec scan;
    const auto var = string(rd, v["variable"], join(path, "variable"));
    QuantityKind kind = QuantityKind::time;
    if (var == "dwell_time") {
        scan.variable = ScanVariable::dwell_time;
    } else if (var == "x_d") {
        scan.variable = ScanVariable::displacement;
        kind = QuantityKind::length;
    } else {
        rd.fail(join(path, "variable"), "expected dwell_time or x_d");
    }
    scan.values = grid(rd, v, path, kind, {"variable"});
    for (double x : scan.values)
        if (!(x >= 0.0)) rd.fail(path, "scan values must be non-negative");
    cfg.scan = std::move(scan);
}

void parse_fit(const Reader& rd, const json& v, ExperimentConfig& cfg) {
    const Path path{"fit"};
    only_keys(rd, v, path,
              {"mode", "model", "parameters", "max_iterations", "alpha0_init", "trap_freq_init", "drift_delta_rabi0",
               "alpha_calibration"});
    FitDirectives fit;
    if (v.contains("mode")) {
        const auto s = string(rd, v["mode"], join(path, "mode"));
        if (s == "per_trace") fit.mode = FitMode::per_trace;
        else if (s == "set") fit.mode = FitMode::set;
        else rd.fail(join(path, "mode"), "expected per_trace or set");
    }
    if (v.contains("model")) {
        const auto s = string(rd, v["model"], join(path, "model"));
        if (s == "decay") fit.model = TraceModelKind::decay;
        else if (s == "detuned") fit.model = TraceModelKind::detuned;
        else rd.fail(join(path, "model"), "expected decay or detuned");
    }
    if (v.contains("parameters")) {
        const auto ppath = join(path, "parameters");
        const auto& params = v["parameters"];
        if (!params.is_object()) rd.fail(ppath, "expected an object");
        const auto names = model_parameter_names(fit.model);
        for (const auto& [name, spec] : params.items()) {
            const auto npath = join(ppath, name);
            if (std::find(names.begin(), names.end(), name) == names.end())
                rd.fail(npath, "not a parameter of this model");
            only_keys(rd, spec, npath, {"value", "unit", "float"});
            ParameterSpec ps;
            ps.name = name;
            if (!spec.contains("value")) rd.fail(npath, "missing value");
            const auto kinds = parameter_kinds();
            if (const auto it = kinds.find(name); it != kinds.end()) {
                if (!spec.contains("unit")) rd.fail(npath, "missing unit");
                json q = {{"value", spec["value"]}, {"unit", spec["unit"]}};
                ps.value = quantity(rd, q, npath, it->second);
            } else {
                if (spec.contains("unit")) rd.fail(join(npath, "unit"), "dimensionless parameter takes no unit");
                ps.value = number(rd, spec["value"], join(npath, "value"));
            }
            if (spec.contains("float")) ps.floating = boolean(rd, spec["float"], join(npath, "float"));
            fit.parameters.push_back(ps);
        }
    }
    if (v.contains("max_iterations")) {
        const auto n = integer(rd, v["max_iterations"], join(path, "max_iterations"));
        if (n < 1) rd.fail(join(path, "max_iterations"), "must be >= 1");
        fit.options.max_iterations = static_cast<int>(n);
    }
    if (v.contains("alpha0_init")) fit.alpha0_init = number(rd, v["alpha0_init"], join(path, "alpha0_init"));
    if (v.contains("trap_freq_init"))
        fit.trap_freq_init =
            quantity(rd, v["trap_freq_init"], join(path, "trap_freq_init"), QuantityKind::angular_frequency);
    if (v.contains("drift_delta_rabi0"))
        fit.drift_delta_rabi0 =
            quantity(rd, v["drift_delta_rabi0"], join(path, "drift_delta_rabi0"), QuantityKind::angular_frequency);
    if (v.contains("alpha_calibration"))
        fit.alpha_calibration = string(rd, v["alpha_calibration"], join(path, "alpha_calibration"));
    cfg.fit = std::move(fit);
}

void parse_spectrum(const Reader& rd, const json& v, ExperimentConfig& cfg) {
    const Path path{"spectrum"};
    only_keys(rd, v, path, {"padding", "remove_mean", "window_bins"});
    if (v.contains("padding")) {
        const auto n = integer(rd, v["padding"], join(path, "padding"));
        if (n < 1 || n > 64) rd.fail(join(path, "padding"), "must lie in [1, 64]");
        cfg.spectrum.spectrum.padding = static_cast<int>(n);
    }
    if (v.contains("remove_mean"))
        cfg.spectrum.spectrum.remove_mean = boolean(rd, v["remove_mean"], join(path, "remove_mean"));
    if (v.contains("window_bins")) {
        const auto n = integer(rd, v["window_bins"], join(path, "window_bins"));
        if (n < 2) rd.fail(join(path, "window_bins"), "must be >= 2");
        cfg.spectrum.lorentzian.window_bins = static_cast<int>(n);
    }
}

const char* kind_key(TraceModelKind k) { return k == TraceModelKind::decay ? "decay" : "detuned"; }

json normalize(const ExperimentConfig& c) {
    json j;
    const auto& o = c.oscillator;
    j["oscillator"] = {{"ion_mass_u", o.ion_mass_u()},
                       {"trap_freq", o.trap_freq()},
                       {"wavelength", o.wavelength()},
                       {"beam_angle", o.beam_angle()}};
    const auto& s = c.sequence;
    j["sequence"] = {{"probe_phase", s.probe_phase == ProbePhase::after_return ? "after_return" : "while_displaced"},
                     {"x_d", s.protocol.x_d},
                     {"dwell_time", s.protocol.dwell_time},
                     {"hold_periods", s.protocol.hold_periods},
                     {"trigger_exact_period", s.protocol.trigger_exact_period},
                     {"nbar_th", s.nbar_th}};
    j["drive"] = {{"sideband", s.drive.sideband},
                  {"rabi0", s.drive.rabi0},
                  {"detune_off", s.drive.detune_off},
                  {"decay", s.drive.decay}};
    j["stark"] = {{"enabled", s.env.enabled},
                  {"delta_secondary", s.env.delta_secondary},
                  {"coupling_ratio", s.env.coupling_ratio},
                  {"sum_cutoff", s.env.sum_cutoff},
                  {"convention", s.env.convention == StarkConvention::sideband_indexed ? "sideband_indexed" : "as_printed"}};
    j["probe_times"] = c.probe_times;
    if (c.scan)
        j["scan"] = {{"variable", c.scan->variable == ScanVariable::dwell_time ? "dwell_time" : "x_d"},
                     {"values", c.scan->values}};
    j["shots"] = c.shots;
    j["seed"] = c.seed;
    if (c.drift.active()) j["drift"] = {{"knots", c.drift.knots}};
    if (c.fit) {
        const auto& f = *c.fit;
        json params = json::object();
        for (const auto& p : f.parameters) params[p.name] = {{"value", p.value}, {"float", p.floating}};
        j["fit"] = {{"mode", f.mode == FitMode::per_trace ? "per_trace" : "set"},
                    {"model", kind_key(f.model)},
                    {"parameters", params},
                    {"max_iterations", f.options.max_iterations},
                    {"alpha0_init", f.alpha0_init},
                    {"trap_freq_init", f.trap_freq_init},
                    {"drift_delta_rabi0", f.drift_delta_rabi0},
                    {"alpha_calibration", f.alpha_calibration}};
    }
    j["spectrum"] = {{"padding", c.spectrum.spectrum.padding},
                     {"remove_mean", c.spectrum.spectrum.remove_mean},
                     {"window_bins", c.spectrum.lorentzian.window_bins}};
    return j;
}

}  // namespace

namespace {

// Unit conversions leave last-bit noise (75 nm vs 0.075 um); hash 12 digits.
json round_floats(const json& j) {
    if (j.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", j.get<double>());
        return std::strtod(buf, nullptr);
    }
    if (j.is_array() || j.is_object()) {
        json out = j;
        for (auto& v : out) v = round_floats(v);
        return out;
    }
    return j;
}

}  // namespace

void refresh_hash(ExperimentConfig& config) {
    config.normalized = normalize(config);
    config.hash = fnv1a_hex(round_floats(config.normalized).dump());
}

ExperimentConfig parse_config(std::string_view text, std::string_view source_name) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError(std::string(source_name) + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": JSON syntax error");
    }
    const Reader rd(text, source_name);
    only_keys(rd, root, {},
              {"oscillator", "sequence", "drive", "stark", "probe_times", "scan", "shots", "seed", "drift", "fit",
               "spectrum", "output"});
    ExperimentConfig cfg;
    if (root.contains("oscillator")) parse_oscillator(rd, root["oscillator"], cfg);
    if (root.contains("sequence")) parse_sequence(rd, root["sequence"], cfg);
    if (root.contains("drive")) parse_drive(rd, root["drive"], cfg);
    if (root.contains("stark")) parse_stark(rd, root["stark"], cfg);
    if (root.contains("probe_times")) {
        cfg.probe_times = grid(rd, root["probe_times"], {"probe_times"}, QuantityKind::time);
        for (std::size_t i = 1; i < cfg.probe_times.size(); ++i)
            if (!(cfg.probe_times[i] > cfg.probe_times[i - 1])) rd.fail({"probe_times"}, "must be strictly increasing");
        if (cfg.probe_times.front() < 0.0) rd.fail({"probe_times"}, "must be non-negative");
    }
    if (root.contains("scan")) parse_scan(rd, root["scan"], cfg);
    if (root.contains("shots")) {
        cfg.shots = integer(rd, root["shots"], {"shots"});
        if (cfg.shots < 0) rd.fail({"shots"}, "must be >= 0");
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) rd.fail({"seed"}, "expected a non-negative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("drift")) {
        const auto& d = root["drift"];
        only_keys(rd, d, {"drift"}, {"knots"});
        if (!d.contains("knots") || !d["knots"].is_array()) rd.fail({"drift", "knots"}, "expected an array");
        for (std::size_t i = 0; i < d["knots"].size(); ++i) {
            const double k = number(rd, d["knots"][i], {"drift", "knots", "[" + std::to_string(i) + "]"});
            if (!(k > 0.0)) rd.fail({"drift", "knots"}, "drift factors must be positive");
            cfg.drift.knots.push_back(k);
        }
    }
    if (root.contains("fit")) parse_fit(rd, root["fit"], cfg);
    if (root.contains("spectrum")) parse_spectrum(rd, root["spectrum"], cfg);
    if (root.contains("output")) cfg.output = string(rd, root["output"], {"output"});
    try {
        cfg.sequence.validate();
    } catch (const DomainError& e) {
        rd.fail({"sequence"}, e.what());
    }
    refresh_hash(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace bangbang
