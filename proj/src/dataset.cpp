#include "bangbang/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "bangbang/error.hpp"

namespace bangbang {

namespace {

const std::map<std::string, DatasetSchema, std::less<>>& schemas() {
    static const std::map<std::string, DatasetSchema, std::less<>> table = {
        {"trace", {{"t_p", "p_down", "sigma", "shots"}, {"s", "1", "1", "1"}}},
        {"dwell_scan", {{"dwell_time", "t_p", "p_down", "sigma", "shots"}, {"s", "s", "1", "1", "1"}}},
        {"displacement_scan",
         {{"x_d", "sideband", "t_p", "p_down", "sigma", "shots"}, {"m", "1", "s", "1", "1", "1"}}},
        {"alpha_scan", {{"dwell_time", "alpha", "sigma", "converged"}, {"s", "1", "1", "1"}}},
        {"displacement_alpha", {{"x_d", "alpha", "sigma", "converged"}, {"m", "1", "1", "1"}}},
        {"spectrum", {{"omega", "magnitude", "sigma"}, {"rad/s", "1", "1"}}},
        {"mean_rabi_curve", {{"x_d", "sideband", "mean_rabi"}, {"m", "1", "rad/s"}}},
        {"rabi_centers",
         {{"x_d", "sideband", "center", "sigma_center", "width", "mean_rabi"},
          {"m", "1", "rad/s", "rad/s", "rad/s", "rad/s"}}},
        {"curve", {}},
    };
    return table;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += items[i];
    }
    return out;
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::size_t Dataset::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ConfigError("dataset of kind '" + kind + "' has no column '" + std::string(name) + "'");
}

bool Dataset::has_column(std::string_view name) const {
    for (const auto& c : columns)
        if (c == name) return true;
    return false;
}

std::vector<double> Dataset::column(std::string_view name) const {
    const auto k = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
}

DatasetSchema dataset_schema(std::string_view kind) {
    const auto it = schemas().find(kind);
    if (it == schemas().end()) throw ConfigError("unknown dataset kind '" + std::string(kind) + "'");
    return it->second;
}

Dataset make_dataset(std::string_view kind) {
    Dataset d;
    d.kind = std::string(kind);
    const auto schema = dataset_schema(kind);
    d.columns = schema.columns;
    d.units = schema.units;
    return d;
}

void validate_dataset(const Dataset& data) {
    const auto schema = dataset_schema(data.kind);
    if (data.columns.empty()) throw ConfigError("dataset has no columns");
    if (data.units.size() != data.columns.size()) throw ConfigError("dataset units do not match its columns");
    if (!schema.columns.empty() && (schema.columns != data.columns || schema.units != data.units))
        throw ConfigError("dataset of kind '" + data.kind + "' must have columns " + join(schema.columns) +
                          " with units " + join(schema.units));
    for (const auto& c : data.columns)
        if (c.empty() || c.find_first_of(",#\n") != std::string::npos) throw ConfigError("bad column name '" + c + "'");
    for (std::size_t i = 0; i < data.rows.size(); ++i)
        if (data.rows[i].size() != data.columns.size())
            throw ConfigError("dataset row " + std::to_string(i) + " has " + std::to_string(data.rows[i].size()) +
                              " values, expected " + std::to_string(data.columns.size()));
    if (!data.meta.is_object()) throw ConfigError("dataset meta must be a JSON object");
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw NumericalError("cannot format number");
    return std::string(buf, ptr);
}

std::string format_dataset(const Dataset& data) {
    validate_dataset(data);
    std::string out = "# bangbang dataset\n";
    out += "# kind: " + data.kind + "\n";
    out += "# meta: " + data.meta.dump() + "\n";
    out += "# units: " + join(data.units) + "\n";
    out += join(data.columns) + "\n";
    for (const auto& row : data.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

Dataset parse_dataset(std::string_view text, std::string_view source_name) {
    const std::string src(source_name);
    std::size_t pos = 0, line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) throw ConfigError(src + ":" + std::to_string(line_no + 1) + ": missing final newline");
        line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        return true;
    };
    auto fail = [&](const std::string& msg) -> void {
        throw ConfigError(src + ":" + std::to_string(line_no) + ": " + msg);
    };
    auto header = [&](std::string_view prefix) {
        std::string_view line;
        if (!next_line(line)) fail("unexpected end of file, expected '" + std::string(prefix) + "'");
        if (line.substr(0, prefix.size()) != prefix) fail("expected '" + std::string(prefix) + "'");
        return line.substr(prefix.size());
    };
    Dataset d;
    std::string_view line;
    if (!next_line(line) || line != "# bangbang dataset") {
        if (line_no == 0) line_no = 1;
        fail("not a bangbang dataset");
    }
    d.kind = std::string(header("# kind: "));
    try {
        const auto meta = header("# meta: ");
        d.meta = nlohmann::json::parse(meta.begin(), meta.end());
    } catch (const nlohmann::json::parse_error&) {
        fail("meta is not valid JSON");
    }
    d.units = split(header("# units: "));
    if (!next_line(line)) fail("missing column line");
    d.columns = split(line);
    while (next_line(line)) {
        const auto fields = split(line);
        if (fields.size() != d.columns.size())
            fail("expected " + std::to_string(d.columns.size()) + " values, found " + std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto& f = fields[i];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[i]);
            if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
                fail("cannot read '" + f + "' in column " + d.columns[i]);
        }
        d.rows.push_back(std::move(row));
    }
    try {
        validate_dataset(d);
    } catch (const ConfigError& e) {
        throw ConfigError(src + ": " + e.what());
    }
    return d;
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_dataset(ss.str(), path);
}

void write_file_atomic(const std::string& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw ConfigError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot move output into place at '" + path + "'");
    }
}

void write_dataset(const std::string& path, const Dataset& data) { write_file_atomic(path, format_dataset(data)); }

}  // namespace bangbang
