#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bangbang {

inline constexpr const char* kToolVersion = "0.1.0";

/// Columnar text dataset:
///
///   # bangbang dataset
///   # kind: trace
///   # meta: {"config_hash":"...","seed":1,"tool_version":"0.1.0"}
///   # units: s,1,1,1
///   t_p,p_down,sigma,shots
///   1.4e-06,0.987,0.0035,1000
///
/// Numbers use the shortest round-trip decimal form, so write -> read ->
/// write is byte-identical.
struct Dataset {
    std::string kind;
    nlohmann::json meta = nlohmann::json::object();
    std::vector<std::string> columns;
    std::vector<std::string> units;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(std::string_view name) const;
    std::vector<double> column(std::string_view name) const;
    bool has_column(std::string_view name) const;
};

/// Declared (columns, units) for a fixed-schema kind; empty for "curve",
/// which accepts any columns.
struct DatasetSchema {
    std::vector<std::string> columns;
    std::vector<std::string> units;
};
DatasetSchema dataset_schema(std::string_view kind);

/// Empty dataset of a fixed-schema kind.
Dataset make_dataset(std::string_view kind);

void validate_dataset(const Dataset& data);
std::string format_dataset(const Dataset& data);
Dataset parse_dataset(std::string_view text, std::string_view source_name = "dataset");
Dataset read_dataset(const std::string& path);

/// Writes through a temporary file in the same directory and renames.
void write_file_atomic(const std::string& path, std::string_view content);
void write_dataset(const std::string& path, const Dataset& data);

std::string format_number(double value);

}  // namespace bangbang
