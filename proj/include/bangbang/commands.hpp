#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bangbang/config.hpp"
#include "bangbang/dataset.hpp"

namespace bangbang {

/// Dataset from the config: one trace, or one trace per scan value
/// (dwell_scan / displacement_scan).
Dataset simulate_dataset(const ExperimentConfig& config);

/// Fit report for a dataset, driven by config.fit. `all_converged` is false
/// when any unit of work (trace, scan point, sideband set) failed.
nlohmann::json fit_report(const ExperimentConfig& config, const Dataset& data, bool& all_converged);

/// Theory scans: "mean_rabi" over x_d (mean_rabi_curve, minima in meta) or
/// "residual_alpha" over dwell time (curve).
Dataset scan_dataset(const ExperimentConfig& config, const std::string& quantity);

/// DFT of a trace (spectrum, Lorentzian fit in meta), or Lorentzian centers
/// of every trace of a displacement scan (rabi_centers).
Dataset spectrum_dataset(const ExperimentConfig& config, const Dataset& data);

/// Human-readable lines for a fit report.
std::string summarize_report(const nlohmann::json& report);

const std::vector<std::string>& figure_ids();

/// Synthetic-experiment configuration behind a figure, with paper
/// parameters: "fig2a" (dwell scan, s = 1), "fig2b" (sub-ns scan around one
/// period), "fig3a" (displacement scan for sideband s, Table 2 drive).
ExperimentConfig figure_config(const std::string& figure, int sideband = 0);

/// Drive fitted per sideband in the light-matter experiment (Table 2).
SidebandDrive table2_drive(int sideband);

/// Writes the plot-data files for one figure into out_dir and returns the
/// list of files written. Throws ConfigError for an unknown id.
std::vector<std::string> reproduce_figure(const std::string& figure, const std::string& out_dir, std::uint64_t seed,
                                          std::string& summary);

}  // namespace bangbang
