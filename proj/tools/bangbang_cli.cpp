#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bangbang/bangbang.h"

namespace {

int report(bb_status status) {
    std::cout << bb_last_summary();
    if (status != BB_OK) std::cerr << "error (" << bb_status_name(status) << "): " << bb_last_error() << "\n";
    return bb_exit_code(status);
}

const char* opt_path(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Displaced-state sideband spectroscopy simulator and analysis tool"};
    app.set_version_flag("--version", std::string(bb_version()));
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "Override the config seed (default: config `seed`, or 1 for reproduce)");

    std::string config, data, output, quantity = "mean_rabi", figure, out_dir = ".";
    std::string min_probe = "1.4 us";
    int padding = 0, window_bins = 0;
    bool remove_mean = false, keep_mean = false;

    auto* simulate = app.add_subcommand("simulate", "Simulate a trace or scan from a config");
    simulate->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    simulate->add_option("-o,--output", output, "Dataset path (default: config `output`)");
    simulate->add_option("--min-probe-time", min_probe, "Drop probe times below this (\"0 us\" keeps all)")
        ->capture_default_str();

    auto* fit = app.add_subcommand("fit", "Fit a dataset with the config's fit directives");
    fit->add_option("-c,--config", config, "Experiment config with a `fit` block")->required()->check(CLI::ExistingFile);
    fit->add_option("-d,--data", data, "Dataset to fit")->required()->check(CLI::ExistingFile);
    fit->add_option("-o,--output", output, "JSON report path (default: config `output`)");

    auto* scan = app.add_subcommand("scan", "Theory curves: mean Rabi frequency over x_d or residual |alpha| over dwell");
    scan->add_option("-c,--config", config, "Experiment config with a `scan` block")->required()->check(CLI::ExistingFile);
    scan->add_option("-q,--quantity", quantity, "mean_rabi | residual_alpha")
        ->check(CLI::IsMember({"mean_rabi", "residual_alpha"}))
        ->capture_default_str();
    scan->add_option("-o,--output", output, "Dataset path (default: config `output`)");

    auto* spectrum = app.add_subcommand("spectrum", "DFT and Lorentzian peak of a trace, or peak centers of a scan");
    spectrum->add_option("-c,--config", config, "Experiment config (required for displacement scans)")
        ->check(CLI::ExistingFile);
    spectrum->add_option("-d,--data", data, "trace or displacement_scan dataset")->required()->check(CLI::ExistingFile);
    spectrum->add_option("-o,--output", output, "Dataset path (default: config `output`)");
    spectrum->add_option("--padding", padding, "Zero-padding factor (default: config, else 1)")->check(CLI::Range(1, 64));
    spectrum->add_option("--window-bins", window_bins, "Lorentzian half-window in bins (default: config, else 10)")
        ->check(CLI::Range(2, 100000));
    auto* rm = spectrum->add_flag("--remove-mean", remove_mean, "Subtract the record mean before the DFT");
    spectrum->add_flag("--keep-mean", keep_mean, "Keep the record mean")->excludes(rm);

    auto* reproduce = app.add_subcommand("reproduce", "Write plot data for a figure");
    reproduce->add_option("figure", figure, "fig2a | fig2b | fig2c | fig3a | fig3b | fig3c")
        ->required()
        ->check(CLI::IsMember({"fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c"}));
    reproduce->add_option("-o,--out-dir", out_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    bb_run_options run{};
    if (seed) {
        run.has_seed = 1;
        run.seed = *seed;
    }

    if (*simulate) {
        if (bb_parse_quantity(min_probe.c_str(), BB_TIME, &run.min_probe_time) != BB_OK) {
            std::cerr << "error: --min-probe-time: " << bb_last_error() << "\n";
            return 1;
        }
        return report(bb_cmd_simulate(config.c_str(), opt_path(output), &run));
    }
    if (*fit) return report(bb_cmd_fit(config.c_str(), data.c_str(), opt_path(output), &run));
    if (*scan) return report(bb_cmd_scan(config.c_str(), quantity.c_str(), opt_path(output), &run));
    if (*spectrum) {
        bb_spectrum_options so{padding, remove_mean ? 1 : (keep_mean ? 0 : -1), window_bins};
        return report(bb_cmd_spectrum(opt_path(config), data.c_str(), opt_path(output), &so));
    }
    return report(bb_cmd_reproduce(figure.c_str(), out_dir.c_str(), &run));
}
