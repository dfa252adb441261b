#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "grr/cli.hpp"

namespace {

void add_common_flags(CLI::App* cmd, grr::RunConfig& config, bool with_response) {
    cmd->add_option("--data", config.data, "Input file")->required();
    if (with_response)
        cmd->add_option("--response", config.response, "Name of the response column");
    cmd->add_option("--out", config.out_dir, "Output directory (created if missing)");
    cmd->add_option("--format", config.formats, "Artifact formats: csv, json, svg");
}

void add_path_flags(CLI::App* cmd, grr::RunConfig& config, double& fixed_q, bool& has_q) {
    std::map<std::string, grr::PathKind> kinds{{"eff", grr::PathKind::efficient},
                                               {"qm", grr::PathKind::qm},
                                               {"hk", grr::PathKind::hoerl_kennard},
                                               {"uniform", grr::PathKind::uniform}};
    cmd->add_option("--path", config.path.kind, "Shrinkage path kind")
        ->transform(CLI::CheckedTransformer(kinds, CLI::ignore_case));
    cmd->add_option("--q", fixed_q, "Fix the qm path shape instead of searching")
        ->each([&has_q](const std::string&) { has_q = true; });
    cmd->add_option("--qmin", config.path.qmin, "Smallest q-shape searched");
    cmd->add_option("--qmax", config.path.qmax, "Largest q-shape searched");
    cmd->add_option("--qstep", config.path.qstep, "q-shape search step");
    cmd->add_option("--steps", config.path.grid_steps_per_unit_m,
                    "Trace grid steps per unit of extent m");
    cmd->add_flag_callback(
        "--no-standardize-y", [&config]() { config.standardize_y = false; },
        "Keep the response on its raw scale (centered only)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maximum likelihood generalized ridge regression"};
    app.require_subcommand(1);

    grr::RunConfig fit_cfg, trace_cfg, sim_cfg;
    double fit_q = 0.0, trace_q = 0.0;
    bool fit_has_q = false, trace_has_q = false;
    std::uint64_t seed = 0;
    bool has_seed = false;

    CLI::App* fit = app.add_subcommand("fit", "Fit OLS, ML components and the q-shape search");
    fit_cfg.command = grr::Command::fit;
    add_common_flags(fit, fit_cfg, true);
    add_path_flags(fit, fit_cfg, fit_q, fit_has_q);

    CLI::App* trace = app.add_subcommand("trace", "Evaluate a shrinkage path and emit traces");
    trace_cfg.command = grr::Command::trace;
    add_common_flags(trace, trace_cfg, true);
    add_path_flags(trace, trace_cfg, trace_q, trace_has_q);

    CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo risk comparison vs OLS");
    sim_cfg.command = grr::Command::simulate;
    add_common_flags(sim, sim_cfg, false);
    sim->add_option("--seed", seed, "Random stream seed (overrides the scenario file)")
        ->each([&has_seed](const std::string&) { has_seed = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        grr::RunConfig* cfg = nullptr;
        if (fit->parsed()) {
            if (fit_has_q) fit_cfg.path.fixed_q = fit_q;
            cfg = &fit_cfg;
        } else if (trace->parsed()) {
            if (trace_has_q) trace_cfg.path.fixed_q = trace_q;
            cfg = &trace_cfg;
        } else {
            if (has_seed) sim_cfg.seed = seed;
            cfg = &sim_cfg;
        }
        if (cfg->formats.empty()) {
            if (cfg->command == grr::Command::fit) cfg->formats = {"json"};
            else if (cfg->command == grr::Command::trace) cfg->formats = {"csv", "json", "svg"};
            else cfg->formats = {"csv", "json"};
        }
        return grr::run(*cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
