#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "skewlin/analysis.hpp"
#include "skewlin/config.hpp"

namespace skewlin {

struct PipelineOptions {
    std::string subcommand = "run";  // linearize | verify | holder | constants | globalize-only | run
    bool strict = false;             // bound-check failures become exit code 4
    bool no_timestamp = false;
    std::filesystem::path out_dir_override;
};

struct PipelineResult {
    int exit_code = 0;
    nlohmann::ordered_json report;
    std::filesystem::path report_path;
};

/// Orchestrates (globalize ->) bounds -> solve -> verify -> analyze per the
/// chosen subcommand and writes report.json plus the data files into the
/// output directory. Throws ValidationError / ModelError / DivergenceError;
/// the CLI maps those to exit codes 2 / 2 / 3.
PipelineResult run_pipeline(const RunConfig& cfg, const PipelineOptions& opt);

/// Auto-epsilon search per the solver defaults: start at 0.1 and halve until
/// the first three contraction estimates stay below 0.9.
double find_contracting_epsilon(const SkewProduct& f, SolverConfig cfg, double start = 0.1,
                                int max_halvings = 10);

}  // namespace skewlin
