#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewlin/fiber.hpp"
#include "skewlin/solver.hpp"
#include "skewlin/torus.hpp"

namespace skewlin {

struct GlobalizeBlock {
    std::vector<double> center;  // defaults to the origin
    double r_inner = 0.1;
    double r_outer = 0.25;
};

struct AnalysisBlock {
    std::vector<double> scales = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    int n_pairs = 10000;
    int depth = 10;
    int oracle_samples = 65;
    int n_random_residual = 10000;
};

struct FamilyBlock {
    std::string type = "quadratic";  // quadratic | mobius | custom
    QuadraticFamilyParams quad;
    MobiusFamilyParams mobius;
    std::string custom_f;
    double beta = 1.0;
    int smoothness_k = 4;
};

/// Everything a batch run needs, read from one JSON file. `to_json` emits the
/// effective configuration (all defaults applied); feeding that back in
/// reproduces the run.
struct RunConfig {
    std::vector<std::int64_t> matrix = {2, 1, 1, 1};
    int dim = 2;
    FamilyBlock family;
    std::optional<GlobalizeBlock> globalize;
    SolverConfig solver;
    bool epsilon_auto = false;
    AnalysisBlock analysis;
    std::string output_dir = "out";
    std::uint64_t seed = 20270101;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;

    /// Structural validation that does not require building the model:
    /// matrix shape, family type, positive tolerances, beta in (0,1].
    void validate_shape() const;

    ToralAutomorphism make_base() const;
    FiberMapFamily make_family() const;
};

}  // namespace skewlin
