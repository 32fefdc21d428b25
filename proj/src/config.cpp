#include "skewlin/config.hpp"

#include <fstream>

#include "skewlin/errors.hpp"
#include "skewlin/rng.hpp"

namespace skewlin {

namespace {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    if (j.contains("base")) {
        const auto& b = j.at("base");
        read_if(b, "dim", c.dim);
        if (b.contains("matrix")) c.matrix = b.at("matrix").get<std::vector<std::int64_t>>();
    }
    if (j.contains("family")) {
        const auto& f = j.at("family");
        read_if(f, "type", c.family.type);
        read_if(f, "q0", c.family.quad.q0);
        read_if(f, "q1", c.family.quad.q1);
        read_if(f, "c0", c.family.quad.c0);
        read_if(f, "c1", c.family.quad.c1);
        read_if(f, "lambda", c.family.mobius.lambda);
        read_if(f, "m", c.family.mobius.m);
        read_if(f, "f", c.family.custom_f);
        read_if(f, "beta", c.family.beta);
        read_if(f, "k", c.family.smoothness_k);
    }
    if (j.contains("globalize") && !j.at("globalize").is_null()) {
        GlobalizeBlock g;
        const auto& gj = j.at("globalize");
        if (gj.contains("center")) g.center = gj.at("center").get<std::vector<double>>();
        read_if(gj, "r_inner", g.r_inner);
        read_if(gj, "r_outer", g.r_outer);
        c.globalize = g;
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        if (s.contains("epsilon")) {
            if (s.at("epsilon").is_string() && s.at("epsilon").get<std::string>() == "auto")
                c.epsilon_auto = true;
            else
                c.solver.epsilon = s.at("epsilon").get<double>();
        }
        read_if(s, "alpha", c.solver.alpha);
        read_if(s, "truncation_N", c.solver.truncation_N);
        read_if(s, "tail_tol", c.solver.tail_tol);
        read_if(s, "fixed_point_tol", c.solver.fixed_point_tol);
        read_if(s, "max_iterations", c.solver.max_iterations);
        read_if(s, "n_b", c.solver.n_b);
        read_if(s, "n_x", c.solver.n_x);
        read_if(s, "trace_pairs", c.solver.trace_pairs);
        if (s.contains("trace_scales"))
            c.solver.trace_scales = s.at("trace_scales").get<std::vector<double>>();
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        if (a.contains("scales")) c.analysis.scales = a.at("scales").get<std::vector<double>>();
        read_if(a, "n_pairs", c.analysis.n_pairs);
        read_if(a, "depth", c.analysis.depth);
        read_if(a, "oracle_samples", c.analysis.oracle_samples);
        read_if(a, "n_random_residual", c.analysis.n_random_residual);
    }
    read_if(j, "output_dir", c.output_dir);
    read_if(j, "seed", c.seed);
    c.solver.seed = rng_key(c.seed, 0x501e); // derived stream for solver-side sampling
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    RunConfig c = from_json(j);
    c.validate_shape();
    return c;
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["base"] = {{"dim", dim}, {"matrix", matrix}};
    nlohmann::ordered_json f;
    f["type"] = family.type;
    if (family.type == "quadratic") {
        f["q0"] = family.quad.q0;
        f["q1"] = family.quad.q1;
        f["c0"] = family.quad.c0;
        f["c1"] = family.quad.c1;
    } else if (family.type == "mobius") {
        f["lambda"] = family.mobius.lambda;
        f["m"] = family.mobius.m;
    } else {
        f["f"] = family.custom_f;
    }
    f["beta"] = family.beta;
    f["k"] = family.smoothness_k;
    j["family"] = f;
    if (globalize) {
        j["globalize"] = {{"center", globalize->center},
                          {"r_inner", globalize->r_inner},
                          {"r_outer", globalize->r_outer}};
    }
    nlohmann::ordered_json s;
    if (epsilon_auto)
        s["epsilon"] = "auto";
    else
        s["epsilon"] = solver.epsilon;
    s["alpha"] = solver.alpha;
    s["truncation_N"] = solver.truncation_N;
    s["tail_tol"] = solver.tail_tol;
    s["fixed_point_tol"] = solver.fixed_point_tol;
    s["max_iterations"] = solver.max_iterations;
    s["n_b"] = solver.n_b;
    s["n_x"] = solver.n_x;
    s["trace_pairs"] = solver.trace_pairs;
    s["trace_scales"] = solver.trace_scales;
    j["solver"] = s;
    j["analysis"] = {{"scales", analysis.scales},
                     {"n_pairs", analysis.n_pairs},
                     {"depth", analysis.depth},
                     {"oracle_samples", analysis.oracle_samples},
                     {"n_random_residual", analysis.n_random_residual}};
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    return j;
}

void RunConfig::validate_shape() const {
    if (dim < 1 || dim > kMaxDim) throw ValidationError("base.dim outside [1,6]");
    if (matrix.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
        throw ValidationError("base.matrix must have dim*dim entries (row-major)");
    if (family.type != "quadratic" && family.type != "mobius" && family.type != "custom")
        throw ValidationError("family.type must be quadratic, mobius or custom");
    if (family.type == "custom" && family.custom_f.empty())
        throw ValidationError("custom family needs an expression in family.f");
    if (!(family.beta > 0.0 && family.beta <= 1.0))
        throw ValidationError("family.beta must lie in (0,1]");
    if (family.smoothness_k < 2) throw ValidationError("family.k must be >= 2");
    if (!epsilon_auto && !(solver.epsilon > 0.0 && solver.epsilon <= 1.0))
        throw ValidationError("solver.epsilon must lie in (0,1]");
    if (solver.alpha < 0.0 || solver.alpha >= 1.0)
        throw ValidationError("solver.alpha must lie in [0,1); 0 means derive the default");
    if (solver.tail_tol <= 0.0 && solver.truncation_N <= 0)
        throw ValidationError("need solver.tail_tol > 0 or an explicit solver.truncation_N");
    if (solver.fixed_point_tol <= 0.0) throw ValidationError("solver.fixed_point_tol must be > 0");
    if (solver.n_b < 2 || solver.n_x < 2)
        throw ValidationError("solver grid sizes must be at least 2");
    if (globalize) {
        if (!globalize->center.empty() &&
            globalize->center.size() != static_cast<std::size_t>(dim))
            throw ValidationError("globalize.center must have dim coordinates");
        if (!(0.0 < globalize->r_inner && globalize->r_inner < globalize->r_outer &&
              globalize->r_outer < 0.5))
            throw ValidationError("globalize radii must satisfy 0 < r_inner < r_outer < 0.5");
    }
}

ToralAutomorphism RunConfig::make_base() const {
    return ToralAutomorphism(matrix, dim);
}

FiberMapFamily RunConfig::make_family() const {
    FiberMapFamily fam;
    if (family.type == "quadratic")
        fam = make_quadratic_family(family.quad);
    else if (family.type == "mobius")
        fam = make_mobius_family(family.mobius);
    else
        fam = make_custom_family(family.custom_f, dim, family.beta, family.smoothness_k);
    fam.holder_beta = family.beta;
    return fam;
}

}  // namespace skewlin
