// Batch front-end: reads one JSON config, runs the requested stage of the
// linearization pipeline, writes report.json and the data files.
//
//   skewlin run <config.json>            full pipeline
//   skewlin linearize <config.json>      solve only (h.csv, h.bin)
//   skewlin verify <config.json>         solve + conjugacy residual (+ oracle)
//   skewlin holder <config.json>         solve + Holder exponent estimate
//   skewlin constants <config.json>      bounds and operator constants only
//   skewlin globalize-only <config.json> cut-function surgery and checks only
//
// Exit codes: 0 ok, 2 validation failure, 3 solver divergence,
// 4 bound-check failure under --strict.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

#include "skewlin/errors.hpp"
#include "skewlin/kernels.hpp"
#include "skewlin/pipeline.hpp"

namespace {

void emit_diagnostic(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json d;
    d["error"] = kind;
    d["message"] = message;
    std::cerr << d.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fiberwise linearization of boundary-preserving skew products"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    bool strict = false;
    bool no_timestamp = false;
    bool flag_globalize = false;
    double r_inner = 0.1, r_outer = 0.25;
    std::vector<double> center;
    double epsilon = 0, alpha = 0, tail_tol = 0, fp_tol = 0;
    int max_iter = 0, nb = 0, nx = 0;

    const char* names[] = {"run", "linearize", "verify", "holder", "constants", "globalize-only"};
    for (const char* n : names) {
        CLI::App* sub = app.add_subcommand(n);
        sub->add_option("config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--threads", threads, "OpenMP worker count (0 = runtime default)");
        sub->add_flag("--strict", strict, "bound-check failures exit with code 4");
        sub->add_flag("--no-timestamp", no_timestamp, "omit the timestamp from report.json");
        sub->add_flag("--globalize", flag_globalize, "force a globalization block");
        sub->add_option("--r-inner", r_inner, "globalization inner radius");
        sub->add_option("--r-outer", r_outer, "globalization outer radius");
        sub->add_option("--center", center, "globalization center coordinates");
        sub->add_option("--epsilon", epsilon, "override solver.epsilon");
        sub->add_option("--alpha", alpha, "override solver.alpha");
        sub->add_option("--tail-tol", tail_tol, "override solver.tail_tol");
        sub->add_option("--fp-tol", fp_tol, "override solver.fixed_point_tol");
        sub->add_option("--max-iter", max_iter, "override solver.max_iterations");
        sub->add_option("--nb", nb, "override solver.n_b");
        sub->add_option("--nx", nx, "override solver.n_x");
    }

    CLI11_PARSE(app, argc, argv);

    if (threads > 0) skewlin::kernels::set_thread_count(threads);

    try {
        skewlin::RunConfig cfg = skewlin::RunConfig::load(config_path);
        if (flag_globalize) {
            skewlin::GlobalizeBlock g;
            g.center = center;
            g.r_inner = r_inner;
            g.r_outer = r_outer;
            cfg.globalize = g;
        }
        if (epsilon > 0) {
            cfg.solver.epsilon = epsilon;
            cfg.epsilon_auto = false;
        }
        if (alpha > 0) cfg.solver.alpha = alpha;
        if (tail_tol > 0) cfg.solver.tail_tol = tail_tol;
        if (fp_tol > 0) cfg.solver.fixed_point_tol = fp_tol;
        if (max_iter > 0) cfg.solver.max_iterations = max_iter;
        if (nb > 0) cfg.solver.n_b = nb;
        if (nx > 0) cfg.solver.n_x = nx;

        skewlin::PipelineOptions opt;
        opt.subcommand = app.get_subcommands().front()->get_name();
        opt.strict = strict;
        opt.no_timestamp = no_timestamp;
        if (!out_dir.empty()) opt.out_dir_override = out_dir;

        const skewlin::PipelineResult res = skewlin::run_pipeline(cfg, opt);
        std::printf("report: %s (exit %d)\n", res.report_path.string().c_str(), res.exit_code);
        return res.exit_code;
    } catch (const skewlin::DivergenceError& e) {
        emit_diagnostic("divergence", e.what());
        return 3;
    } catch (const skewlin::ValidationError& e) {
        emit_diagnostic("validation", e.what());
        return 2;
    } catch (const skewlin::ModelError& e) {
        emit_diagnostic("model", e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_diagnostic("internal", e.what());
        return 1;
    }
}
