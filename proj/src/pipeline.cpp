#include "skewlin/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "skewlin/errors.hpp"
#include "skewlin/globalize.hpp"
#include "skewlin/rng.hpp"

namespace skewlin {

namespace {

nlohmann::ordered_json bounds_json(const MultiplierBounds& mb) {
    return {{"q", mb.q},
            {"D", mb.D},
            {"n_samples", mb.n_samples},
            {"globalization_required", mb.globalization_required}};
}

nlohmann::ordered_json solver_report_json(const SolverReport& r) {
    nlohmann::ordered_json j;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["final_delta"] = r.final_delta;
    j["contraction_estimates"] = r.contraction_estimates;
    j["functional_residual"] = r.functional_residual;
    j["homological_residual"] = r.homological_residual;
    j["in_space_n"] = r.in_space_n;
    j["space_n"] = {{"a_c", r.n_params.a_c},
                    {"a_lip", r.n_params.a_lip},
                    {"a_alpha", r.n_params.a_alpha}};
    j["q"] = r.q;
    j["D"] = r.D;
    j["mu"] = r.mu;
    j["alpha"] = r.alpha;
    j["theta"] = r.theta;
    j["epsilon"] = r.epsilon;
    j["q_norm"] = r.q_norm;
    j["truncation_N"] = r.truncation_N;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

void write_csv_line(std::ofstream& out, std::span<const double> vals) {
    char buf[64];
    for (std::size_t i = 0; i < vals.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
        out << (i ? "," : "") << buf;
    }
    out << "\n";
}

}  // namespace

double find_contracting_epsilon(const SkewProduct& f, SolverConfig cfg, double start,
                                int max_halvings) {
    double eps = start;
    for (int attempt = 0; attempt <= max_halvings; ++attempt) {
        SolverConfig probe = cfg;
        probe.epsilon = eps;
        probe.max_iterations = 4;
        probe.fixed_point_tol = 0.0;  // force the full four probing iterations
        try {
            auto [h, rep] = solve_conjugacy(f, probe);
            bool ok = rep.contraction_estimates.size() >= 3;
            for (std::size_t i = 0; ok && i < 3; ++i)
                ok = rep.contraction_estimates[i] < 0.9;
            if (ok || rep.final_delta == 0.0) return eps;
        } catch (const DivergenceError&) {
            // fall through to the next halving
        } catch (const ModelError&) {
            // shift escaped the fiber at this epsilon; halve as well
        }
        eps *= 0.5;
    }
    throw DivergenceError("no contracting epsilon found down to " + std::to_string(eps));
}

PipelineResult run_pipeline(const RunConfig& cfg_in, const PipelineOptions& opt) {
    RunConfig cfg = cfg_in;
    cfg.validate_shape();
    if (!opt.out_dir_override.empty()) cfg.output_dir = opt.out_dir_override.string();

    const std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir);

    PipelineResult res;
    nlohmann::ordered_json& rep = res.report;
    rep["tool"] = "skewlin";
    rep["subcommand"] = opt.subcommand;

    const ToralAutomorphism base = cfg.make_base();
    FiberMapFamily fam = cfg.make_family();
    validate_family(fam, cfg.dim, 200, rng_key(cfg.seed, 0xfa11));
    SkewProduct f{base, fam};

    if (cfg.globalize) {
        std::vector<double> cc = cfg.globalize->center;
        cc.resize(static_cast<std::size_t>(cfg.dim), 0.0);
        const TorusPoint center{std::span<const double>(cc.data(), cc.size())};
        const CutFunction cut = build_cut(center, cfg.globalize->r_inner, cfg.globalize->r_outer);
        f = globalize(f, cut);
        rep["globalize"] = {{"center", cc},
                            {"r_inner", cut.r_inner},
                            {"r_outer", cut.r_outer},
                            {"applied", true}};
    }

    const LinearizedSkewProduct lin = LinearizedSkewProduct::from(f);
    const MultiplierBounds mb = estimate_bounds_safe(lin, cfg.solver.n_b);
    rep["bounds"] = bounds_json(mb);
    rep["bounds"]["narrow_band"] = narrow_band_check(mb);
    if (mb.globalization_required)
        throw ValidationError("globalization required: sup lambda = " + std::to_string(mb.q) +
                              " >= 1 and no globalization block was given");

    const double mu = base.spectral_radius();
    const AlphaTheta at = AlphaTheta::make(fam.holder_beta, mu, mb.q, mb.D, cfg.solver.alpha);
    rep["alpha_theta"] = {{"beta", at.beta},   {"mu", at.mu},     {"q", at.q},
                          {"D", at.D},         {"alpha_max", at.alpha_max},
                          {"alpha", at.alpha}, {"theta", at.theta}};

    // Closed-form constants (with the 1/D readings) plus measured Holder data.
    TheoryConstants tc = measure_constants(f, at, cfg.analysis.n_pairs / 4 + 1,
                                           rng_key(cfg.seed, 0xc075));
    rep["constants"] = {{"B", tc.B},
                        {"L_C", tc.L_C},
                        {"L_alpha", tc.L_alpha},
                        {"L_Lip", tc.L_Lip},
                        {"C_lambda", tc.C_lambda},
                        {"C_Q", tc.C_Q},
                        {"Lip_Q", tc.Lip_Q},
                        {"L_c_norm_bound", 1.0 / (mb.D * (1.0 - mb.q))}};

    nlohmann::ordered_json outputs = nlohmann::ordered_json::object();

    const bool want_solve = opt.subcommand != "constants" && opt.subcommand != "globalize-only";
    if (want_solve) {
        SolverConfig sc = cfg.solver;
        sc.alpha = at.alpha;
        if (cfg.epsilon_auto) sc.epsilon = find_contracting_epsilon(f, sc);
        auto [h, srep] = solve_conjugacy(f, sc);
        rep["solver"] = solver_report_json(srep);

        const Conjugacy H = assemble_H(h);

        h.write_csv(out_dir / "h.csv");
        h.write_binary(out_dir / "h.bin", out_dir / "h.meta.json");
        outputs["h_csv"] = (out_dir / "h.csv").string();
        outputs["h_bin"] = (out_dir / "h.bin").string();
        outputs["h_meta"] = (out_dir / "h.meta.json").string();

        if (opt.subcommand == "verify" || opt.subcommand == "run") {
            nlohmann::ordered_json ver;
            ver["conjugacy_residual"] = conjugacy_residual(
                f, [&H](const TorusPoint& b, double x) { return H.fiber(b, x); }, sc.n_b, sc.n_x,
                sc.epsilon, cfg.analysis.n_random_residual, rng_key(cfg.seed, 0x0e51d));
            if (!fam.depends_on_base) {
                const TorusPoint b0 = TorusPoint::zero(cfg.dim);
                const double lam0 = lin.multiplier(b0);
                auto f1d = [&](double x) { return fam.eval(b0, x); };
                double worst = 0.0;
                const int ns = cfg.analysis.oracle_samples;
                for (int i = 0; i < ns; ++i) {
                    const double x = sc.epsilon * i / (ns - 1);
                    worst = std::max(worst,
                                     std::fabs(H.fiber(b0, x) - koenigs_oracle(f1d, lam0, x)));
                }
                ver["oracle_error"] = worst;
            }
            rep["verification"] = ver;
        }

        if (opt.subcommand == "holder" || opt.subcommand == "run") {
            nlohmann::ordered_json hj;
            try {
                const HolderEstimate he =
                    estimate_holder(h, at, cfg.analysis.scales, cfg.analysis.n_pairs,
                                    rng_key(cfg.seed, 0x401de5));
                hj["exact_in_b"] = he.exact_in_b;
                if (he.exact_in_b) {
                    hj["note"] = "exact in b";
                } else {
                    hj["alpha_hat"] = he.alpha_hat;
                }
                nlohmann::ordered_json table = nlohmann::ordered_json::array();
                std::ofstream csv(out_dir / "holder_table.csv");
                csv << "scale,max_diff,max_ratio\n";
                for (const auto& row : he.table) {
                    table.push_back({{"scale", row.scale},
                                     {"max_diff", row.max_diff},
                                     {"max_ratio", row.max_ratio}});
                    write_csv_line(csv, std::array<double, 3>{row.scale, row.max_diff,
                                                              row.max_ratio});
                }
                hj["table"] = table;
                outputs["holder_table"] = (out_dir / "holder_table.csv").string();
            } catch (const ValidationError& e) {
                hj["error"] = e.what();
            }
            rep["holder"] = hj;
        }

        if (opt.subcommand == "run") {
            BoundCheckOptions bo;
            bo.depth = cfg.analysis.depth;
            bo.n_pairs = cfg.analysis.n_pairs;
            bo.scales = cfg.analysis.scales;
            bo.seed = rng_key(cfg.seed, 0xb0b0);
            bo.epsilon = sc.epsilon;
            const std::vector<BoundCheck> checks = check_bounds(f, at, bo);
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            std::ofstream csv(out_dir / "bounds.csv");
            csv << "name,n,theoretical,measured,slack,pass,as_printed\n";
            bool all_pass = true;
            char buf[64];
            for (const BoundCheck& b : checks) {
                rows.push_back({{"name", b.name},
                                {"n", b.n},
                                {"theoretical", b.theoretical},
                                {"measured", b.measured},
                                {"slack", b.slack},
                                {"pass", b.pass},
                                {"as_printed", b.as_printed}});
                csv << b.name << "," << b.n << ",";
                std::snprintf(buf, sizeof buf, "%.17g", b.theoretical);
                csv << buf << ",";
                std::snprintf(buf, sizeof buf, "%.17g", b.measured);
                csv << buf << ",";
                std::snprintf(buf, sizeof buf, "%.17g", b.slack);
                csv << buf << "," << (b.pass ? 1 : 0) << ",";
                std::snprintf(buf, sizeof buf, "%.17g", b.as_printed);
                csv << buf << "\n";
                all_pass = all_pass && b.pass;
            }
            rep["bound_checks"] = rows;
            rep["bound_checks_pass"] = all_pass;
            outputs["bounds_csv"] = (out_dir / "bounds.csv").string();
            if (!all_pass && opt.strict) res.exit_code = 4;
        }
    }

    rep["config"] = cfg.to_json();
    rep["outputs"] = outputs;
    if (!opt.no_timestamp) {
        const auto now = std::chrono::system_clock::now();
        rep["timestamp_unix"] =
            std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    }

    res.report_path = out_dir / "report.json";
    std::ofstream out(res.report_path);
    out << rep.dump(2) << "\n";
    return res;
}

}  // namespace skewlin
