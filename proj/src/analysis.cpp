#include "skewlin/analysis.hpp"

#include <cmath>
#include <sstream>

#include "skewlin/errors.hpp"
#include "skewlin/rng.hpp"

namespace skewlin {

AlphaTheta AlphaTheta::make(double beta, double mu, double q, double D, double alpha) {
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream os;
        os << "AlphaTheta: q = " << q << " must lie in (0,1); globalization required otherwise";
        throw ValidationError(os.str());
    }
    AlphaTheta at;
    at.beta = beta;
    at.mu = mu;
    at.q = q;
    at.D = D;
    const double log_cap = std::log(1.0 / q) / std::log(mu);
    at.alpha_max = std::min(beta, log_cap);
    at.alpha = alpha > 0.0 ? alpha : 0.9 * at.alpha_max;
    if (at.alpha >= log_cap) {
        const double theta = std::pow(mu, at.alpha) * q;
        std::ostringstream os;
        os << "alpha = " << at.alpha << " >= alpha_max = " << at.alpha_max
           << ": theta = mu^alpha * q = " << theta << " >= 1";
        throw ValidationError(os.str());
    }
    if (at.alpha >= beta) {
        std::ostringstream os;
        os << "alpha = " << at.alpha << " >= beta = " << beta
           << ": the fiber family is only beta-Holder in b";
        throw ValidationError(os.str());
    }
    at.theta = std::pow(mu, at.alpha) * q;
    return at;
}

double conjugacy_residual(const SkewProduct& f,
                          const std::function<double(const TorusPoint&, double)>& h_fiber,
                          int nb, int nx, double epsilon, int n_random, std::uint64_t seed) {
    const LinearizedSkewProduct f0 = LinearizedSkewProduct::from(f);
    const int dim = f.base.dim();

    auto residual_at = [&](const TorusPoint& b, double x) {
        const double lhs = f.fiber.eval(b, h_fiber(b, x));
        const TorusPoint ab = f.base.apply(b);
        const double rhs = h_fiber(ab, f0.multiplier(b) * x);
        return std::fabs(lhs - rhs);
    };

    // Verification grid twice as fine as the solve grid.
    const int vb = 2 * nb, vx = 2 * nx - 1;
    std::size_t vbd = 1;
    for (int i = 0; i < dim; ++i) vbd *= static_cast<std::size_t>(vb);
    const double dx = epsilon / (vx - 1);
    const double grid_max = kernels::max_over(
        vbd * static_cast<std::size_t>(vx), [&](std::size_t flat) {
            std::size_t bf = flat / static_cast<std::size_t>(vx);
            const int xi = static_cast<int>(flat % static_cast<std::size_t>(vx));
            std::array<double, kMaxDim> c{};
            for (int i = dim - 1; i >= 0; --i) {
                c[static_cast<std::size_t>(i)] =
                    static_cast<double>(bf % static_cast<std::size_t>(vb)) / vb;
                bf /= static_cast<std::size_t>(vb);
            }
            const TorusPoint b(std::span<const double>(c.data(), static_cast<std::size_t>(dim)));
            return residual_at(b, dx * xi);
        });

    const double rand_max = kernels::max_over(
        static_cast<std::size_t>(n_random), [&](std::size_t i) {
            SplitMix64 g(rng_key(seed, 0x0ff6d1d, i));
            const TorusPoint b = random_torus_point(g, dim);
            return residual_at(b, epsilon * g.uniform());
        });

    return std::max(grid_max, rand_max);
}

double koenigs_oracle(const std::function<double(double)>& f, double lambda, double x) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw ValidationError("koenigs_oracle: need 0 < lambda < 1");
    if (x == 0.0) return 0.0;

    auto phi = [&](double y0) {
        double y = y0;
        double scale = 1.0;
        double est = y0;
        double prev = y0;
        for (int n = 0; n < 2000; ++n) {
            y = f(y);
            scale /= lambda;
            prev = est;
            est = y * scale;
            if (y < 1e-250) break;
            if (y < 1e-8 && std::fabs(est - prev) < 1e-13 * std::max(1.0, std::fabs(est))) break;
        }
        // Richardson consistency: the tail of the estimates is geometric with
        // ratio ~lambda; the extrapolated limit must agree with the last term.
        const double extrap = est + (est - prev) * lambda / (1.0 - lambda);
        if (std::fabs(extrap - est) > 1e-8 * std::max(1.0, std::fabs(est))) {
            std::ostringstream os;
            os << "koenigs_oracle: phi-limit did not converge at x = " << y0
               << " (last increment " << est - prev << ")";
            throw ModelError(os.str());
        }
        return est;
    };

    // Invert phi by bisection; phi is increasing near 0 with phi'(0) = 1.
    double hi = std::min(2.0 * x, 1.0);
    while (phi(hi) < x) {
        if (hi >= 1.0)
            throw ModelError("koenigs_oracle: could not bracket phi^{-1}(x)");
        hi = std::min(2.0 * hi, 1.0);
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

HolderEstimate estimate_holder(const GridFunction& h, const AlphaTheta& at,
                               std::span<const double> scales, int n_pairs, std::uint64_t seed) {
    HolderEstimate est;
    const double spacing = 1.0 / h.nb();
    for (std::size_t si = 0; si < scales.size(); ++si) {
        const double s = scales[si];
        if (s <= spacing) continue;  // sub-grid scales see only interpolation
        const double md = kernels::max_over(
            static_cast<std::size_t>(n_pairs), [&](std::size_t p) {
                SplitMix64 g(rng_key(seed, 0xe57a1fa, si, p));
                const auto [b1, b2] = random_pair_at_scale(g, h.dim(), s);
                double m = 0.0;
                for (int xi = 0; xi < h.nx(); ++xi) {
                    const double x = h.x_node(xi);
                    m = std::max(m, std::fabs(h.eval(b1, x) - h.eval(b2, x)));
                }
                return m;
            });
        est.table.push_back({s, md, md / std::pow(s, at.alpha)});
    }
    if (est.table.size() < 3)
        throw ValidationError("estimate_holder: fewer than 3 scales above the grid spacing");

    const double floor = 1e-14 * std::max(1.0, h.c_norm());
    bool all_zero = true;
    for (const auto& row : est.table) all_zero = all_zero && row.max_diff <= floor;
    if (all_zero) {
        est.exact_in_b = true;
        return est;
    }

    // Least-squares slope of log M_s against log s.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& row : est.table) {
        if (row.max_diff <= floor) continue;
        const double lx = std::log(row.scale), ly = std::log(row.max_diff);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 3)
        throw ValidationError("estimate_holder: fewer than 3 scales with nonzero differences");
    est.alpha_hat = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return est;
}

bool narrow_band_check(const MultiplierBounds& bounds) {
    return bounds.q * bounds.q < bounds.D;
}

TheoryConstants measure_constants(const SkewProduct& f, const AlphaTheta& at, int n_pairs,
                                  std::uint64_t seed) {
    const LinearizedSkewProduct f0 = LinearizedSkewProduct::from(f);
    const int dim = f.base.dim();
    const FiberMapFamily& fam = f.fiber;
    TheoryConstants tc;

    // Lipschitz proxies at small separations; on the unit-diameter torus they
    // upper-bound the alpha-Holder constants for any alpha in (0,1].
    const double proxy_scales[3] = {0.02, 0.01, 0.005};
    for (int si = 0; si < 3; ++si) {
        const double s = proxy_scales[si];
        tc.C_lambda = std::max(
            tc.C_lambda,
            kernels::max_over(static_cast<std::size_t>(n_pairs), [&](std::size_t p) {
                SplitMix64 g(rng_key(seed, 0xc1a, static_cast<std::uint64_t>(si), p));
                const auto [b1, b2] = random_pair_at_scale(g, dim, s);
                return std::fabs(f0.multiplier(b1) - f0.multiplier(b2)) / torus_distance(b1, b2);
            }));
        tc.C_Q = std::max(
            tc.C_Q, kernels::max_over(static_cast<std::size_t>(n_pairs), [&](std::size_t p) {
                SplitMix64 g(rng_key(seed, 0xc2b, static_cast<std::uint64_t>(si), p));
                const auto [b1, b2] = random_pair_at_scale(g, dim, s);
                const double x = g.uniform();
                return std::fabs(fiber_q(fam, b1, x) - fiber_q(fam, b2, x)) /
                       torus_distance(b1, b2);
            }));
    }
    tc.Lip_Q = kernels::max_over(static_cast<std::size_t>(n_pairs), [&](std::size_t p) {
        SplitMix64 g(rng_key(seed, 0xc3c, p));
        const TorusPoint b = random_torus_point(g, dim);
        const double x = g.uniform() * (1.0 - 1e-4);
        return std::fabs(fiber_q(fam, b, x + 1e-4) - fiber_q(fam, b, x)) / 1e-4;
    });

    const double ma1 = std::pow(at.mu, at.alpha) - 1.0;
    tc.B = at.theta / (ma1 * at.q) + 2.0;
    tc.L_C = tc.C_lambda * tc.B / (at.D * at.D * (1.0 - at.theta));
    tc.L_alpha = 1.0 / (at.D * (1.0 - at.theta));
    tc.L_Lip = tc.C_lambda / (ma1 * at.q * (1.0 - at.theta * at.q));
    return tc;
}

std::vector<BoundCheck> check_bounds(const SkewProduct& f, const AlphaTheta& at,
                                     const BoundCheckOptions& opts,
                                     TheoryConstants* out_constants) {
    const LinearizedSkewProduct f0 = LinearizedSkewProduct::from(f);
    const int dim = f.base.dim();
    const FiberMapFamily& fam = f.fiber;
    std::vector<BoundCheck> rows;

    TheoryConstants tc = measure_constants(f, at, opts.n_pairs / 4 + 1, opts.seed);
    const double ma1 = std::pow(at.mu, at.alpha) - 1.0;

    const double x_panel[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int n = 1; n <= opts.depth; ++n) {
        double m_pi = 0.0, m_p = 0.0, m_t2 = 0.0;
        for (std::size_t si = 0; si < opts.scales.size(); ++si) {
            const double s = opts.scales[si];
            const auto key = [&](std::uint64_t tag, std::size_t p) {
                return rng_key(opts.seed ^ tag,
                               static_cast<std::uint64_t>(n) * 97 + si, p);
            };
            m_pi = std::max(
                m_pi, kernels::max_over(static_cast<std::size_t>(opts.n_pairs), [&](std::size_t p) {
                    SplitMix64 g(key(0x9101, p));
                    const auto [b1, b2] = random_pair_at_scale(g, dim, s);
                    const double da = std::pow(torus_distance(b1, b2), at.alpha);
                    return std::fabs(cocycle_product(f0, b1, n) - cocycle_product(f0, b2, n)) / da;
                }));
            m_p = std::max(
                m_p, kernels::max_over(static_cast<std::size_t>(opts.n_pairs), [&](std::size_t p) {
                    SplitMix64 g(key(0x9202, p));
                    const auto [b1, b2] = random_pair_at_scale(g, dim, s);
                    const double da = std::pow(torus_distance(b1, b2), at.alpha);
                    return std::fabs(weighted_cocycle(f0, b1, n) - weighted_cocycle(f0, b2, n)) /
                           da;
                }));
            m_t2 = std::max(
                m_t2, kernels::max_over(static_cast<std::size_t>(opts.n_pairs), [&](std::size_t p) {
                    SplitMix64 g(key(0x9303, p));
                    const auto [b1, b2] = random_pair_at_scale(g, dim, s);
                    const double da = std::pow(torus_distance(b1, b2), at.alpha);
                    const double pk2 = weighted_cocycle(f0, b2, n);
                    const TorusPoint a1 = f0.base.iterate(b1, n);
                    const TorusPoint a2 = f0.base.iterate(b2, n);
                    const double pi1 = cocycle_product(f0, b1, n);
                    const double pi2 = cocycle_product(f0, b2, n);
                    double m = 0.0;
                    for (double x : x_panel)
                        m = std::max(m, std::fabs(pk2) *
                                            std::fabs(fiber_q(fam, a1, pi1 * x) -
                                                      fiber_q(fam, a2, pi2 * x)));
                    return m / da;
                }));
        }
        const double thn = std::pow(at.theta, n);
        const double b_pi = tc.C_lambda * thn / (ma1 * at.q);
        const double b_p = tc.C_lambda * tc.B * thn / (at.D * at.D);
        const double b_t2 =
            thn / at.D * (tc.C_Q + std::pow(at.q, n - 1) * tc.Lip_Q * tc.C_lambda / ma1);
        const double eps_abs = 1e-15;
        rows.push_back({"pi_holder", n, b_pi, m_pi, opts.slack_holder,
                        m_pi <= b_pi * (1.0 + opts.slack_holder) + eps_abs, 0.0});
        rows.push_back({"p_holder", n, b_p, m_p, opts.slack_holder,
                        m_p <= b_p * (1.0 + opts.slack_holder) + eps_abs,
                        at.D * at.D * tc.C_lambda * tc.B * thn});
        rows.push_back({"theta2_holder", n, b_t2, m_t2, opts.slack_holder,
                        m_t2 <= b_t2 * (1.0 + opts.slack_holder) + eps_abs,
                        thn * at.D * (tc.C_Q + std::pow(at.q, n - 1) * tc.Lip_Q * tc.C_lambda / ma1)});
    }

    // Operator norm of L on random grid functions (Lemma 1 assertion 4).
    {
        SolverConfig c;
        c.n_b = 16;
        c.n_x = 9;
        c.epsilon = opts.epsilon;
        c.alpha = at.alpha;
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            GridFunction q(dim, c.n_b, c.n_x, c.epsilon);
            SplitMix64 g(rng_key(opts.seed, 0x10a9, static_cast<std::uint64_t>(t)));
            for (double& v : q.data()) v = g.uniform(-1.0, 1.0);
            const GridFunction lq = apply_homological_to_grid(q, f0, c);
            worst = std::max(worst, lq.c_norm() / q.c_norm());
        }
        const double bound = 1.0 / (at.D * (1.0 - at.q));
        rows.push_back({"l_c_norm", 0, bound, worst, opts.slack_operator,
                        worst <= bound * (1.0 + opts.slack_operator), 0.0});
    }

    // Lipschitz transport on piecewise-linear test functions (Prop 5).
    {
        SolverConfig c;
        c.n_b = 16;
        c.n_x = 9;
        c.epsilon = opts.epsilon;
        c.alpha = at.alpha;
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            GridFunction g1(dim, c.n_b, c.n_x, c.epsilon);
            SplitMix64 g(rng_key(opts.seed, 0x11b0, static_cast<std::uint64_t>(t)));
            for (double& v : g1.data()) v = g.uniform(-1.0, 1.0);
            const GridFunction lg = apply_homological_to_grid(g1, f0, c);
            worst = std::max(worst, lg.lipschitz_x() / g1.lipschitz_x());
        }
        const double bound = 1.0 / (at.D * (1.0 - at.q * at.q));
        rows.push_back({"lip_transport", 0, bound, worst, opts.slack_lipschitz,
                        worst <= bound * (1.0 + opts.slack_lipschitz), 0.0});
    }

    // Derivative transport norm (Prop 5, differentiated series), l = 1, 2.
    for (int l = 1; l <= 2; ++l) {
        SolverConfig c;
        c.n_b = 16;
        c.n_x = 9;
        c.epsilon = opts.epsilon;
        c.alpha = at.alpha;
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            GridFunction hl(dim, c.n_b, c.n_x, c.epsilon);
            SplitMix64 g(rng_key(opts.seed, 0x12c0 + static_cast<std::uint64_t>(l),
                                 static_cast<std::uint64_t>(t)));
            for (double& v : hl.data()) v = g.uniform(-1.0, 1.0);
            const GridFunction tl = derivative_transport(hl, l, f0, c, l + 2);
            worst = std::max(worst, tl.c_norm() / hl.c_norm());
        }
        const double bound = 1.0 / (at.D * (1.0 - std::pow(at.q, l + 1)));
        rows.push_back({l == 1 ? "deriv_transport_l1" : "deriv_transport_l2", 0, bound, worst,
                        opts.slack_operator, worst <= bound * (1.0 + opts.slack_operator),
                        at.D / (1.0 - std::pow(at.q, l + 1))});
    }

    if (out_constants) *out_constants = tc;
    return rows;
}

}  // namespace skewlin
