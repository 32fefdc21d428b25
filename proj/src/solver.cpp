#include "skewlin/solver.hpp"

#include <cmath>
#include <sstream>

#include "skewlin/errors.hpp"

namespace skewlin {

namespace {

std::size_t pow_size(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
    return r;
}

/// max |q(b,x)| over the solve grid nodes.
double grid_q_norm(const FiberQ& q_eval, const OrbitTables& tab, const SolverConfig& cfg) {
    const std::size_t nbd = tab.nodes();
    const double dx = cfg.epsilon / (cfg.n_x - 1);
    return kernels::max_over(nbd * static_cast<std::size_t>(cfg.n_x), [&](std::size_t i) {
        const std::size_t bf = i / static_cast<std::size_t>(cfg.n_x);
        const int xi = static_cast<int>(i % static_cast<std::size_t>(cfg.n_x));
        return std::fabs(q_eval(tab.point(bf), dx * xi));
    });
}

struct Setup {
    MultiplierBounds mb;
    double alpha = 0.0, theta = 0.0, q_norm = 0.0;
    int depth = 0;
};

Setup prepare(const LinearizedSkewProduct& f0, const FiberQ& q_eval, const SolverConfig& cfg,
              double beta) {
    Setup s;
    s.mb = estimate_bounds_safe(f0, cfg.n_b);
    const double mu = f0.base.spectral_radius();
    s.alpha = cfg.alpha > 0.0
                  ? cfg.alpha
                  : 0.9 * std::min(beta, std::log(1.0 / s.mb.q) / std::log(mu));
    s.theta = require_contraction_setup(mu, s.alpha, s.mb.q);
    // One cheap pass over the grid for ||Q||_C using a depth-0 table.
    OrbitTables t0 = OrbitTables::build(f0.base, f0.multiplier, cfg.n_b, 0);
    s.q_norm = grid_q_norm(q_eval, t0, cfg);
    s.depth = cfg.truncation_N > 0 ? cfg.truncation_N
                                   : derive_truncation(cfg.tail_tol, s.mb.q, s.mb.D, s.q_norm);
    return s;
}

/// Phi evaluated through an x-interpolated h at an orbit node.
inline double phi_at(const GridFunction& h, std::size_t b_flat, const TorusPoint& b, double x,
                     const FiberQ& q_eval) {
    const double hv = h.eval_on_column(b_flat, x);
    const double shifted = x + x * x * hv;
    if (shifted < -1e-12 || shifted > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "shift escaped the fiber: x + x^2 h = " << shifted << " at x = " << x
           << " (h = " << hv << "); epsilon or A_C too large";
        throw ModelError(os.str());
    }
    return (1.0 + x * hv) * (1.0 + x * hv) * q_eval(b, shifted);
}

}  // namespace

double require_contraction_setup(double mu, double alpha, double q) {
    if (q >= 1.0) {
        std::ostringstream os;
        os << "multiplier bound q = " << q << " >= 1: globalization required";
        throw ValidationError(os.str());
    }
    const double theta = std::pow(mu, alpha) * q;
    if (theta >= 1.0) {
        std::ostringstream os;
        os << "theta = mu^alpha * q = " << mu << "^" << alpha << " * " << q << " = " << theta
           << " >= 1; lower alpha below " << std::log(1.0 / q) / std::log(mu);
        throw ValidationError(os.str());
    }
    return theta;
}

int derive_truncation(double tail_tol, double q, double D, double q_norm) {
    if (q_norm <= 0.0) return 8;
    const double arg = tail_tol * D * (1.0 - q) / q_norm;
    int n = static_cast<int>(std::ceil(std::log(arg) / std::log(q))) - 1;
    if (n < 8) n = 8;
    if (n > 200) n = 200;
    return n;
}

OrbitTables OrbitTables::build(const ToralAutomorphism& base,
                               const std::function<double(const TorusPoint&)>& lambda, int nb,
                               int depth, kernels::Mode mode) {
    OrbitTables t;
    t.nb_ = nb;
    t.dim_ = base.dim();
    t.depth_ = depth;
    t.nbd_ = pow_size(nb, t.dim_);
    const int rows = depth + 2;
    t.perm_.resize(static_cast<std::size_t>(rows) * t.nbd_);
    t.lam_.resize(static_cast<std::size_t>(rows) * t.nbd_);
    t.pi_.resize(static_cast<std::size_t>(rows) * t.nbd_);
    t.p_.resize(static_cast<std::size_t>(depth + 1) * t.nbd_);
    t.pts_.resize(t.nbd_);

    // Node points and the one-step index map.
    std::vector<std::uint32_t> step(t.nbd_);
    {
        std::array<std::int64_t, kMaxDim> idx{}, out{};
        for (std::size_t flat = 0; flat < t.nbd_; ++flat) {
            std::size_t rem = flat;
            for (int i = t.dim_ - 1; i >= 0; --i) {
                idx[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(
                    rem % static_cast<std::size_t>(nb));
                rem /= static_cast<std::size_t>(nb);
            }
            std::array<double, kMaxDim> c{};
            for (int i = 0; i < t.dim_; ++i)
                c[static_cast<std::size_t>(i)] =
                    static_cast<double>(idx[static_cast<std::size_t>(i)]) / nb;
            t.pts_[flat] =
                TorusPoint(std::span<const double>(c.data(), static_cast<std::size_t>(t.dim_)));
            base.apply_index(std::span<const std::int64_t>(idx.data(),
                                                           static_cast<std::size_t>(t.dim_)),
                             std::span<std::int64_t>(out.data(), static_cast<std::size_t>(t.dim_)),
                             nb);
            std::size_t of = 0;
            for (int i = 0; i < t.dim_; ++i)
                of = of * static_cast<std::size_t>(nb) +
                     static_cast<std::size_t>(out[static_cast<std::size_t>(i)]);
            step[flat] = static_cast<std::uint32_t>(of);
        }
    }

    std::vector<double> lam0(t.nbd_);
    kernels::tabulate(lam0, [&](std::size_t i) { return lambda(t.pts_[i]); }, mode);

    for (std::size_t i = 0; i < t.nbd_; ++i) {
        t.perm_[i] = static_cast<std::uint32_t>(i);
        t.lam_[i] = lam0[i];
        t.pi_[i] = 1.0;
    }
    for (int k = 1; k < rows; ++k) {
        const std::uint32_t* prev = t.perm_.data() + t.row(k - 1);
        std::uint32_t* cur = t.perm_.data() + t.row(k);
        const double* lam_prev = t.lam_.data() + t.row(k - 1);
        double* lam_cur = t.lam_.data() + t.row(k);
        const double* pi_prev = t.pi_.data() + t.row(k - 1);
        double* pi_cur = t.pi_.data() + t.row(k);
        for (std::size_t i = 0; i < t.nbd_; ++i) {
            cur[i] = step[prev[i]];
            lam_cur[i] = lam0[cur[i]];
            pi_cur[i] = pi_prev[i] * lam_prev[i];
        }
    }
    for (int k = 0; k <= depth; ++k) {
        const double* lam_k = t.lam_.data() + t.row(k);
        const double* pi_k = t.pi_.data() + t.row(k);
        double* p_k = t.p_.data() + t.row(k);
        for (std::size_t i = 0; i < t.nbd_; ++i) p_k[i] = pi_k[i] / lam_k[i];
    }
    return t;
}

GridFunction homological_solve(const FiberQ& q_eval, const LinearizedSkewProduct& f0,
                               const SolverConfig& cfg) {
    const Setup s = prepare(f0, q_eval, cfg, 1.0);
    const OrbitTables tab = OrbitTables::build(f0.base, f0.multiplier, cfg.n_b, s.depth);
    GridFunction h(f0.base.dim(), cfg.n_b, cfg.n_x, cfg.epsilon);
    const int nx = cfg.n_x;
    const double dx = cfg.epsilon / (nx - 1);
    kernels::tabulate(h.data(), [&](std::size_t flat) {
        const std::size_t bf = flat / static_cast<std::size_t>(nx);
        const double x = dx * static_cast<int>(flat % static_cast<std::size_t>(nx));
        double acc = 0.0;
        for (int k = 0; k <= tab.depth(); ++k) {
            const std::uint32_t bk = tab.perm_row(k)[bf];
            acc -= tab.p_row(k)[bf] * q_eval(tab.point(bk), tab.pi_row(k)[bf] * x);
        }
        return acc;
    });
    return h;
}

GridFunction apply_homological_to_grid(const GridFunction& q, const LinearizedSkewProduct& f0,
                                       const SolverConfig& cfg) {
    SolverConfig c = cfg;
    c.n_b = q.nb();
    c.n_x = q.nx();
    c.epsilon = q.epsilon();
    MultiplierBounds mb = estimate_bounds_safe(f0, c.n_b);
    const double mu = f0.base.spectral_radius();
    const double alpha =
        c.alpha > 0.0 ? c.alpha : 0.9 * std::min(1.0, std::log(1.0 / mb.q) / std::log(mu));
    require_contraction_setup(mu, alpha, mb.q);
    const int depth = c.truncation_N > 0
                          ? c.truncation_N
                          : derive_truncation(c.tail_tol, mb.q, mb.D, q.c_norm());
    const OrbitTables tab = OrbitTables::build(f0.base, f0.multiplier, c.n_b, depth);
    GridFunction h(f0.base.dim(), c.n_b, c.n_x, c.epsilon);
    const int nx = c.n_x;
    const double dx = c.epsilon / (nx - 1);
    kernels::tabulate(h.data(), [&](std::size_t flat) {
        const std::size_t bf = flat / static_cast<std::size_t>(nx);
        const double x = dx * static_cast<int>(flat % static_cast<std::size_t>(nx));
        double acc = 0.0;
        for (int k = 0; k <= tab.depth(); ++k) {
            const std::uint32_t bk = tab.perm_row(k)[bf];
            acc -= tab.p_row(k)[bf] * q.eval_on_column(bk, tab.pi_row(k)[bf] * x);
        }
        return acc;
    });
    return h;
}

GridFunction shift_apply(const GridFunction& h, const FiberQ& q_eval) {
    GridFunction out(h.dim(), h.nb(), h.nx(), h.epsilon());
    const int nx = h.nx();
    kernels::tabulate(out.data(), [&](std::size_t flat) {
        const std::size_t bf = flat / static_cast<std::size_t>(nx);
        const int xi = static_cast<int>(flat % static_cast<std::size_t>(nx));
        const double x = h.x_node(xi);
        const double hv = h.value(bf, xi);
        const double shifted = x + x * x * hv;
        if (shifted < -1e-12 || shifted > 1.0 + 1e-12) {
            std::ostringstream os;
            os << "shift_apply: x + x^2 h = " << shifted << " outside [0,1] at node (b_flat = "
               << bf << ", x = " << x << ")";
            throw ModelError(os.str());
        }
        return (1.0 + x * hv) * (1.0 + x * hv) * q_eval(h.node_point(bf), shifted);
    });
    return out;
}

std::pair<GridFunction, SolverReport> solve_conjugacy(const SkewProduct& f,
                                                      const SolverConfig& cfg,
                                                      const SpaceNParams& np) {
    const LinearizedSkewProduct f0 = LinearizedSkewProduct::from(f);
    const FiberMapFamily& fam = f.fiber;
    const FiberQ q_eval = [&fam](const TorusPoint& b, double x) { return fiber_q(fam, b, x); };

    const Setup s = prepare(f0, q_eval, cfg, fam.holder_beta);
    const OrbitTables tab = OrbitTables::build(f0.base, f0.multiplier, cfg.n_b, s.depth);

    SolverReport rep;
    rep.q = s.mb.q;
    rep.D = s.mb.D;
    rep.mu = f0.base.spectral_radius();
    rep.alpha = s.alpha;
    rep.theta = s.theta;
    rep.epsilon = cfg.epsilon;
    rep.q_norm = s.q_norm;
    rep.truncation_N = s.depth;

    SpaceNParams bounds = np;
    if (bounds.a_c <= 0.0) bounds.a_c = 2.0 * s.q_norm / (s.mb.D * (1.0 - s.mb.q));

    const int nx = cfg.n_x;
    const double dx = cfg.epsilon / (nx - 1);
    GridFunction h(f0.base.dim(), cfg.n_b, cfg.n_x, cfg.epsilon);

    auto apply_lphi = [&](const GridFunction& cur) {
        GridFunction next(cur.dim(), cur.nb(), cur.nx(), cur.epsilon());
        kernels::tabulate(next.data(), [&](std::size_t flat) {
            const std::size_t bf = flat / static_cast<std::size_t>(nx);
            const double x = dx * static_cast<int>(flat % static_cast<std::size_t>(nx));
            double acc = 0.0;
            for (int k = 0; k <= tab.depth(); ++k) {
                const std::uint32_t bk = tab.perm_row(k)[bf];
                acc -= tab.p_row(k)[bf] *
                       phi_at(cur, bk, tab.point(bk), tab.pi_row(k)[bf] * x, q_eval);
            }
            return acc;
        });
        return next;
    };

    int consecutive_expanding = 0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        GridFunction next = apply_lphi(h);
        const double delta = kernels::max_abs_diff(next.data(), h.data(), kernels::default_mode());
        if (it == 0) {
            // next is h1 = LQ, the homological (first-order) answer; its
            // measured norms fix the remaining space-N bounds.
            if (bounds.a_lip <= 0.0) bounds.a_lip = 10.0 * std::max(next.lipschitz_x(), 1e-6);
            if (bounds.a_alpha <= 0.0) {
                const NormReport nr = next.holder_norm(s.alpha, cfg.trace_pairs, cfg.trace_scales,
                                                       cfg.seed);
                bounds.a_alpha = 10.0 * std::max(nr.holder_norm, 1e-6);
            }
        }
        if (it > 0 && rep.final_delta > 0.0)
            rep.contraction_estimates.push_back(delta / rep.final_delta);
        rep.final_delta = delta;
        h = std::move(next);
        ++rep.iterations;

        const NormReport nr = h.holder_norm(s.alpha, cfg.trace_pairs, cfg.trace_scales, cfg.seed);
        rep.in_space_n.push_back(nr.c_norm <= bounds.a_c && nr.lip_x <= bounds.a_lip &&
                                 nr.holder_norm <= bounds.a_alpha);

        if (!rep.contraction_estimates.empty() && rep.contraction_estimates.back() > 1.0) {
            if (++consecutive_expanding >= 3) {
                std::ostringstream os;
                os << "Picard iteration is not contracting (nu = "
                   << rep.contraction_estimates.back() << " after " << rep.iterations
                   << " iterations); try a smaller epsilon than " << cfg.epsilon;
                throw DivergenceError(os.str());
            }
        } else {
            consecutive_expanding = 0;
        }
        if (delta < cfg.fixed_point_tol) {
            rep.converged = true;
            break;
        }
    }
    rep.n_params = bounds;
    if (!rep.converged) rep.note = "stopped at max_iterations before reaching fixed_point_tol";

    // Residuals at solve nodes. The base moves on-grid; only x interpolates.
    const std::uint32_t* perm1 = tab.perm_row(1);
    const double* lam0 = tab.lambda_row(0);
    rep.homological_residual = kernels::max_over(
        h.size(), [&](std::size_t flat) {
            const std::size_t bf = flat / static_cast<std::size_t>(nx);
            const int xi = static_cast<int>(flat % static_cast<std::size_t>(nx));
            const double x = dx * xi;
            const double lam = lam0[bf];
            const double lhs = lam * lam * h.eval_on_column(perm1[bf], lam * x) -
                               lam * h.value(bf, xi);
            const double rhs = phi_at(h, bf, tab.point(bf), x, q_eval);
            return std::fabs(lhs - rhs);
        });
    rep.functional_residual = kernels::max_over(
        h.size(), [&](std::size_t flat) {
            const std::size_t bf = flat / static_cast<std::size_t>(nx);
            const int xi = static_cast<int>(flat % static_cast<std::size_t>(nx));
            const double x = dx * xi;
            const double lam = lam0[bf];
            const double xf = lam * x;
            const double lhs = xf + xf * xf * h.eval_on_column(perm1[bf], xf);
            const double rhs = fam.eval(tab.point(bf), x + x * x * h.value(bf, xi));
            return std::fabs(lhs - rhs);
        });
    return {std::move(h), std::move(rep)};
}

GridFunction derivative_transport(const GridFunction& h_l, int l,
                                  const LinearizedSkewProduct& f0, const SolverConfig& cfg,
                                  int smoothness_k) {
    if (l < 1) throw ValidationError("derivative_transport: l must be >= 1");
    if (l > smoothness_k - 2) {
        std::ostringstream os;
        os << "derivative_transport: l = " << l << " exceeds smoothness_k - 2 = "
           << smoothness_k - 2;
        throw ValidationError(os.str());
    }
    SolverConfig c = cfg;
    c.n_b = h_l.nb();
    c.n_x = h_l.nx();
    c.epsilon = h_l.epsilon();
    MultiplierBounds mb = estimate_bounds_safe(f0, c.n_b);
    if (mb.q >= 1.0) throw ValidationError("derivative_transport: q >= 1, globalize first");
    const int depth = c.truncation_N > 0
                          ? c.truncation_N
                          : derive_truncation(c.tail_tol, mb.q, mb.D, h_l.c_norm());
    const OrbitTables tab = OrbitTables::build(f0.base, f0.multiplier, c.n_b, depth);
    GridFunction out(h_l.dim(), c.n_b, c.n_x, c.epsilon);
    const int nx = c.n_x;
    const double dx = c.epsilon / (nx - 1);
    kernels::tabulate(out.data(), [&](std::size_t flat) {
        const std::size_t bf = flat / static_cast<std::size_t>(nx);
        const double x = dx * static_cast<int>(flat % static_cast<std::size_t>(nx));
        double acc = 0.0;
        for (int k = 0; k <= tab.depth(); ++k) {
            const double pik = tab.pi_row(k)[bf];
            double pil = 1.0;
            for (int j = 0; j < l; ++j) pil *= pik;
            acc -= tab.p_row(k)[bf] * pil * h_l.eval_on_column(tab.perm_row(k)[bf], pik * x);
        }
        return acc;
    });
    return out;
}

}  // namespace skewlin
