#include "skewlin/fiber.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "skewlin/errors.hpp"
#include "skewlin/expr.hpp"
#include "skewlin/rng.hpp"

namespace skewlin {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

/// Gauss-Legendre nodes and weights on [-1,1], computed once per order by
/// Newton iteration on P_n.
struct GaussRule {
    std::vector<double> nodes, weights;

    explicit GaussRule(int n) {
        nodes.resize(static_cast<std::size_t>(n));
        weights.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::fabs(dx) < 1e-15) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[static_cast<std::size_t>(i)] = -x;
            weights[static_cast<std::size_t>(i)] = w;
            nodes[static_cast<std::size_t>(n - 1 - i)] = x;
            weights[static_cast<std::size_t>(n - 1 - i)] = w;
        }
    }
};

const GaussRule& gauss_rule(int n) {
    static const GaussRule g16(16), g32(32), g64(64), g128(128), g256(256);
    switch (n) {
        case 16: return g16;
        case 32: return g32;
        case 64: return g64;
        case 128: return g128;
        default: return g256;
    }
}

double gl_hadamard(const FiberMapFamily& fam, const TorusPoint& b, double x, int n) {
    const GaussRule& g = gauss_rule(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double s = 0.5 * (g.nodes[i] + 1.0);
        acc += g.weights[i] * (1.0 - s) * fiber_deriv(fam, b, x * s, 2);
    }
    return 0.5 * acc;
}

}  // namespace

double fiber_deriv(const FiberMapFamily& fam, const TorusPoint& b, double x, int order) {
    if (order == 0) return fam.eval(b, x);
    if (fam.deriv) return fam.deriv(b, x, order);
    const auto f = [&](double t) { return fam.eval(b, t); };
    switch (order) {
        case 1: {
            const double h = std::max(1e-6, 1e-6 * std::fabs(x));
            return (f(x + h) - f(x - h)) / (2 * h);
        }
        case 2: {
            const double h = std::max(1e-6, 1e-6 * std::fabs(x));
            return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
        }
        case 3: {
            const double h = 1e-3;
            return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
        }
        case 4: {
            const double h = 1e-3;
            return (f(x + 2 * h) - 4 * f(x + h) + 6 * f(x) - 4 * f(x - h) + f(x - 2 * h)) /
                   (h * h * h * h);
        }
        default:
            throw ValidationError("fiber_deriv: finite differences support orders 1..4 only");
    }
}

double multiplier(const FiberMapFamily& fam, const TorusPoint& b) {
    return fiber_deriv(fam, b, 0.0, 1);
}

QuadResult quadratic_part(const FiberMapFamily& fam, const TorusPoint& b, double x) {
    if (fam.smoothness_k < 2)
        throw ValidationError("quadratic_part requires smoothness_k >= 2");
    if (x < -1e-12 || x > 1.0 + 1e-12)
        throw ValidationError("quadratic_part: x outside [0,1]");
    QuadResult r;
    double prev = gl_hadamard(fam, b, x, 16);
    for (int n = 32; n <= 256; n *= 2) {
        const double cur = gl_hadamard(fam, b, x, n);
        r.est_error = std::fabs(cur - prev);
        prev = cur;
        if (r.est_error < 1e-10) {
            r.value = cur;
            return r;
        }
    }
    r.value = prev;
    r.converged = false;
    return r;
}

double fiber_q(const FiberMapFamily& fam, const TorusPoint& b, double x) {
    if (fam.q_closed) return fam.q_closed(b, x);
    constexpr double kSwitch = 1e-4;
    if (x >= kSwitch) {
        const double lam = multiplier(fam, b);
        return (fam.eval(b, x) - lam * x) / (x * x);
    }
    return quadratic_part(fam, b, x).value;
}

void validate_family(const FiberMapFamily& fam, int dim, int n_samples, std::uint64_t seed) {
    if (!fam.eval) throw ValidationError("fiber family has no evaluator");
    SplitMix64 g(rng_key(seed, 0xf1be5));
    for (int i = 0; i < n_samples; ++i) {
        const TorusPoint b = random_torus_point(g, dim);
        const double f0 = fam.eval(b, 0.0);
        if (std::fabs(f0) > 1e-12) {
            std::ostringstream os;
            os << "family '" << fam.name << "': f_b(0) = " << f0 << " != 0";
            throw ModelError(os.str());
        }
        if (fam.fixes_top) {
            const double f1 = fam.eval(b, 1.0);
            if (std::fabs(f1 - 1.0) > 1e-12) {
                std::ostringstream os;
                os << "family '" << fam.name << "': f_b(1) = " << f1 << " != 1";
                throw ModelError(os.str());
            }
        }
        const double x = g.uniform();
        const double fx = fam.eval(b, x);
        if (fx < -1e-9 || fx > 1.0 + 1e-9) {
            std::ostringstream os;
            os << "family '" << fam.name << "': f_b(" << x << ") = " << fx << " outside [0,1]";
            throw ModelError(os.str());
        }
        if (fiber_deriv(fam, b, x, 1) <= 0.0) {
            std::ostringstream os;
            os << "family '" << fam.name << "': f_b' <= 0 at x = " << x
               << "; fiber maps must be orientation-preserving diffeomorphisms";
            throw ModelError(os.str());
        }
    }
}

FiberMapFamily make_quadratic_family(const QuadraticFamilyParams& p) {
    const double q0 = p.q0, q1 = p.q1, c0 = p.c0, c1 = p.c1;
    auto lam = [q0, q1](const TorusPoint& b) { return q0 + q1 * std::sin(kTwoPi * b[0]); };
    auto cc = [c0, c1](const TorusPoint& b) {
        const int j = b.dim() > 1 ? 1 : 0;
        return c0 * (1.0 + c1 * std::cos(kTwoPi * b[j]));
    };
    FiberMapFamily fam;
    fam.name = "quadratic";
    fam.depends_on_base = (q1 != 0.0) || (c1 != 0.0);
    fam.smoothness_k = 4;
    fam.holder_beta = 1.0;
    fam.holder_constants = {kTwoPi * (std::fabs(q1) + std::fabs(c0 * c1))};
    fam.eval = [lam, cc](const TorusPoint& b, double x) {
        return lam(b) * x + cc(b) * x * x * (1.0 - x);
    };
    fam.deriv = [lam, cc](const TorusPoint& b, double x, int order) -> double {
        switch (order) {
            case 1: return lam(b) + cc(b) * (2.0 * x - 3.0 * x * x);
            case 2: return cc(b) * (2.0 - 6.0 * x);
            case 3: return -6.0 * cc(b);
            default: return 0.0;
        }
    };
    fam.q_closed = [cc](const TorusPoint& b, double x) { return cc(b) * (1.0 - x); };
    return fam;
}

FiberMapFamily make_mobius_family(const MobiusFamilyParams& p) {
    const double l = p.lambda, m = p.m;
    if (m >= 1.0) throw ValidationError("mobius family requires m < 1");
    FiberMapFamily fam;
    fam.name = "mobius";
    fam.depends_on_base = false;
    fam.smoothness_k = 6;
    fam.holder_beta = 1.0;
    fam.holder_constants = {0.0};
    fam.eval = [l, m](const TorusPoint&, double x) { return l * x / (1.0 - m * x); };
    fam.deriv = [l, m](const TorusPoint&, double x, int order) -> double {
        const double u = 1.0 - m * x;
        double fac = l;
        double mp = 1.0;
        for (int i = 1; i <= order; ++i) {
            fac *= i;
            if (i >= 2) mp *= m;
        }
        return fac * mp / std::pow(u, order + 1);
    };
    fam.q_closed = [l, m](const TorusPoint&, double x) { return l * m / (1.0 - m * x); };
    return fam;
}

FiberMapFamily make_custom_family(const std::string& f_expr, int dim, double beta, int k) {
    auto expr = std::make_shared<Expression>(Expression::parse(f_expr, dim));
    FiberMapFamily fam;
    fam.name = "custom";
    fam.depends_on_base = expr->uses_base();
    fam.smoothness_k = k;
    fam.holder_beta = beta;
    fam.eval = [expr](const TorusPoint& b, double x) { return expr->eval(b.coords(), x); };
    return fam;
}

}  // namespace skewlin
