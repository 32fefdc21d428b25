#pragma once

#include <functional>
#include <string>
#include <vector>

#include "skewlin/torus.hpp"

namespace skewlin {

/// A family of fiber maps f_b: [0,1] -> [0,1], f_b(0) = 0, increasing,
/// with b in the torus. Evaluators must be pure and re-entrant.
struct FiberMapFamily {
    /// f_b(x). Required.
    std::function<double(const TorusPoint&, double)> eval;
    /// d^l f_b / dx^l for l >= 1. Optional; finite differences otherwise.
    std::function<double(const TorusPoint&, double, int)> deriv;
    /// Closed-form Q_b(x) with f_b(x) = lambda_b x + x^2 Q_b(x). Optional;
    /// families without it go through the Hadamard quadrature / difference
    /// quotient path in fiber_q().
    std::function<double(const TorusPoint&, double)> q_closed;

    int smoothness_k = 2;
    double holder_beta = 1.0;
    std::vector<double> holder_constants;  // C_0..C_k, informational
    /// Whether f_b(1) = 1 is part of the model. The solver never needs it
    /// (it works on [0, eps]); validation enforces it only when set.
    bool fixes_top = false;
    bool depends_on_base = true;
    std::string name = "custom";
};

/// d^l f_b / dx^l, analytic when the family provides it, otherwise central
/// differences with step max(1e-6, 1e-6 |x|) (orders 1-2; wider stencils and
/// larger steps for orders 3-4).
double fiber_deriv(const FiberMapFamily& fam, const TorusPoint& b, double x, int order);

/// lambda_b = f_b'(0).
double multiplier(const FiberMapFamily& fam, const TorusPoint& b);

struct QuadResult {
    double value = 0.0;
    bool converged = true;
    double est_error = 0.0;  // last inter-level difference
};

/// Q_b(x) = int_0^1 (1-s) f_b''(xs) ds by Gauss-Legendre quadrature,
/// 16 nodes doubled until successive estimates differ by < 1e-10.
/// Continuous at x = 0 with Q_b(0) = f_b''(0)/2.
QuadResult quadratic_part(const FiberMapFamily& fam, const TorusPoint& b, double x);

/// Runtime Q evaluator: the closed form when the family ships one, else the
/// difference quotient (f - lambda x)/x^2 away from 0 and quadrature near 0.
double fiber_q(const FiberMapFamily& fam, const TorusPoint& b, double x);

/// Sampled model checks: f_b(0) = 0, f_b' > 0, range inside [0,1] + 1e-9,
/// and f_b(1) = 1 when the family declares fixes_top. Throws ModelError.
void validate_family(const FiberMapFamily& fam, int dim, int n_samples, std::uint64_t seed);

// --- built-in families -----------------------------------------------------

/// f_b(x) = lambda_b x + c_b x^2 (1-x),
/// lambda_b = q0 + q1 sin(2 pi b1), c_b = c0 (1 + c1 cos(2 pi b2)).
struct QuadraticFamilyParams {
    double q0 = 0.5;
    double q1 = 0.1;
    double c0 = 0.3;
    double c1 = 0.5;
};
FiberMapFamily make_quadratic_family(const QuadraticFamilyParams& p);

/// Base-independent f(x) = lambda x / (1 - m x); Q(x) = lambda m / (1 - m x).
/// Its linearization has the closed form H(x) = x / (1 + c x), c = m/(1-lambda),
/// i.e. h(x) = -c / (1 + c x), which the analysis module uses as an oracle.
struct MobiusFamilyParams {
    double lambda = 0.5;
    double m = 0.1;
};
FiberMapFamily make_mobius_family(const MobiusFamilyParams& p);

/// Family defined by an expression string in x, b1..bd (see expr.hpp).
/// Derivatives are finite differences; accuracy is documented as ~1e-7.
FiberMapFamily make_custom_family(const std::string& f_expr, int dim, double beta, int k);

}  // namespace skewlin
