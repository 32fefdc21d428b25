#pragma once

#include <functional>
#include <utility>

#include "skewlin/fiber.hpp"
#include "skewlin/torus.hpp"

namespace skewlin {

/// F(b,x) = (Ab, f_b(x)).
struct SkewProduct {
    ToralAutomorphism base;
    FiberMapFamily fiber;

    /// Returns (Ab, f_b(x)); throws ModelError when the fiber value leaves
    /// [0,1] by more than 1e-9.
    std::pair<TorusPoint, double> apply(const TorusPoint& b, double x) const;
};

/// F0(b,x) = (Ab, lambda_b x), the fiberwise linearization.
struct LinearizedSkewProduct {
    ToralAutomorphism base;
    std::function<double(const TorusPoint&)> multiplier;

    static LinearizedSkewProduct from(const SkewProduct& f);

    /// F0^k(b,x) = (A^k b, Pi_k(b) x), fiber part via the cocycle product.
    std::pair<TorusPoint, double> apply_k(const TorusPoint& b, double x, int k) const;
};

/// Pi_n(b) = lambda_b lambda_{Ab} ... lambda_{A^{n-1} b}; Pi_0 = 1.
double cocycle_product(const LinearizedSkewProduct& f0, const TorusPoint& b, int n);

/// P_n(b) = Pi_n(b) / lambda_{A^n b}.
double weighted_cocycle(const LinearizedSkewProduct& f0, const TorusPoint& b, int n);

struct MultiplierBounds {
    double q = 0.0;  // sup of lambda over the sample grid
    double D = 0.0;  // inf of lambda over the sample grid
    int n_samples = 0;
    bool globalization_required = false;  // q >= 1
};

/// max/min of lambda over the uniform grid with `grid_resolution` points per
/// dimension. Deterministic for fixed resolution.
MultiplierBounds estimate_bounds(const LinearizedSkewProduct& f0, int grid_resolution);

/// Bounds on a grid 4x finer than nb, then pushed outward by the measured
/// Lipschitz constant of lambda times half a grid cell diagonal. Keeps the
/// contraction hypotheses on the safe side.
MultiplierBounds estimate_bounds_safe(const LinearizedSkewProduct& f0, int nb);

}  // namespace skewlin
