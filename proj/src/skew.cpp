#include "skewlin/skew.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "skewlin/errors.hpp"

namespace skewlin {

namespace {

/// Walk every node of the uniform res^d grid, call fn(point).
template <class Fn>
void for_each_grid_node(int dim, int res, Fn&& fn) {
    std::array<int, kMaxDim> idx{};
    std::array<double, kMaxDim> c{};
    const std::size_t total = [&] {
        std::size_t t = 1;
        for (int i = 0; i < dim; ++i) t *= static_cast<std::size_t>(res);
        return t;
    }();
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (int i = 0; i < dim; ++i)
            c[static_cast<std::size_t>(i)] =
                static_cast<double>(idx[static_cast<std::size_t>(i)]) / res;
        fn(TorusPoint(std::span<const double>(c.data(), static_cast<std::size_t>(dim))));
        for (int i = dim - 1; i >= 0; --i) {
            if (++idx[static_cast<std::size_t>(i)] < res) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
    }
}

}  // namespace

std::pair<TorusPoint, double> SkewProduct::apply(const TorusPoint& b, double x) const {
    const double fx = fiber.eval(b, x);
    if (fx < -1e-9 || fx > 1.0 + 1e-9) {
        std::ostringstream os;
        os << "skew product fiber escaped [0,1]: f_b(" << x << ") = " << fx;
        throw ModelError(os.str());
    }
    return {base.apply(b), fx};
}

LinearizedSkewProduct LinearizedSkewProduct::from(const SkewProduct& f) {
    const FiberMapFamily fam = f.fiber;
    return {f.base, [fam](const TorusPoint& b) { return skewlin::multiplier(fam, b); }};
}

std::pair<TorusPoint, double> LinearizedSkewProduct::apply_k(const TorusPoint& b, double x,
                                                             int k) const {
    return {base.iterate(b, k), cocycle_product(*this, b, k) * x};
}

double cocycle_product(const LinearizedSkewProduct& f0, const TorusPoint& b, int n) {
    if (n < 0) throw ValidationError("cocycle_product: n must be >= 0");
    double prod = 1.0;
    TorusPoint p = b;
    for (int k = 0; k < n; ++k) {
        prod *= f0.multiplier(p);
        p = f0.base.apply(p);
    }
    return prod;
}

double weighted_cocycle(const LinearizedSkewProduct& f0, const TorusPoint& b, int n) {
    if (n < 0) throw ValidationError("weighted_cocycle: n must be >= 0");
    double prod = 1.0;
    TorusPoint p = b;
    for (int k = 0; k < n; ++k) {
        prod *= f0.multiplier(p);
        p = f0.base.apply(p);
    }
    return prod / f0.multiplier(p);
}

MultiplierBounds estimate_bounds(const LinearizedSkewProduct& f0, int grid_resolution) {
    if (grid_resolution < 2)
        throw ValidationError("estimate_bounds: grid_resolution must be >= 2");
    MultiplierBounds mb;
    mb.q = -1e300;
    mb.D = 1e300;
    for_each_grid_node(f0.base.dim(), grid_resolution, [&](const TorusPoint& b) {
        const double l = f0.multiplier(b);
        mb.q = std::max(mb.q, l);
        mb.D = std::min(mb.D, l);
        ++mb.n_samples;
    });
    mb.globalization_required = (mb.q >= 1.0);
    return mb;
}

MultiplierBounds estimate_bounds_safe(const LinearizedSkewProduct& f0, int nb) {
    const int res = std::max(8, 4 * nb);
    MultiplierBounds mb = estimate_bounds(f0, res);
    // Lipschitz constant of lambda from axis-aligned fine-grid differences.
    const double h = 1.0 / res;
    double lip = 0.0;
    for_each_grid_node(f0.base.dim(), res, [&](const TorusPoint& b) {
        const double l0 = f0.multiplier(b);
        for (int i = 0; i < f0.base.dim(); ++i) {
            std::array<double, kMaxDim> c{};
            for (int j = 0; j < f0.base.dim(); ++j) c[static_cast<std::size_t>(j)] = b[j];
            c[static_cast<std::size_t>(i)] = TorusPoint::reduce(c[static_cast<std::size_t>(i)] + h);
            const TorusPoint bp(std::span<const double>(c.data(),
                                                        static_cast<std::size_t>(f0.base.dim())));
            lip = std::max(lip, std::fabs(f0.multiplier(bp) - l0) / h);
        }
    });
    const double pad = lip * h * 0.5 * std::sqrt(static_cast<double>(f0.base.dim()));
    mb.q += pad;
    mb.D = std::max(mb.D - pad, 1e-12);
    mb.globalization_required = (mb.q >= 1.0);
    return mb;
}

}  // namespace skewlin
