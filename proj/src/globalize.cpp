#include "skewlin/globalize.hpp"

#include <cmath>
#include <sstream>

#include "skewlin/errors.hpp"

namespace skewlin {

double CutFunction::operator()(const TorusPoint& b) const {
    const double d = torus_distance(b, center);
    if (d <= r_inner) return 0.0;
    if (d >= r_outer) return 1.0;
    const double t = (d - r_inner) / (r_outer - r_inner);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

CutFunction build_cut(const TorusPoint& center, double r_inner, double r_outer) {
    if (!(0.0 < r_inner && r_inner < r_outer && r_outer < 0.5)) {
        std::ostringstream os;
        os << "build_cut: need 0 < r_inner < r_outer < 0.5, got r_inner = " << r_inner
           << ", r_outer = " << r_outer;
        throw ValidationError(os.str());
    }
    return CutFunction{center, r_inner, r_outer};
}

SkewProduct globalize(const SkewProduct& f, const CutFunction& phi, int check_resolution) {
    const FiberMapFamily inner = f.fiber;

    FiberMapFamily blended;
    blended.name = inner.name + "+globalized";
    blended.depends_on_base = true;
    blended.smoothness_k = inner.smoothness_k;
    blended.holder_beta = inner.holder_beta;
    blended.holder_constants = inner.holder_constants;
    blended.eval = [inner, phi](const TorusPoint& b, double x) {
        const double p = phi(b);
        return inner.eval(b, x) * (1.0 - p) + 0.5 * x * p;
    };
    blended.deriv = [inner, phi](const TorusPoint& b, double x, int order) {
        const double p = phi(b);
        const double base = fiber_deriv(inner, b, x, order);
        return order == 1 ? base * (1.0 - p) + 0.5 * p : base * (1.0 - p);
    };
    if (inner.q_closed) {
        const auto q_in = inner.q_closed;
        blended.q_closed = [q_in, phi](const TorusPoint& b, double x) {
            return q_in(b, x) * (1.0 - phi(b));
        };
    }

    // lambda_b < 1 must already hold wherever phi < 1 (contraction inside U),
    // and the blend must keep lambda~ < 1 everywhere.
    const SkewProduct out{f.base, blended};
    const LinearizedSkewProduct lin_in = LinearizedSkewProduct::from(f);
    const LinearizedSkewProduct lin_out = LinearizedSkewProduct::from(out);
    const int dim = f.base.dim();
    const int res = check_resolution;
    std::array<int, kMaxDim> idx{};
    std::array<double, kMaxDim> c{};
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(res);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (int i = 0; i < dim; ++i)
            c[static_cast<std::size_t>(i)] =
                static_cast<double>(idx[static_cast<std::size_t>(i)]) / res;
        const TorusPoint b(std::span<const double>(c.data(), static_cast<std::size_t>(dim)));
        const double p = phi(b);
        if (p < 1.0 && lin_in.multiplier(b) >= 1.0) {
            std::ostringstream os;
            os << "globalize: lambda_b = " << lin_in.multiplier(b) << " >= 1 inside U at b = (";
            for (int i = 0; i < dim; ++i) os << (i ? ", " : "") << b[i];
            os << "); the fixed point is not attracting there (invert F first)";
            throw ModelError(os.str());
        }
        const double lt = lin_out.multiplier(b);
        if (lt >= 1.0) {
            std::ostringstream os;
            os << "globalize: blended multiplier " << lt << " >= 1 at b = (";
            for (int i = 0; i < dim; ++i) os << (i ? ", " : "") << b[i];
            os << ")";
            throw ModelError(os.str());
        }
        for (int i = dim - 1; i >= 0; --i) {
            if (++idx[static_cast<std::size_t>(i)] < res) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
    }
    return out;
}

}  // namespace skewlin
