#pragma once

#include "skewlin/skew.hpp"
#include "skewlin/torus.hpp"

namespace skewlin {

/// Radial cut function: 0 on the ball of radius r_inner around `center`,
/// 1 outside radius r_outer, quintic smoothstep (C^2) in between.
struct CutFunction {
    TorusPoint center;
    double r_inner = 0.1;
    double r_outer = 0.25;

    double operator()(const TorusPoint& b) const;
};

/// Requires 0 < r_inner < r_outer < 0.5 so both balls embed in the torus.
CutFunction build_cut(const TorusPoint& center, double r_inner, double r_outer);

/// The modified skew product with fiber f~_b(x) = f_b(x)(1 - phi(b)) + (x/2) phi(b):
/// equal to f where phi = 0, pure halving map where phi = 1, and uniformly
/// contracting near the zero section. Construction verifies lambda~ < 1 on a
/// check grid and throws ModelError naming the offending b otherwise.
/// Note f~_b(1) = f_b(1)(1-phi) + phi/2, so the top boundary is not preserved
/// outside the inner ball; the solver only ever evaluates f~ on [0, eps].
SkewProduct globalize(const SkewProduct& f, const CutFunction& phi, int check_resolution = 256);

}  // namespace skewlin
