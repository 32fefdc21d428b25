#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skewlin/errors.hpp"
#include "skewlin/rng.hpp"
#include "skewlin/skew.hpp"

using namespace skewlin;

namespace {

LinearizedSkewProduct constant_lambda(double q) {
    return {ToralAutomorphism::cat_map(), [q](const TorusPoint&) { return q; }};
}

LinearizedSkewProduct sin_lambda(double q0, double q1) {
    return {ToralAutomorphism::cat_map(), [q0, q1](const TorusPoint& b) {
                return q0 + q1 * std::sin(6.283185307179586477 * b[0]);
            }};
}

}  // namespace

TEST_CASE("cocycle_product examples") {
    const auto f0c = constant_lambda(0.5);
    CHECK(cocycle_product(f0c, TorusPoint{0.3, 0.8}, 0) == 1.0);
    CHECK(cocycle_product(f0c, TorusPoint{0.1, 0.2}, 5) == doctest::Approx(0.03125).epsilon(1e-15));

    // (0,0) is a fixed point of the cat map and sin(0) = 0, so the orbit
    // multiplier is constantly 0.5.
    const auto f0s = sin_lambda(0.5, 0.1);
    CHECK(cocycle_product(f0s, TorusPoint{0.0, 0.0}, 2) == doctest::Approx(0.25).epsilon(1e-15));

    CHECK_THROWS_AS(cocycle_product(f0c, TorusPoint{0.0, 0.0}, -1), ValidationError);
}

TEST_CASE("weighted_cocycle examples") {
    const auto f0c = constant_lambda(0.5);
    CHECK(weighted_cocycle(f0c, TorusPoint{0.4, 0.4}, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(weighted_cocycle(f0c, TorusPoint{0.4, 0.4}, 3) == doctest::Approx(0.25).epsilon(1e-15));

    const auto f0s = sin_lambda(0.5, 0.1);
    for (int n : {1, 4, 7})
        CHECK(weighted_cocycle(f0s, TorusPoint{0.0, 0.0}, n) ==
              doctest::Approx(std::pow(0.5, n) / 0.5).epsilon(1e-14));
}

TEST_CASE("cocycle property Pi_{m+n}(b) = Pi_m(b) Pi_n(A^m b)") {
    const auto f0 = sin_lambda(0.5, 0.1);
    SplitMix64 g(17);
    for (int t = 0; t < 1000; ++t) {
        const TorusPoint b = random_torus_point(g, 2);
        const int m = static_cast<int>(g.next() % 11);
        const int n = static_cast<int>(g.next() % 11);
        const double lhs = cocycle_product(f0, b, m + n);
        const double rhs =
            cocycle_product(f0, b, m) * cocycle_product(f0, f0.base.iterate(b, m), n);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("bound chains |Pi_k| <= q^k and |P_k| <= q^k / D for k <= 30") {
    const auto f0 = sin_lambda(0.5, 0.1);
    const MultiplierBounds mb = estimate_bounds(f0, 512);
    SplitMix64 g(23);
    for (int t = 0; t < 300; ++t) {
        const TorusPoint b = random_torus_point(g, 2);
        for (int k = 0; k <= 30; k += 3) {
            CHECK(std::fabs(cocycle_product(f0, b, k)) <= std::pow(mb.q, k) * (1 + 1e-12));
            CHECK(std::fabs(weighted_cocycle(f0, b, k)) <=
                  std::pow(mb.q, k) / mb.D * (1 + 1e-12));
        }
    }
}

TEST_CASE("estimate_bounds examples") {
    CHECK_THROWS_AS(estimate_bounds(constant_lambda(0.5), 1), ValidationError);

    const MultiplierBounds c = estimate_bounds(constant_lambda(0.5), 64);
    CHECK(c.q == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.D == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_FALSE(c.globalization_required);

    // Dense-sampling oracle at resolution 4096 versus the 64-grid estimate.
    const auto f0 = sin_lambda(0.5, 0.1);
    const MultiplierBounds coarse = estimate_bounds(f0, 64);
    const MultiplierBounds fine = estimate_bounds(f0, 4096);
    const double tol = 0.1 * (6.283185307179586 / 64);
    CHECK(std::fabs(coarse.q - fine.q) <= tol);
    CHECK(std::fabs(coarse.D - fine.D) <= tol);
    CHECK(coarse.q == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(coarse.D == doctest::Approx(0.4).epsilon(1e-12));

    const MultiplierBounds hot = estimate_bounds(sin_lambda(0.9, 0.2), 64);
    CHECK(hot.globalization_required);
}

TEST_CASE("estimate_bounds_safe pads by the measured Lipschitz constant") {
    const auto f0 = sin_lambda(0.5, 0.1);
    const MultiplierBounds mb = estimate_bounds_safe(f0, 64);
    CHECK(mb.q >= 0.6);
    CHECK(mb.q <= 0.61);
    CHECK(mb.D <= 0.4);
    CHECK(mb.D >= 0.39);

    // Constant multiplier: zero Lipschitz constant, no padding.
    const MultiplierBounds c = estimate_bounds_safe(constant_lambda(0.5), 64);
    CHECK(c.q == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.D == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("apply_F examples") {
    // Boundary-preserving family for the section checks.
    FiberMapFamily bp;
    bp.name = "boundary-preserving";
    bp.fixes_top = true;
    bp.eval = [](const TorusPoint&, double x) { return 0.5 * x + 0.5 * x * x; };
    bp.deriv = [](const TorusPoint&, double x, int order) -> double {
        if (order == 1) return 0.5 + x;
        if (order == 2) return 1.0;
        return 0.0;
    };
    const SkewProduct f{ToralAutomorphism::cat_map(), bp};
    const TorusPoint b{0.3, 0.7};
    const auto [ab0, y0] = f.apply(b, 0.0);
    CHECK(y0 == 0.0);
    const auto [ab1, y1] = f.apply(b, 1.0);
    CHECK(y1 == doctest::Approx(1.0).epsilon(1e-15));
    const TorusPoint expect = f.base.apply(b);
    CHECK(ab1[0] == expect[0]);
    CHECK(ab1[1] == expect[1]);

    const SkewProduct mob{ToralAutomorphism::cat_map(), make_mobius_family({0.5, 0.1})};
    CHECK(mob.apply(b, 0.5).second == doctest::Approx(0.25 / 0.95).epsilon(1e-15));

    // Fiber escaping [0,1] is a model violation.
    FiberMapFamily esc = bp;
    esc.eval = [](const TorusPoint&, double x) { return 1.5 * x; };
    const SkewProduct bad{ToralAutomorphism::cat_map(), esc};
    CHECK_THROWS_AS(bad.apply(b, 0.9), ModelError);
}

TEST_CASE("apply_F0 examples") {
    const auto f0 = constant_lambda(0.5);
    const TorusPoint b{0.21, 0.88};
    const auto [b0, x0] = f0.apply_k(b, 0.8, 0);
    CHECK(b0[0] == b[0]);
    CHECK(x0 == 0.8);

    const auto [b3, x3] = f0.apply_k(b, 0.8, 3);
    CHECK(x3 == doctest::Approx(0.1).epsilon(1e-15));
    const TorusPoint expect = f0.base.iterate(b, 3);
    CHECK(b3[0] == expect[0]);
    CHECK(b3[1] == expect[1]);

    const auto f0s = sin_lambda(0.5, 0.1);
    for (int k : {1, 2, 5})
        CHECK(f0s.apply_k(TorusPoint{0.0, 0.0}, 0.3, k).second ==
              doctest::Approx(std::pow(0.5, k) * 0.3).epsilon(1e-14));
}

TEST_CASE("empirical Holder bound for Pi_n (close pairs)") {
    const auto f0 = sin_lambda(0.5, 0.1);
    const MultiplierBounds mb = estimate_bounds_safe(f0, 64);
    const double mu = f0.base.spectral_radius();
    const double alpha = 0.9 * std::min(1.0, std::log(1.0 / mb.q) / std::log(mu));
    const double theta = std::pow(mu, alpha) * mb.q;
    REQUIRE(theta < 1.0);

    // Lipschitz proxy for the Holder constant of lambda over close pairs.
    SplitMix64 gc(555);
    double c_lam = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const auto [b1, b2] = random_pair_at_scale(gc, 2, 0.01);
        c_lam = std::max(c_lam, std::fabs(f0.multiplier(b1) - f0.multiplier(b2)) /
                                    torus_distance(b1, b2));
    }

    SplitMix64 g(556);
    for (int n = 1; n <= 10; ++n) {
        const double bound =
            c_lam * std::pow(theta, n) / ((std::pow(mu, alpha) - 1.0) * mb.q) * 1.1;
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const auto [b1, b2] = random_pair_at_scale(g, 2, 0.01);
            const double d = torus_distance(b1, b2);
            if (d >= 0.02) continue;
            worst = std::max(worst,
                             std::fabs(cocycle_product(f0, b1, n) - cocycle_product(f0, b2, n)) /
                                 std::pow(d, alpha));
        }
        CHECK(worst <= bound);
    }
}
