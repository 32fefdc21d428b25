#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skewlin/errors.hpp"
#include "skewlin/fiber.hpp"
#include "skewlin/rng.hpp"

using namespace skewlin;

namespace {

/// f(x) = lam x + c x^2 with analytic derivatives, as a hand-rolled family.
FiberMapFamily pure_quadratic(double lam, double c) {
    FiberMapFamily f;
    f.name = "pure-quadratic";
    f.depends_on_base = false;
    f.smoothness_k = 4;
    f.eval = [lam, c](const TorusPoint&, double x) { return lam * x + c * x * x; };
    f.deriv = [lam, c](const TorusPoint&, double x, int order) -> double {
        if (order == 1) return lam + 2 * c * x;
        if (order == 2) return 2 * c;
        return 0.0;
    };
    return f;
}

}  // namespace

TEST_CASE("multiplier examples") {
    const TorusPoint b0{0.0, 0.0};
    CHECK(multiplier(pure_quadratic(0.5, 0.05), b0) == doctest::Approx(0.5).epsilon(1e-12));

    // Mobius: differentiate 0.5x/(1-0.1x) symbolically at 0 -> 0.5.
    const auto mob = make_mobius_family({0.5, 0.1});
    CHECK(multiplier(mob, b0) == doctest::Approx(0.5).epsilon(1e-12));

    // Built-in family at b = (0.25, 0): sin(pi/2) = 1 so lambda = 0.6.
    const auto quad = make_quadratic_family({0.5, 0.1, 0.3, 0.5});
    CHECK(multiplier(quad, TorusPoint{0.25, 0.0}) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("quadratic_part examples") {
    const TorusPoint b0{0.0, 0.0};

    // f = lam x + c x^2: the Hadamard integral is c at every x.
    const auto pq = pure_quadratic(0.5, 0.05);
    for (double x : {0.0, 0.1, 0.37, 0.9}) {
        const QuadResult r = quadratic_part(pq, b0, x);
        CHECK(r.converged);
        CHECK(r.value == doctest::Approx(0.05).epsilon(1e-10));
    }

    // Mobius at x = 0: f''(0)/2 = lambda m = 0.05.
    const auto mob = make_mobius_family({0.5, 0.1});
    CHECK(quadratic_part(mob, b0, 0.0).value == doctest::Approx(0.05).epsilon(1e-10));

    // Linear map: no quadratic part.
    const auto lin = pure_quadratic(0.5, 0.0);
    CHECK(quadratic_part(lin, b0, 0.5).value == doctest::Approx(0.0).epsilon(1e-12));

    // smoothness precondition
    FiberMapFamily k1 = pure_quadratic(0.5, 0.1);
    k1.smoothness_k = 1;
    CHECK_THROWS_AS(quadratic_part(k1, b0, 0.1), ValidationError);
}

TEST_CASE("quadrature agrees with closed-form Q on the built-ins") {
    SplitMix64 g(31);
    const auto quad = make_quadratic_family({0.5, 0.1, 0.3, 0.5});
    const auto mob = make_mobius_family({0.5, 0.1});
    for (int i = 0; i < 200; ++i) {
        const TorusPoint b = random_torus_point(g, 2);
        const double x = g.uniform();
        CHECK(quadratic_part(quad, b, x).value ==
              doctest::Approx(quad.q_closed(b, x)).epsilon(1e-9));
        CHECK(quadratic_part(mob, b, x).value ==
              doctest::Approx(mob.q_closed(b, x)).epsilon(1e-9));
    }
}

TEST_CASE("decomposition identity f = lam x + x^2 Q to 1e-8") {
    SplitMix64 g(42);
    const FiberMapFamily fams[] = {
        make_quadratic_family({0.5, 0.1, 0.3, 0.5}),
        make_mobius_family({0.5, 0.1}),
        make_custom_family("0.5*x + 0.3*x^2*(1-x)", 2, 1.0, 2),
    };
    for (const auto& fam : fams) {
        for (int i = 0; i < 10000; ++i) {
            const TorusPoint b = random_torus_point(g, 2);
            const double x = 0.5 * g.uniform();
            const double lam = multiplier(fam, b);
            const double q = fiber_q(fam, b, x);
            CHECK(std::fabs(fam.eval(b, x) - lam * x - x * x * q) <= 1e-8);
        }
    }
}

TEST_CASE("finite-difference fallback approximates analytic derivatives") {
    const auto quad = make_quadratic_family({0.5, 0.1, 0.3, 0.5});
    FiberMapFamily fd = quad;
    fd.deriv = nullptr;
    fd.q_closed = nullptr;
    SplitMix64 g(7);
    for (int i = 0; i < 100; ++i) {
        const TorusPoint b = random_torus_point(g, 2);
        const double x = g.uniform() * 0.9 + 0.05;
        CHECK(fiber_deriv(fd, b, x, 1) ==
              doctest::Approx(fiber_deriv(quad, b, x, 1)).epsilon(1e-7));
        CHECK(fiber_deriv(fd, b, x, 2) ==
              doctest::Approx(fiber_deriv(quad, b, x, 2)).epsilon(1e-3));
    }
}

TEST_CASE("fiber_q hybrid path matches quadrature near zero") {
    auto fd = make_quadratic_family({0.5, 0.0, 0.3, 0.0});
    fd.q_closed = nullptr;  // force the hybrid route, analytic f'' remains
    const TorusPoint b0{0.0, 0.0};
    for (double x : {0.0, 1e-6, 5e-5, 1e-3, 0.2}) {
        CHECK(fiber_q(fd, b0, x) ==
              doctest::Approx(quadratic_part(fd, b0, x).value).epsilon(1e-8));
    }
}

TEST_CASE("validate_family catches broken models") {
    FiberMapFamily bad = pure_quadratic(0.5, 0.05);
    bad.eval = [](const TorusPoint&, double x) { return 0.5 * x + 0.01; };  // f(0) != 0
    CHECK_THROWS_AS(validate_family(bad, 2, 50, 1), ModelError);

    FiberMapFamily dec = pure_quadratic(0.5, 0.05);
    dec.eval = [](const TorusPoint&, double x) { return -0.5 * x; };  // decreasing
    dec.deriv = nullptr;
    CHECK_THROWS_AS(validate_family(dec, 2, 50, 1), ModelError);

    FiberMapFamily top = pure_quadratic(0.5, 0.05);
    top.fixes_top = true;  // f(1) = 0.55 != 1
    CHECK_THROWS_AS(validate_family(top, 2, 50, 1), ModelError);

    // A genuinely boundary-preserving family passes with fixes_top set.
    FiberMapFamily bp;
    bp.name = "boundary-preserving";
    bp.fixes_top = true;
    bp.eval = [](const TorusPoint&, double x) { return 0.5 * x + 0.5 * x * x; };
    bp.deriv = [](const TorusPoint&, double x, int order) -> double {
        if (order == 1) return 0.5 + x;
        if (order == 2) return 1.0;
        return 0.0;
    };
    CHECK_NOTHROW(validate_family(bp, 2, 200, 1));

    CHECK_NOTHROW(validate_family(make_quadratic_family({0.5, 0.1, 0.3, 0.5}), 2, 200, 1));
    CHECK_NOTHROW(validate_family(make_mobius_family({0.5, 0.1}), 2, 200, 1));
}
