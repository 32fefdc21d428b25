#pragma once

#include <cmath>
#include <cstdint>

#include "skewlin/torus.hpp"

namespace skewlin {

/// splitmix64: tiny stateless-seedable generator. Used everywhere sampling
/// must be reproducible and schedule-independent: a fresh stream is keyed by
/// (seed, task, index), so parallel loops draw identical numbers no matter
/// how iterations are assigned to threads.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0,1), 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call, second discarded).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }
};

inline std::uint64_t rng_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0) {
    SplitMix64 g(seed);
    g.state ^= 0x6a09e667f3bcc909ULL + a;
    g.next();
    g.state ^= 0xbb67ae8584caa73bULL + b;
    g.next();
    g.state ^= 0x3c6ef372fe94f82bULL + c;
    g.next();
    return g.state;
}

inline TorusPoint random_torus_point(SplitMix64& g, int dim) {
    std::array<double, kMaxDim> c{};
    for (int i = 0; i < dim; ++i) c[static_cast<std::size_t>(i)] = g.uniform();
    return TorusPoint(std::span<const double>(c.data(), static_cast<std::size_t>(dim)));
}

/// A pair of points at torus distance uniformly drawn from [0.8*scale, 1.2*scale];
/// for scale <= 0.4 the offset is the minimal representative, so the quotient
/// distance equals the drawn radius exactly.
inline std::pair<TorusPoint, TorusPoint> random_pair_at_scale(SplitMix64& g, int dim,
                                                              double scale) {
    TorusPoint b1 = random_torus_point(g, dim);
    std::array<double, kMaxDim> dir{};
    double norm = 0.0;
    do {
        norm = 0.0;
        for (int i = 0; i < dim; ++i) {
            dir[static_cast<std::size_t>(i)] = g.gaussian();
            norm += dir[static_cast<std::size_t>(i)] * dir[static_cast<std::size_t>(i)];
        }
        norm = std::sqrt(norm);
    } while (norm < 1e-12);
    const double r = scale * (0.8 + 0.4 * g.uniform());
    std::array<double, kMaxDim> c{};
    for (int i = 0; i < dim; ++i)
        c[static_cast<std::size_t>(i)] =
            TorusPoint::reduce(b1[i] + r * dir[static_cast<std::size_t>(i)] / norm);
    return {b1, TorusPoint(std::span<const double>(c.data(), static_cast<std::size_t>(dim)))};
}

}  // namespace skewlin
