#pragma once

#include <cstddef>
#include <span>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace skewlin::kernels {

/// Every grid kernel runs in one of two modes. `parallel` distributes nodes
/// over OpenMP threads with a static schedule; `serial` is the plain-loop
/// reference the parallel path is tested against. Per-node work is identical
/// in both, and node results never interact except through exact max
/// reductions, so outputs are bit-identical across modes and thread counts.
enum class Mode { serial, parallel };

Mode default_mode();
void set_default_mode(Mode m);

int thread_count();
void set_thread_count(int n);

/// out[i] = value_at(i) for i in [0, out.size()).
template <class F>
void tabulate(std::span<double> out, F&& value_at, Mode mode) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.size());
    if (mode == Mode::parallel) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = value_at(static_cast<std::size_t>(i));
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = value_at(static_cast<std::size_t>(i));
    }
}

template <class F>
void tabulate(std::span<double> out, F&& value_at) {
    tabulate(out, static_cast<F&&>(value_at), default_mode());
}

/// max of value_at(i) over i in [0, n); -inf when n == 0. Exact under any
/// association order, hence safe as an OpenMP reduction.
template <class F>
double max_over(std::size_t n, F&& value_at, Mode mode) {
    double best = -1.7976931348623157e308;
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
    if (mode == Mode::parallel) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) reduction(max : best)
#endif
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            const double v = value_at(static_cast<std::size_t>(i));
            if (v > best) best = v;
        }
    } else {
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            const double v = value_at(static_cast<std::size_t>(i));
            if (v > best) best = v;
        }
    }
    return best;
}

template <class F>
double max_over(std::size_t n, F&& value_at) {
    return max_over(n, static_cast<F&&>(value_at), default_mode());
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b, Mode mode) {
    return max_over(a.size(), [&](std::size_t i) {
        const double d = a[i] - b[i];
        return d < 0 ? -d : d;
    }, mode);
}

}  // namespace skewlin::kernels
