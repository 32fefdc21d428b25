// Timing comparison of the serial reference kernels against the OpenMP
// paths, on the workloads the solver actually runs: grid tabulation of the
// homological series, sup-norm scans, and Holder pair sampling.

#include <chrono>
#include <cstdio>
#include <vector>

#include "skewlin/analysis.hpp"
#include "skewlin/fiber.hpp"
#include "skewlin/kernels.hpp"
#include "skewlin/rng.hpp"
#include "skewlin/solver.hpp"

using namespace skewlin;
namespace chrono = std::chrono;

namespace {

template <class F>
double time_ms(F&& fn, int reps) {
    fn();  // warm up
    const auto t0 = chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = chrono::steady_clock::now();
    return chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.2f ms   openmp %9.2f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
    std::printf("threads available: %d\n", kernels::thread_count());

    const SkewProduct f{ToralAutomorphism::cat_map(), make_quadratic_family({})};
    const LinearizedSkewProduct f0 = LinearizedSkewProduct::from(f);
    const FiberMapFamily fam = f.fiber;

    SolverConfig cfg;
    cfg.n_b = 64;
    cfg.n_x = 33;
    cfg.epsilon = 0.05;

    // Workload 1: one application of the homological series over the grid.
    {
        const FiberQ q = [&fam](const TorusPoint& b, double x) { return fiber_q(fam, b, x); };
        auto run = [&](kernels::Mode m) {
            kernels::set_default_mode(m);
            GridFunction h = homological_solve(q, f0, cfg);
            return h.value(0, 0);
        };
        const double ts = time_ms([&] { run(kernels::Mode::serial); }, 3);
        const double tp = time_ms([&] { run(kernels::Mode::parallel); }, 3);
        report("homological series 64x64x33", ts, tp);
    }

    // Workload 2: sup-norm scan over a large grid.
    {
        GridFunction g(2, 256, 65, 0.05);
        SplitMix64 rng(7);
        for (double& v : g.data()) v = rng.uniform(-1.0, 1.0);
        const double ts = time_ms([&] { return g.c_norm(kernels::Mode::serial); }, 20);
        const double tp = time_ms([&] { return g.c_norm(kernels::Mode::parallel); }, 20);
        report("c_norm 256x256x65", ts, tp);
    }

    // Workload 3: Holder pair sampling on a solved grid.
    {
        kernels::set_default_mode(kernels::Mode::parallel);
        const FiberQ q = [&fam](const TorusPoint& b, double x) { return fiber_q(fam, b, x); };
        GridFunction h = homological_solve(q, f0, cfg);
        const std::vector<double> scales = {0.125, 0.0625, 0.03125};
        auto run = [&](kernels::Mode m) { return h.holder_norm(0.45, 4000, scales, 11, m); };
        const double ts = time_ms([&] { run(kernels::Mode::serial); }, 3);
        const double tp = time_ms([&] { run(kernels::Mode::parallel); }, 3);
        report("holder sampling 3x4000 pairs", ts, tp);
    }

    kernels::set_default_mode(kernels::Mode::parallel);
    return 0;
}
