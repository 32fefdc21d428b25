#include "skewlin/kernels.hpp"

namespace skewlin::kernels {

namespace {
Mode g_mode = Mode::parallel;
}

Mode default_mode() { return g_mode; }

void set_default_mode(Mode m) { g_mode = m; }

int thread_count() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_thread_count(int n) {
#if defined(_OPENMP)
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace skewlin::kernels
