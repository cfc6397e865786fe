#include "atriareg/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace atriareg {

int worker_threads() {
    static const int threads = [] {
        if (const char *env = std::getenv("ATRIAREG_THREADS")) {
            try {
                const int n = std::stoi(env);
                if (n > 0) {
                    return n;
                }
            } catch (...) {
            }
        }
#ifdef _OPENMP
        return omp_get_max_threads();
#else
        return 1;
#endif
    }();
    return threads;
}

namespace {

constexpr std::size_t kLeaf = 1024;

double pairwise(const double *v, std::size_t n) noexcept {
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += v[i];
        }
        return s;
    }
    const std::size_t half = ((n / kLeaf + 1) / 2) * kLeaf;
    return pairwise(v, half) + pairwise(v + half, n - half);
}

} // namespace

double ordered_sum(std::span<const double> values) noexcept { return pairwise(values.data(), values.size()); }

} // namespace atriareg
