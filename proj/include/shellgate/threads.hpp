#pragma once

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shellgate::threads {

// Worker cap: min(OMP max threads, SHELLGATE_THREADS). Evaluated once.
inline int count() {
    static const int n = [] {
#ifdef _OPENMP
        int c = omp_get_max_threads();
#else
        int c = 1;
#endif
        if (const char* env = std::getenv("SHELLGATE_THREADS")) {
            int cap = std::atoi(env);
            if (cap >= 1 && cap < c) c = cap;
        }
        return c < 1 ? 1 : c;
    }();
    return n;
}

}  // namespace shellgate::threads
