#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vecci {

// Worker-count policy shared by all parallel kernels.  `requested == 0` means
// "use the hardware default", always clamped by the VECCAUSE_THREADS
// environment variable so deployments can cap the process without rebuilding.
inline int resolve_threads(int requested) {
#ifdef _OPENMP
    int n = requested > 0 ? requested : omp_get_max_threads();
#else
    int n = requested > 0 ? requested : 1;
#endif
    if (const char* env = std::getenv("VECCAUSE_THREADS")) {
        try {
            int cap = std::stoi(env);
            if (cap >= 1) n = std::min(n, cap);
        } catch (...) {
            // Unparseable values are ignored rather than fatal.
        }
    }
    return std::max(1, n);
}

}  // namespace vecci
