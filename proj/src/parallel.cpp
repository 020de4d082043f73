#include "spheresr/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>

namespace spheresr {

int thread_count() {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("SPHERE_SUPERRES_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return std::max(n, 1);
}

void apply_thread_cap() {
    omp_set_num_threads(thread_count());
}

}  // namespace spheresr
