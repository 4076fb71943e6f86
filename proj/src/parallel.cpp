#include "cfdscope/parallel.hpp"

#include <algorithm>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfdscope {

void set_thread_count(int threads) {
#ifdef _OPENMP
    omp_set_num_threads(std::max(1, threads));
#else
    (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int hardware_threads() {
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace cfdscope
