#ifndef DECO_PARALLEL_HPP
#define DECO_PARALLEL_HPP

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deco {

/// Execution policy for the data-parallel kernels. Every kernel computes
/// each output element with a fixed serial arithmetic order, so serial and
/// parallel runs of the same kernel are bit-identical.
enum class Exec { serial, parallel };

inline bool omp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

inline int thread_count(Exec exec) {
#ifdef _OPENMP
    return exec == Exec::parallel ? omp_get_max_threads() : 1;
#else
    (void)exec;
    return 1;
#endif
}

}  // namespace deco

#endif
