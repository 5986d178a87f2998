#pragma once

#include <omp.h>

#include <vector>

#include "gpv/fft.hpp"

namespace gpv::detail {

inline int compute_threads() { return SpectralTransform::default_threads(); }

// Deterministic parallel reduction: fixed contiguous chunk per thread,
// partials combined in thread order, so identical inputs give identical
// bits run after run.
template <class F>
double parallel_sum(long n, F&& body) {
    const int nt = compute_threads();
    std::vector<double> partial(nt, 0.0);
#pragma omp parallel num_threads(nt)
    {
        const int tid = omp_get_thread_num();
        const long lo = n * tid / nt, hi = n * (tid + 1) / nt;
        double acc = 0.0;
        for (long i = lo; i < hi; ++i) acc += body(i);
        partial[tid] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace gpv::detail
