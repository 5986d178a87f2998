#pragma once

#include <complex>
#include <memory>

#include "gpv/grid.hpp"

namespace gpv {

/// In-place 3D FFT pair for one grid shape, backed by FFTW.
///
/// forward() applies the unscaled DFT sum; inverse() applies the backward
/// transform divided by nx*ny*nz, so inverse(forward(f)) == f to roundoff.
/// Buffers passed to execute must come from aligned_alloc_complex (or any
/// 64-byte aligned storage).
///
/// Plans are created under a global planner lock and reuse FFTW wisdom
/// cached on disk (GPV_WISDOM env var overrides the location), which keeps
/// plan selection, and therefore floating-point output, reproducible from
/// run to run on one machine.
class SpectralTransform {
public:
    explicit SpectralTransform(const Grid& grid, int threads = 0);
    ~SpectralTransform();
    SpectralTransform(const SpectralTransform&) = delete;
    SpectralTransform& operator=(const SpectralTransform&) = delete;

    void forward(std::complex<double>* data) const;
    void inverse(std::complex<double>* data) const;

    int threads() const { return threads_; }

    /// Default thread count: explicit override, else GPV_FFT_THREADS env
    /// var, else min(hw, 4).
    static int default_threads();
    /// Process-wide override used by the sweep scheduler (0 clears it).
    static void set_default_threads(int threads);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int threads_;
};

}  // namespace gpv
