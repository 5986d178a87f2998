#include "gpv/fft.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>

namespace gpv {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::string wisdom_path() {
    if (const char* env = std::getenv("GPV_WISDOM")) return env;
    const char* home = std::getenv("HOME");
    std::string dir = home ? std::string(home) + "/.cache" : "/tmp";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    return dir + "/gpv_fftw_wisdom";
}

// One-time FFTW process setup under the planner lock.
void global_init() {
    static bool done = false;
    if (done) return;
    fftw_init_threads();
    fftw_import_wisdom_from_filename(wisdom_path().c_str());
    done = true;
}

}  // namespace

struct SpectralTransform::Impl {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    fftw_complex* scratch = nullptr;
    std::size_t n = 0;

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        if (scratch) fftw_free(scratch);
    }
};

namespace {
std::atomic<int> g_thread_override{0};
}

int SpectralTransform::default_threads() {
    const int forced = g_thread_override.load(std::memory_order_relaxed);
    if (forced > 0) return forced;
    if (const char* env = std::getenv("GPV_FFT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return std::max(1, std::min<int>(hw ? int(hw) : 1, 4));
}

void SpectralTransform::set_default_threads(int threads) {
    g_thread_override.store(threads, std::memory_order_relaxed);
}

SpectralTransform::SpectralTransform(const Grid& grid, int threads)
    : impl_(new Impl), threads_(threads > 0 ? threads : default_threads()) {
    grid.validate();
    impl_->n = grid.size();
    std::lock_guard<std::mutex> lock(planner_mutex());
    global_init();
    fftw_plan_with_nthreads(threads_);
    // Plan on scratch storage so caller buffers only need matching alignment.
    impl_->scratch = fftw_alloc_complex(impl_->n);
    impl_->forward = fftw_plan_dft_3d(grid.nx, grid.ny, grid.nz, impl_->scratch,
                                      impl_->scratch, FFTW_FORWARD, FFTW_MEASURE);
    impl_->backward = fftw_plan_dft_3d(grid.nx, grid.ny, grid.nz, impl_->scratch,
                                       impl_->scratch, FFTW_BACKWARD, FFTW_MEASURE);
    fftw_export_wisdom_to_filename(wisdom_path().c_str());
}

SpectralTransform::~SpectralTransform() = default;

void SpectralTransform::forward(std::complex<double>* data) const {
    fftw_execute_dft(impl_->forward, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

void SpectralTransform::inverse(std::complex<double>* data) const {
    fftw_execute_dft(impl_->backward, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
    const double scale = 1.0 / double(impl_->n);
    const long n = long(impl_->n);
#pragma omp parallel for schedule(static) num_threads(threads_)
    for (long i = 0; i < n; ++i) data[i] *= scale;
}

}  // namespace gpv
