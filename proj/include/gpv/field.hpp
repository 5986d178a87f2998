#pragma once

#include <complex>
#include <cstdlib>
#include <functional>
#include <new>
#include <span>
#include <stdexcept>
#include <vector>

#include "gpv/fft.hpp"
#include "gpv/grid.hpp"

namespace gpv {

/// 64-byte aligned allocator so FFTW can use its widest SIMD paths on
/// field buffers.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    AlignedAllocator() = default;
    template <class U> AlignedAllocator(const AlignedAllocator<U>&) {}
    T* allocate(std::size_t n) {
        void* p = std::aligned_alloc(64, ((n * sizeof(T) + 63) / 64) * 64);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { std::free(p); }
    template <class U> bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using complex_vector = std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

/// Order parameter psi sampled on a uniform grid. |psi|^2 is a particle
/// density (m^-3); the squared norm integrates to the particle number.
struct ComplexField {
    Grid grid;
    complex_vector values;
    double time = 0;  // s

    ComplexField() = default;
    explicit ComplexField(const Grid& g) : grid(g), values(g.size()) {}

    std::complex<double>* data() { return values.data(); }
    const std::complex<double>* data() const { return values.data(); }
};

/// Riemann-sum inner product <f,h> = sum conj(f) h dV.
/// Throws std::invalid_argument on grid shape mismatch.
std::complex<double> inner_product(const ComplexField& f, const ComplexField& h);

/// Integral of |f|^2 over the box.
double norm_squared(const ComplexField& f);

/// Rescales f so norm_squared(f) == n_particles.
/// Throws std::invalid_argument for a zero field.
void normalize(ComplexField& f, double n_particles);

/// Unscaled forward DFT of f (spectral coefficients on the same Grid).
ComplexField forward_transform(const SpectralTransform& fft, const ComplexField& f);
/// Inverse of forward_transform.
ComplexField inverse_transform(const SpectralTransform& fft, const ComplexField& F);

using PotentialSampler = std::function<double(double x, double y, double z)>;

struct EnergyBreakdown {
    double kinetic = 0;      // J
    double potential = 0;    // J
    double interaction = 0;  // J
    double total() const { return kinetic + potential + interaction; }
};

/// GP energy functional split into kinetic (spectral), potential and
/// interaction parts. The sampler sees SI coordinates.
EnergyBreakdown total_energy(const ComplexField& f, const SpectralTransform& fft,
                             const PotentialSampler& potential, double interaction_g,
                             double hbar, double mass);

/// mu = (E_kin + E_pot + 2 E_int)/N for the normalized field.
double chemical_potential(const ComplexField& f, const SpectralTransform& fft,
                          const PotentialSampler& potential, double interaction_g,
                          double hbar, double mass);

/// One vertex of a winding loop, grid indices in a fixed z-plane.
struct LoopPoint {
    int ix, iy;
};

/// Builds the rectangle loop [ix0,ix1] x [iy0,iy1] (inclusive corners).
std::vector<LoopPoint> rectangle_loop(int ix0, int iy0, int ix1, int iy1);

/// Net phase winding around the closed loop in plane iz, as a multiple of
/// 2*pi. Throws WindingUndefined if any loop point has density below
/// floor_frac times the field's peak density.
int phase_winding(const ComplexField& f, std::span<const LoopPoint> loop, int iz,
                  double floor_frac = 1e-6);

struct WindingUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// First moments of |psi|^2 / N.
struct CenterOfMass {
    double x, y, z;
};
CenterOfMass center_of_mass(const ComplexField& f);

}  // namespace gpv
