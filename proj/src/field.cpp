#include "gpv/field.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

#include "internal.hpp"

namespace gpv {

using detail::compute_threads;
using detail::parallel_sum;

std::complex<double> inner_product(const ComplexField& f, const ComplexField& h) {
    if (!f.grid.same_shape(h.grid))
        throw std::invalid_argument("inner_product: grid mismatch");
    const long n = long(f.grid.size());
    const auto* a = f.data();
    const auto* b = h.data();
    const double re = parallel_sum(n, [&](long i) {
        return a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    });
    const double im = parallel_sum(n, [&](long i) {
        return a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    });
    return std::complex<double>(re, im) * f.grid.cell_volume();
}

double norm_squared(const ComplexField& f) {
    const long n = long(f.grid.size());
    const auto* a = f.data();
    return f.grid.cell_volume() *
           parallel_sum(n, [&](long i) { return std::norm(a[i]); });
}

void normalize(ComplexField& f, double n_particles) {
    const double nn = norm_squared(f);
    if (!(nn > 0))
        throw std::invalid_argument("normalize: zero field");
    const double scale = std::sqrt(n_particles / nn);
    const long n = long(f.grid.size());
    auto* a = f.data();
#pragma omp parallel for schedule(static) num_threads(compute_threads())
    for (long i = 0; i < n; ++i) a[i] *= scale;
}

ComplexField forward_transform(const SpectralTransform& fft, const ComplexField& f) {
    ComplexField out = f;
    fft.forward(out.data());
    return out;
}

ComplexField inverse_transform(const SpectralTransform& fft, const ComplexField& F) {
    ComplexField out = F;
    fft.inverse(out.data());
    return out;
}

EnergyBreakdown total_energy(const ComplexField& f, const SpectralTransform& fft,
                             const PotentialSampler& potential, double interaction_g,
                             double hbar, double mass) {
    const Grid& g = f.grid;
    const long n = long(g.size());
    const double dv = g.cell_volume();
    EnergyBreakdown e;

    // Kinetic part from the spectrum: (dV/N) sum hbar^2 k^2 / 2m |F|^2.
    ComplexField spec = forward_transform(fft, f);
    const auto kx = g.wavenumbers_x();
    const auto ky = g.wavenumbers_y();
    const auto kz = g.wavenumbers_z();
    const auto* F = spec.data();
    const double kin_sum = parallel_sum(n, [&](long i) {
        const int iz = int(i % g.nz);
        const long ixy = i / g.nz;
        const int iy = int(ixy % g.ny);
        const int ix = int(ixy / g.ny);
        const double k2 = kx[ix] * kx[ix] + ky[iy] * ky[iy] + kz[iz] * kz[iz];
        return k2 * std::norm(F[i]);
    });
    e.kinetic = hbar * hbar / (2.0 * mass) * kin_sum * dv / double(n);

    const auto* a = f.data();
    e.potential = dv * parallel_sum(n, [&](long i) {
        const int iz = int(i % g.nz);
        const long ixy = i / g.nz;
        const int iy = int(ixy % g.ny);
        const int ix = int(ixy / g.ny);
        return potential(g.x(ix), g.y(iy), g.z(iz)) * std::norm(a[i]);
    });
    e.interaction = 0.5 * interaction_g * dv * parallel_sum(n, [&](long i) {
        const double d = std::norm(a[i]);
        return d * d;
    });
    return e;
}

double chemical_potential(const ComplexField& f, const SpectralTransform& fft,
                          const PotentialSampler& potential, double interaction_g,
                          double hbar, double mass) {
    const EnergyBreakdown e = total_energy(f, fft, potential, interaction_g, hbar, mass);
    const double n_particles = norm_squared(f);
    return (e.kinetic + e.potential + 2.0 * e.interaction) / n_particles;
}

std::vector<LoopPoint> rectangle_loop(int ix0, int iy0, int ix1, int iy1) {
    std::vector<LoopPoint> loop;
    for (int ix = ix0; ix < ix1; ++ix) loop.push_back({ix, iy0});
    for (int iy = iy0; iy < iy1; ++iy) loop.push_back({ix1, iy});
    for (int ix = ix1; ix > ix0; --ix) loop.push_back({ix, iy1});
    for (int iy = iy1; iy > iy0; --iy) loop.push_back({ix0, iy});
    return loop;
}

int phase_winding(const ComplexField& f, std::span<const LoopPoint> loop, int iz,
                  double floor_frac) {
    if (loop.size() < 3)
        throw std::invalid_argument("phase_winding: loop too short");
    const Grid& g = f.grid;
    double peak = 0.0;
    const long n = long(g.size());
    const auto* a = f.data();
    for (long i = 0; i < n; ++i) peak = std::max(peak, std::norm(a[i]));
    const double floor = floor_frac * peak;

    double total = 0.0;
    for (std::size_t p = 0; p < loop.size(); ++p) {
        const LoopPoint& cur = loop[p];
        const LoopPoint& nxt = loop[(p + 1) % loop.size()];
        const auto vc = a[g.index(cur.ix, cur.iy, iz)];
        const auto vn = a[g.index(nxt.ix, nxt.iy, iz)];
        if (std::norm(vc) < floor || std::norm(vn) < floor)
            throw WindingUndefined("phase_winding: loop crosses a near-zero density point");
        total += std::arg(vn * std::conj(vc));
    }
    const double w = total / (2.0 * M_PI);
    const int wi = int(std::lround(w));
    if (std::abs(w - wi) > 0.25)
        throw WindingUndefined("phase_winding: non-integer winding sum");
    return wi;
}

CenterOfMass center_of_mass(const ComplexField& f) {
    const Grid& g = f.grid;
    const long n = long(g.size());
    const auto* a = f.data();
    const double total = parallel_sum(n, [&](long i) { return std::norm(a[i]); });
    auto moment = [&](int axis) {
        return parallel_sum(n, [&](long i) {
            const int iz = int(i % g.nz);
            const long ixy = i / g.nz;
            const int iy = int(ixy % g.ny);
            const int ix = int(ixy / g.ny);
            const double c = axis == 0 ? g.x(ix) : axis == 1 ? g.y(iy) : g.z(iz);
            return c * std::norm(a[i]);
        });
    };
    return {moment(0) / total, moment(1) / total, moment(2) / total};
}

}  // namespace gpv
