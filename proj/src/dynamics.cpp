#include "gpv/dynamics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "internal.hpp"

namespace gpv {

using detail::compute_threads;
using detail::parallel_sum;

void EvolutionConfig::validate(double omega_r) const {
    if (!(dt > 0))
        throw std::invalid_argument("evolution: dt must be positive");
    if (dt * omega_r > 0.01 + 1e-12)
        throw std::invalid_argument("evolution: dt*omega_r must be <= 0.01");
    if (!(t_end >= 0))
        throw std::invalid_argument("evolution: t_end must be nonnegative");
    if (observer_stride < 1)
        throw std::invalid_argument("evolution: observer_stride must be >= 1");
}

namespace {

// Complex phase table exp(-i hbar k^2 dt_eff / 2m) for a kinetic substep.
std::vector<std::complex<double>> kinetic_table(const Grid& g, double hbar,
                                                double mass, double dt_eff) {
    std::vector<std::complex<double>> tab(g.size());
    const auto kx = g.wavenumbers_x(), ky = g.wavenumbers_y(), kz = g.wavenumbers_z();
    const long n = long(g.size());
#pragma omp parallel for schedule(static) num_threads(compute_threads())
    for (long i = 0; i < n; ++i) {
        const int iz = int(i % g.nz);
        const long ixy = i / g.nz;
        const int iy = int(ixy % g.ny);
        const int ix = int(ixy / g.ny);
        const double k2 = kx[ix] * kx[ix] + ky[iy] * ky[iy] + kz[iz] * kz[iz];
        tab[i] = std::polar(1.0, -hbar * k2 * dt_eff / (2.0 * mass));
    }
    return tab;
}

void apply_spectral(ComplexField& f, const SpectralTransform& fft,
                    const std::vector<std::complex<double>>& tab) {
    auto* a = f.data();
    const long n = long(f.grid.size());
    fft.forward(a);
#pragma omp parallel for schedule(static) num_threads(compute_threads())
    for (long i = 0; i < n; ++i) a[i] *= tab[i];
    fft.inverse(a);
}

// Local (potential + interaction) phase rotation. The modulus is invariant,
// so sampling |psi|^2 at the start of the substep is exact.
struct LocalStepper {
    const TrapSchedule& trap;
    double interaction_g;
    std::vector<double> v_static;  // cached potential once the trap is static
    bool have_static = false;

    void ensure_static(const Grid& g, double t_mid) {
        if (have_static || !trap.is_static_at(t_mid)) return;
        v_static.resize(g.size());
        const long nxl = g.nx;
#pragma omp parallel for schedule(static) num_threads(compute_threads())
        for (long ix = 0; ix < nxl; ++ix)
            for (int iy = 0; iy < g.ny; ++iy) {
                const std::size_t base = (std::size_t(ix) * g.ny + iy) * g.nz;
                for (int iz = 0; iz < g.nz; ++iz)
                    v_static[base + iz] =
                        trap.potential_at(g.x(int(ix)), g.y(iy), g.z(iz), t_mid);
            }
        have_static = true;
    }

    void apply(ComplexField& f, double t_mid, double dt) {
        const Grid& g = f.grid;
        auto* a = f.data();
        const double hbar = trap.constants.hbar;
        const double gc = interaction_g;
        ensure_static(g, t_mid);

        if (have_static && trap.is_static_at(t_mid)) {
            const double* v = v_static.data();
            const long n = long(g.size());
#pragma omp parallel for schedule(static) num_threads(compute_threads())
            for (long i = 0; i < n; ++i) {
                const double theta = -(v[i] + gc * std::norm(a[i])) * dt / hbar;
                a[i] *= std::polar(1.0, theta);
            }
            return;
        }

        if (trap.model == TrapSchedule::Model::harmonic) {
            const double m = trap.constants.atom_mass;
            const double xc = -trap.constants.gravity / (trap.omega_r * trap.omega_r) *
                              std::abs(trap.bias_field(t_mid)) / trap.bias0;
            const double cr = 0.5 * m * trap.omega_r * trap.omega_r;
            const double cz = 0.5 * m * trap.omega_z * trap.omega_z;
            const long nxl = g.nx;
#pragma omp parallel for schedule(static) num_threads(compute_threads())
            for (long ix = 0; ix < nxl; ++ix) {
                const double xp = g.x(int(ix)) - xc;
                for (int iy = 0; iy < g.ny; ++iy) {
                    const double y = g.y(iy);
                    const double vr = cr * (xp * xp + y * y);
                    const std::size_t base = (std::size_t(ix) * g.ny + iy) * g.nz;
                    for (int iz = 0; iz < g.nz; ++iz) {
                        const double z = g.z(iz);
                        const double v = vr + cz * z * z;
                        const double theta =
                            -(v + gc * std::norm(a[base + iz])) * dt / hbar;
                        a[base + iz] *= std::polar(1.0, theta);
                    }
                }
            }
            return;
        }

        // exact Ioffe-Pritchard + gravity, coefficients frozen at t_mid
        const double bz = trap.bias_field(t_mid);
        const double az = trap.axial_coefficient(t_mid);
        const double c2 = trap.coeffs.radial_gradient * trap.coeffs.radial_gradient;
        const double bza = bz * az;
        const double bz2 = bz * bz;
        const double mag = -trap.constants.lande_factor * trap.constants.bohr_magneton;
        const double grav = trap.constants.gravity * trap.constants.atom_mass;
        const long nxl = g.nx;
#pragma omp parallel for schedule(static) num_threads(compute_threads())
        for (long ix = 0; ix < nxl; ++ix) {
            const double x = g.x(int(ix));
            for (int iy = 0; iy < g.ny; ++iy) {
                const double y = g.y(iy);
                const double r2 = x * x + y * y;
                const double radial = (c2 - 0.5 * bza) * r2 + bz2;
                const std::size_t base = (std::size_t(ix) * g.ny + iy) * g.nz;
                for (int iz = 0; iz < g.nz; ++iz) {
                    const double z = g.z(iz);
                    const double b2 = radial + bza * z * z;
                    const double v = mag * std::sqrt(b2 > 0 ? b2 : 0.0) + grav * x;
                    const double theta =
                        -(v + gc * std::norm(a[base + iz])) * dt / hbar;
                    a[base + iz] *= std::polar(1.0, theta);
                }
            }
        }
    }
};

double max_abs2(const ComplexField& f) {
    const auto* a = f.data();
    const long n = long(f.grid.size());
    const int nt = compute_threads();
    std::vector<double> partial(nt, 0.0);
#pragma omp parallel num_threads(nt)
    {
        const int tid = omp_get_thread_num();
        const long lo = n * tid / nt, hi = n * (tid + 1) / nt;
        double m = 0.0;
        for (long i = lo; i < hi; ++i) m = std::max(m, std::norm(a[i]));
        partial[tid] = m;
    }
    double m = 0.0;
    for (double p : partial) m = std::max(m, p);
    return m;
}

double boundary_max_abs2(const ComplexField& f) {
    const Grid& g = f.grid;
    const auto* a = f.data();
    double m = 0.0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            m = std::max(m, std::norm(a[g.index(0, iy, iz)]));
            m = std::max(m, std::norm(a[g.index(g.nx - 1, iy, iz)]));
        }
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iz = 0; iz < g.nz; ++iz) {
            m = std::max(m, std::norm(a[g.index(ix, 0, iz)]));
            m = std::max(m, std::norm(a[g.index(ix, g.ny - 1, iz)]));
        }
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            m = std::max(m, std::norm(a[g.index(ix, iy, 0)]));
            m = std::max(m, std::norm(a[g.index(ix, iy, g.nz - 1)]));
        }
    return m;
}

}  // namespace

void kinetic_half_step(ComplexField& f, const SpectralTransform& fft, double hbar,
                       double mass, double dt) {
    const auto tab = kinetic_table(f.grid, hbar, mass, dt / 2.0);
    apply_spectral(f, fft, tab);
}

void local_step(ComplexField& f, const TrapSchedule& trap, double interaction_g,
                double t_mid, double dt) {
    LocalStepper ls{trap, interaction_g};
    ls.apply(f, t_mid, dt);
}

void strang_step(ComplexField& f, const SpectralTransform& fft,
                 const TrapSchedule& trap, double interaction_g, double dt) {
    const double hbar = trap.constants.hbar;
    const double mass = trap.constants.atom_mass;
    const auto khalf = kinetic_table(f.grid, hbar, mass, dt / 2.0);
    LocalStepper ls{trap, interaction_g};
    apply_spectral(f, fft, khalf);
    ls.apply(f, f.time + dt / 2.0, dt);
    apply_spectral(f, fft, khalf);
    f.time += dt;
}

EvolutionResult evolve(ComplexField& f, const SpectralTransform& fft,
                       const TrapSchedule& trap, double interaction_g,
                       const EvolutionConfig& config, StepObserver* observer) {
    config.validate(trap.omega_r);
    const Grid& g = f.grid;
    const double hbar = trap.constants.hbar;
    const double mass = trap.constants.atom_mass;
    const double dt = config.dt;
    const double t_start = f.time;
    const long n_steps = std::lround((config.t_end - t_start) / dt);

    if (config.noise_amplitude > 0) {
        std::mt19937_64 rng(config.noise_seed);
        std::normal_distribution<double> dist(0.0, 1.0);
        const double amp = config.noise_amplitude * std::sqrt(max_abs2(f));
        for (auto& zv : f.values)
            zv += amp * std::complex<double>(dist(rng), dist(rng));
    }

    // Materialization points: observer ticks, snapshots and the final step.
    std::set<long> boundaries;
    boundaries.insert(0);
    for (long s = config.observer_stride; s < n_steps; s += config.observer_stride)
        boundaries.insert(s);
    boundaries.insert(n_steps);
    std::vector<std::pair<long, double>> snapshot_steps;
    for (double ts : config.snapshot_times) {
        long s = std::lround((ts - t_start) / dt);
        s = std::clamp(s, 0L, n_steps);
        boundaries.insert(s);
        snapshot_steps.push_back({s, ts});
    }

    const auto khalf = kinetic_table(g, hbar, mass, dt / 2.0);
    const auto kfull = kinetic_table(g, hbar, mass, dt);
    LocalStepper ls{trap, interaction_g};

    EvolutionResult result;
    const double norm0 = norm_squared(f);

    auto materialize_actions = [&](long step) {
        f.time = t_start + step * dt;
        for (auto& [s, ts] : snapshot_steps)
            if (s == step) result.snapshots.push_back(f);

        const bool tick = (step % config.observer_stride == 0) || step == n_steps;
        if (!tick) return false;

        TimeSample sample;
        sample.t = f.time;
        sample.norm = norm_squared(f);
        if (!std::isfinite(sample.norm))
            throw NumericalBlowup(step, std::sqrt(max_abs2(f)),
                                  "evolve: non-finite norm (numerical blowup)");
        PotentialSampler vs = [&](double x, double y, double z) {
            return trap.potential_at(x, y, z, f.time);
        };
        sample.e_total =
            total_energy(f, fft, vs, interaction_g, hbar, mass).total();
        const CenterOfMass cm = center_of_mass(f);
        sample.x_cm = cm.x;
        sample.y_cm = cm.y;
        sample.z_cm = cm.z;
        if (boundary_max_abs2(f) > config.boundary_warn_frac * max_abs2(f))
            result.series.boundary_warning = true;
        if (observer) observer->on_sample(f, sample);
        result.series.samples.push_back(sample);
        (void)norm0;
        return observer && observer->stop_requested();
    };

    if (materialize_actions(0)) return result;

    long step = 0;
    auto next_boundary = [&](long s) {
        auto it = boundaries.upper_bound(s);
        return it == boundaries.end() ? n_steps : *it;
    };

    while (step < n_steps) {
        const long stop = next_boundary(step);
        // fused block: Khalf (L Kfull)^(m-1) L Khalf
        apply_spectral(f, fft, khalf);
        for (long s = step; s < stop; ++s) {
            ls.apply(f, t_start + (s + 0.5) * dt, dt);
            if (s + 1 < stop) apply_spectral(f, fft, kfull);
        }
        apply_spectral(f, fft, khalf);
        step = stop;
        if (materialize_actions(step)) break;
    }
    return result;
}

}  // namespace gpv
