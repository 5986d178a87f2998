#include "gpv/groundstate.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "gpv/analysis.hpp"
#include "internal.hpp"

namespace gpv {

namespace {

using detail::compute_threads;
using detail::parallel_sum;

// 2D table of exp(i*kappa*theta) about (axis_x, axis_y), broadcast over z.
std::vector<std::complex<double>> phase_table(const Grid& g, int winding,
                                              double axis_x, double axis_y) {
    std::vector<std::complex<double>> tab(std::size_t(g.nx) * g.ny);
    for (int ix = 0; ix < g.nx; ++ix) {
        for (int iy = 0; iy < g.ny; ++iy) {
            const double th = std::atan2(g.y(iy) - axis_y, g.x(ix) - axis_x);
            tab[std::size_t(ix) * g.ny + iy] = std::polar(1.0, winding * th);
        }
    }
    return tab;
}

// Potential of the trap frozen at t=0, shifted so its minimum is ~0; the
// shift cancels a large constant magnetic offset that would otherwise
// swamp the chemical-potential convergence metric.
std::vector<double> sample_shifted_potential(const Grid& g, const TrapSchedule& trap,
                                             double* v_floor_out) {
    const double x_min = trap.potential_minimum_x(0.0);
    const double v_floor = trap.potential_at(x_min, 0.0, 0.0, 0.0);
    std::vector<double> v(g.size());
    const int nt = compute_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (long ix = 0; ix < g.nx; ++ix) {
        for (int iy = 0; iy < g.ny; ++iy) {
            const std::size_t base = (std::size_t(ix) * g.ny + iy) * g.nz;
            for (int iz = 0; iz < g.nz; ++iz)
                v[base + iz] =
                    trap.potential_at(g.x(int(ix)), g.y(iy), g.z(iz), 0.0) - v_floor;
        }
    }
    if (v_floor_out) *v_floor_out = v_floor;
    return v;
}

}  // namespace

void GroundStateConfig::validate() const {
    if (!(n_particles > 0))
        throw std::invalid_argument("ground state: n_particles must be positive");
    if (!(tolerance > 0))
        throw std::invalid_argument("ground state: tolerance must be positive");
    if (tau_step < 0)
        throw std::invalid_argument("ground state: tau_step must be nonnegative");
    if (std::abs(winding) > 4)
        throw std::invalid_argument("ground state: |winding| must be <= 4");
    if (interaction_g < 0)
        throw std::invalid_argument("ground state: attractive interactions unsupported");
}

void imprint_phase(ComplexField& f, int winding, double axis_x, double axis_y) {
    const Grid& g = f.grid;
    if (axis_x < g.x0 || axis_x > g.x(g.nx - 1) || axis_y < g.y0 ||
        axis_y > g.y(g.ny - 1))
        throw std::invalid_argument("imprint_phase: axis outside grid");
    if (winding == 0) return;
    const auto tab = phase_table(g, winding, axis_x, axis_y);
    auto* a = f.data();
#pragma omp parallel for schedule(static) num_threads(compute_threads())
    for (long ix = 0; ix < g.nx; ++ix) {
        for (int iy = 0; iy < g.ny; ++iy) {
            const auto ph = tab[std::size_t(ix) * g.ny + iy];
            const std::size_t base = (std::size_t(ix) * g.ny + iy) * g.nz;
            for (int iz = 0; iz < g.nz; ++iz) a[base + iz] *= ph;
        }
    }
}

ComplexField thomas_fermi_seed(const Grid& grid, const TrapSchedule& trap,
                               double n_particles, double interaction_g) {
    ComplexField f(grid);
    double v_floor = 0.0;
    const auto v = sample_shifted_potential(grid, trap, &v_floor);
    auto* a = f.data();
    const long n = long(grid.size());

    if (interaction_g > 0) {
        // Bisect the TF chemical potential so the truncated profile holds N.
        auto number_at = [&](double mu) {
            double acc = 0.0;
            for (long i = 0; i < n; ++i)
                acc += std::max(0.0, mu - v[i]);
            return acc / interaction_g * grid.cell_volume();
        };
        double lo = 0.0, hi = 1e-30;
        while (number_at(hi) < n_particles) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (number_at(mid) < n_particles ? lo : hi) = mid;
        }
        const double mu = 0.5 * (lo + hi);
        for (long i = 0; i < n; ++i)
            a[i] = std::sqrt(std::max(0.0, mu - v[i]) / interaction_g);
    } else {
        // Oscillator Gaussian about the sagged minimum.
        const double m = trap.constants.atom_mass;
        const double hbar = trap.constants.hbar;
        const double wr = trap.omega_r, wz = trap.omega_z > 0 ? trap.omega_z : trap.omega_r;
        const double sr2 = hbar / (m * wr), sz2 = hbar / (m * wz);
        const double xc = trap.potential_minimum_x(0.0);
        for (int ix = 0; ix < grid.nx; ++ix)
            for (int iy = 0; iy < grid.ny; ++iy)
                for (int iz = 0; iz < grid.nz; ++iz) {
                    const double x = grid.x(ix) - xc, y = grid.y(iy), z = grid.z(iz);
                    a[grid.index(ix, iy, iz)] =
                        std::exp(-(x * x + y * y) / (2.0 * sr2) - z * z / (2.0 * sz2));
                }
    }
    normalize(f, n_particles);
    return f;
}

GroundStateResult imaginary_time_solve(const GroundStateConfig& config,
                                       const TrapSchedule& trap, ComplexField seed) {
    config.validate();
    trap.validate();
    const Grid& g = seed.grid;
    const long n = long(g.size());
    if (!(norm_squared(seed) > 0))
        throw std::invalid_argument("imaginary_time_solve: zero seed");

    const double hbar = trap.constants.hbar;
    const double mass = trap.constants.atom_mass;
    const double omega_r = trap.omega_r;
    const double tau_final = config.tau_step > 0 ? config.tau_step : 1e-3 / omega_r;

    SpectralTransform fft(g);
    const int nt = fft.threads();

    double v_floor = 0.0;
    const auto v = sample_shifted_potential(g, trap, &v_floor);
    const double axis_x = trap.potential_minimum_x(0.0);
    const auto phase = phase_table(g, config.winding, axis_x, 0.0);

    // Staged relaxation: coarse steps burn off the slow axial transient,
    // the configured step sets the final fixed-point bias.
    std::vector<double> stages;
    if (config.continuation) {
        for (double s : {0.1, 0.03, 0.01, 0.003})
            if (s / omega_r > tau_final * 1.5) stages.push_back(s / omega_r);
    }
    stages.push_back(tau_final);

    ComplexField& f = seed;
    normalize(f, config.n_particles);
    auto* a = f.data();

    const auto kx = g.wavenumbers_x(), ky = g.wavenumbers_y(), kz = g.wavenumbers_z();

    long iter = 0;
    double mu_est = 0.0;
    const int check_every = 10;

    std::vector<double> kin_tab;   // exp(-hbar k^2 tau / 2m)
    std::vector<double> vhalf_tab; // exp(-(V - V_floor) tau / 2 hbar)

    double last_energy = 0.0;
    bool have_energy = false;
    int energy_strikes = 0;

    for (double tau : stages) {
        kin_tab.assign(g.size(), 0.0);
        vhalf_tab.assign(g.size(), 0.0);
#pragma omp parallel for schedule(static) num_threads(nt)
        for (long i = 0; i < n; ++i) {
            const int iz = int(i % g.nz);
            const long ixy = i / g.nz;
            const int iy = int(ixy % g.ny);
            const int ix = int(ixy / g.ny);
            const double k2 = kx[ix] * kx[ix] + ky[iy] * ky[iy] + kz[iz] * kz[iz];
            kin_tab[i] = std::exp(-hbar * k2 * tau / (2.0 * mass));
            vhalf_tab[i] = std::exp(-v[i] * tau / (2.0 * hbar));
        }

        double mu_prev = 0.0;
        bool have_prev = false;
        have_energy = false;
        energy_strikes = 0;
        long stage_iter = 0;

        while (true) {
            if (++iter > config.max_iters)
                throw ConvergenceFailure("imaginary_time_solve: max_iters exceeded");
            ++stage_iter;

            const double gcoef = config.interaction_g;
            const double half = tau / (2.0 * hbar);
            // local half step
#pragma omp parallel for schedule(static) num_threads(nt)
            for (long i = 0; i < n; ++i) {
                double w = vhalf_tab[i];
                if (gcoef != 0.0) w *= std::exp(-gcoef * std::norm(a[i]) * half);
                a[i] *= w;
            }
            // full kinetic step
            fft.forward(a);
#pragma omp parallel for schedule(static) num_threads(nt)
            for (long i = 0; i < n; ++i) a[i] *= kin_tab[i];
            fft.inverse(a);
            // local half step
#pragma omp parallel for schedule(static) num_threads(nt)
            for (long i = 0; i < n; ++i) {
                double w = vhalf_tab[i];
                if (gcoef != 0.0) w *= std::exp(-gcoef * std::norm(a[i]) * half);
                a[i] *= w;
            }

            // chemical potential from the norm decay, then renormalize and
            // re-impose the winding phase (modulus kept).
            const double nn = norm_squared(f);
            mu_est = -hbar * std::log(nn / config.n_particles) / (2.0 * tau);
            const double scale = std::sqrt(config.n_particles / nn);
#pragma omp parallel for schedule(static) num_threads(nt)
            for (long ix = 0; ix < g.nx; ++ix)
                for (int iy = 0; iy < g.ny; ++iy) {
                    const auto ph = phase[std::size_t(ix) * g.ny + iy];
                    const std::size_t base = (std::size_t(ix) * g.ny + iy) * g.nz;
                    for (int iz = 0; iz < g.nz; ++iz) {
                        const double mod = std::abs(a[base + iz]) * scale;
                        a[base + iz] = mod * ph;
                    }
                }

            if (stage_iter % check_every == 0) {
                // Energy must not increase along the flow.
                EnergyBreakdown eb;
                {
                    ComplexField spec = f;
                    fft.forward(spec.data());
                    const auto* F = spec.data();
                    const double ksum = parallel_sum(n, [&](long i) {
                        const int iz = int(i % g.nz);
                        const long ixy = i / g.nz;
                        const int iy = int(ixy % g.ny);
                        const int ix = int(ixy / g.ny);
                        const double k2 =
                            kx[ix] * kx[ix] + ky[iy] * ky[iy] + kz[iz] * kz[iz];
                        return k2 * std::norm(F[i]);
                    });
                    eb.kinetic = hbar * hbar / (2.0 * mass) * ksum *
                                 g.cell_volume() / double(n);
                }
                const double vsum =
                    parallel_sum(n, [&](long i) { return v[i] * std::norm(a[i]); });
                const double isum = parallel_sum(n, [&](long i) {
                    const double d = std::norm(a[i]);
                    return d * d;
                });
                eb.potential = vsum * g.cell_volume();
                eb.interaction = 0.5 * config.interaction_g * isum * g.cell_volume();
                const double energy = eb.total();
                if (have_energy) {
                    if (energy > last_energy + std::abs(last_energy) * 1e-9) {
                        if (++energy_strikes >= 3)
                            throw StepTooLarge(
                                "imaginary_time_solve: energy increasing; "
                                "imaginary step too large");
                    } else {
                        energy_strikes = 0;
                    }
                }
                last_energy = energy;
                have_energy = true;

                if (have_prev) {
                    const double scale_mu = std::max(std::abs(mu_est),
                                                     0.1 * hbar * omega_r);
                    const double rate = std::abs(mu_est - mu_prev) / scale_mu /
                                        (check_every * tau * omega_r);
                    if (rate < config.tolerance && stage_iter > 3 * check_every)
                        break;
                }
                mu_prev = mu_est;
                have_prev = true;
            }
        }
    }

    GroundStateResult result;
    result.state = std::move(f);
    result.iterations = iter;
    result.final_tau = tau_final;
    // Final chemical potential from the functional, with the floor restored.
    SpectralTransform& fft2 = fft;
    PotentialSampler sampler = [&](double x, double y, double z) {
        return trap.potential_at(x, y, z, 0.0);
    };
    result.mu = chemical_potential(result.state, fft2, sampler,
                                   config.interaction_g, hbar, mass);
    return result;
}

GroundStateResult solve_ground_state(const GroundStateConfig& config,
                                     const TrapSchedule& trap, const Grid& grid) {
    ComplexField seed =
        thomas_fermi_seed(grid, trap, config.n_particles, config.interaction_g);
    if (config.winding != 0)
        imprint_phase(seed, config.winding, trap.potential_minimum_x(0.0), 0.0);
    return imaginary_time_solve(config, trap, std::move(seed));
}

double stationarity_residual(const ComplexField& f, const TrapSchedule& trap,
                             double interaction_g, double mu) {
    const Grid& g = f.grid;
    const long n = long(g.size());
    const double hbar = trap.constants.hbar;
    const double mass = trap.constants.atom_mass;
    SpectralTransform fft(g);

    ComplexField hpsi = f;
    fft.forward(hpsi.data());
    const auto kx = g.wavenumbers_x(), ky = g.wavenumbers_y(), kz = g.wavenumbers_z();
    auto* hp = hpsi.data();
    for (long i = 0; i < n; ++i) {
        const int iz = int(i % g.nz);
        const long ixy = i / g.nz;
        const int iy = int(ixy % g.ny);
        const int ix = int(ixy / g.ny);
        const double k2 = kx[ix] * kx[ix] + ky[iy] * ky[iy] + kz[iz] * kz[iz];
        hp[i] *= hbar * hbar * k2 / (2.0 * mass);
    }
    fft.inverse(hp);
    const auto* a = f.data();
    double num = 0.0, den = 0.0;
    for (long i = 0; i < n; ++i) {
        const int iz = int(i % g.nz);
        const long ixy = i / g.nz;
        const int iy = int(ixy % g.ny);
        const int ix = int(ixy / g.ny);
        const double v = trap.potential_at(g.x(ix), g.y(iy), g.z(iz), 0.0);
        const std::complex<double> r =
            hp[i] + (v + interaction_g * std::norm(a[i]) - mu) * a[i];
        num += std::norm(r);
        den += std::norm(mu * a[i]);
    }
    return std::sqrt(num / den);
}

double reference_vortex_diameter(const ComplexField& kappa1_state,
                                 double imaging_halfwidth) {
    const ColumnDensity cd = column_density(kappa1_state, imaging_halfwidth);
    // Deepest interior minimum marks the core.
    const double cell = std::max(cd.dx, cd.dy);
    const CoreMinima cm = find_core_minima(cd, 8.0 * cell);
    if (cm.minima.empty())
        throw std::invalid_argument("reference_vortex_diameter: no core minimum");
    const Minimum& core = cm.minima.front();

    double peak = 0.0;
    for (double vv : cd.values) peak = std::max(peak, vv);
    if (core.value > 0.5 * peak)
        throw std::invalid_argument("reference_vortex_diameter: no single-quantum core");

    auto sample = [&](double x, double y) {
        // bilinear interpolation, clamped to the image
        double fx = (x - cd.x0) / cd.dx, fy = (y - cd.y0) / cd.dy;
        fx = std::clamp(fx, 0.0, double(cd.nx - 1) - 1e-9);
        fy = std::clamp(fy, 0.0, double(cd.ny - 1) - 1e-9);
        const int ix = int(fx), iy = int(fy);
        const double tx = fx - ix, ty = fy - iy;
        return (1 - tx) * (1 - ty) * cd.at(ix, iy) + tx * (1 - ty) * cd.at(ix + 1, iy) +
               (1 - tx) * ty * cd.at(ix, iy + 1) + tx * ty * cd.at(ix + 1, iy + 1);
    };

    const double threshold = 0.75 * peak;
    const double dr = 0.25 * std::min(cd.dx, cd.dy);
    const double r_max = 0.5 * std::min(cd.nx * cd.dx, cd.ny * cd.dy);
    const int n_angles = 64;
    std::vector<double> radii;
    radii.reserve(n_angles);
    for (int j = 0; j < n_angles; ++j) {
        const double phi = 2.0 * M_PI * j / n_angles;
        const double cx = std::cos(phi), cy = std::sin(phi);
        double prev = sample(core.x, core.y);
        for (double r = dr; r < r_max; r += dr) {
            const double val = sample(core.x + r * cx, core.y + r * cy);
            if (val >= threshold) {
                // linear interpolation between the last two samples
                const double frac = (threshold - prev) / (val - prev);
                radii.push_back(r - dr + frac * dr);
                break;
            }
            prev = val;
        }
    }
    if (radii.size() < std::size_t(n_angles / 2))
        throw std::invalid_argument("reference_vortex_diameter: 75% level not reached");
    double mean = 0.0;
    for (double r : radii) mean += r;
    mean /= double(radii.size());
    return 2.0 * mean;
}

AnzSolveResult particle_number_for_anz(double target_anz,
                                       const GroundStateConfig& base_config,
                                       const TrapSchedule& trap, const Grid& grid,
                                       double tol_anz) {
    if (target_anz < 0)
        throw std::invalid_argument("particle_number_for_anz: negative target");

    const double a_s = trap.constants.scattering_length;
    GroundStateConfig config = base_config;

    if (target_anz == 0.0) {
        config.interaction_g = 0.0;
        if (!(config.n_particles > 0)) config.n_particles = 1e5;
        AnzSolveResult res;
        res.n_particles = config.n_particles;
        res.achieved_anz = 0.0;
        res.ground_state = solve_ground_state(config, trap, grid);
        return res;
    }

    config.interaction_g = trap.constants.interaction_g();

    // Thomas-Fermi starting estimate: an_z = (mu / 2 hbar w_r)^2 and
    // mu = (hbar wbar / 2) (15 N a / abar)^(2/5).
    const double hbar = trap.constants.hbar;
    const double m = trap.constants.atom_mass;
    const double wr = trap.omega_r, wz = trap.omega_z;
    const double wbar = std::cbrt(wr * wr * wz);
    const double abar = std::sqrt(hbar / (m * wbar));
    const double mu_tf = 2.0 * hbar * wr * std::sqrt(target_anz);
    const double n_tf =
        abar / (15.0 * a_s) * std::pow(2.0 * mu_tf / (hbar * wbar), 2.5);

    ComplexField warm;  // previous converged state, reused as the next seed
    auto evaluate = [&](double n_particles) {
        config.n_particles = n_particles;
        ComplexField seed;
        if (warm.values.empty()) {
            seed = thomas_fermi_seed(grid, trap, n_particles, config.interaction_g);
            if (config.winding != 0)
                imprint_phase(seed, config.winding, trap.potential_minimum_x(0.0), 0.0);
        } else {
            seed = warm;
            normalize(seed, n_particles);
        }
        GroundStateResult gs = imaginary_time_solve(config, trap, std::move(seed));
        warm = gs.state;
        const double anz = compute_anz(gs.state, a_s);
        return std::pair<double, GroundStateResult>(anz, std::move(gs));
    };

    // First evaluation at the TF estimate tightens the bracket before
    // bisection (an_z is monotone increasing in N).
    auto [anz0, gs0] = evaluate(n_tf);
    if (std::abs(anz0 - target_anz) < tol_anz) {
        return {n_tf, anz0, std::move(gs0)};
    }
    double n_probe = n_tf * std::pow(target_anz / anz0, 1.25);
    double lo, hi;
    if (anz0 < target_anz) { lo = n_tf; hi = std::max(n_probe * 1.1, n_tf * 1.2); }
    else { hi = n_tf; lo = std::min(n_probe * 0.9, n_tf * 0.8); }

    double anz_lo = anz0, anz_hi = anz0;
    GroundStateResult gs_best = std::move(gs0);
    double n_best = n_tf, anz_best = anz0;

    auto consider = [&](double n_particles, double anz, GroundStateResult&& gs) {
        if (std::abs(anz - target_anz) < std::abs(anz_best - target_anz)) {
            anz_best = anz;
            n_best = n_particles;
            gs_best = std::move(gs);
        }
    };

    // Make sure the bracket actually straddles the target.
    for (int attempt = 0;; ++attempt) {
        if (attempt > 8)
            throw ConvergenceFailure("particle_number_for_anz: bracket expansion failed");
        auto [al, gl] = evaluate(lo);
        anz_lo = al;
        consider(lo, al, std::move(gl));
        if (anz_lo < target_anz) break;
        lo *= 0.6;
    }
    for (int attempt = 0;; ++attempt) {
        if (attempt > 8)
            throw ConvergenceFailure("particle_number_for_anz: bracket expansion failed");
        auto [ah, gh] = evaluate(hi);
        anz_hi = ah;
        consider(hi, ah, std::move(gh));
        if (anz_hi > target_anz) break;
        hi *= 1.6;
    }

    for (int it = 0; it < 40; ++it) {
        if (std::abs(anz_best - target_anz) < tol_anz) {
            AnzSolveResult res;
            res.n_particles = n_best;
            res.achieved_anz = anz_best;
            res.ground_state = std::move(gs_best);
            return res;
        }
        const double mid = 0.5 * (lo + hi);
        auto [am, gm] = evaluate(mid);
        consider(mid, am, std::move(gm));
        if (am < target_anz) { lo = mid; anz_lo = am; }
        else { hi = mid; anz_hi = am; }
    }
    throw ConvergenceFailure("particle_number_for_anz: bisection did not converge");
}

}  // namespace gpv
