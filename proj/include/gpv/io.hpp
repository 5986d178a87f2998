#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpv/analysis.hpp"
#include "gpv/dynamics.hpp"
#include "gpv/field.hpp"
#include "gpv/units.hpp"

namespace gpv {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full run configuration, parsed from a key = value file with # comments.
/// Unknown keys are rejected with the offending line; every field has a
/// default that reproduces the an_z = 2.56 scenario.
struct RunConfig {
    // physics
    double an_z = 2.56;               // target density parameter; <0 means "use n_particles"
    double n_particles = 0;           // explicit N (used when an_z < 0)
    double scattering_length = 2.75e-9;
    double atom_mass = 3.8175406e-26;
    double hbar = 1.054571817e-34;
    double bohr_magneton = 9.2740100783e-24;
    double gravity = 9.80665;
    double lande_factor = -0.25;
    double omega_r_hz = 220.0;        // ordinary frequencies, omega = 2 pi f
    double omega_z_hz = 12.0;
    bool frequencies_are_angular = false;
    double bias0 = 1.0e-4;            // T
    double reversal_ms = 12.0;
    std::string trap_model = "exact";   // exact | harmonic

    // grid ("auto" extents follow the Thomas-Fermi size with margin)
    int nx = 96, ny = 96, nz = 192;
    double box_x = 0, box_y = 0, box_z = 0;  // m; 0 -> auto

    // evolution
    double dt = 0;                    // s; 0 -> 5e-3/omega_r
    double t_end = 0.060;             // s
    int observer_stride = 100;
    std::vector<double> snapshot_ms;  // full-field snapshots at these times
    bool stop_after_split = true;
    double noise_amplitude = 0.0;
    unsigned long noise_seed = 12345;

    // ground state
    int winding = 2;
    double tau_osc = 1e-3;            // final imaginary step, units of 1/omega_r
    double gs_tolerance = 1e-10;      // per unit omega_r*tau
    long gs_max_iters = 400000;

    // analysis
    double imaging_halfwidth = 15e-6;
    double mask_frac = 0.10;
    double merge_frac = 0.25;
    double min_depth_frac = 0.0;
    double reference_diameter = 0;    // m; 0 -> compute from the kappa=1 state
    double frame_interval_ms = 0;     // analysis frame cadence; 0 -> observer stride

    // execution
    int fft_threads = 0;              // 0 -> auto
    int workers = 0;                  // sweep parallelism; 0 -> GPV_WORKERS or 1
    std::string out_dir = "out";

    // derived
    double omega_r() const;
    double omega_z() const;
    PhysicalConstants constants() const;

    void validate() const;
};

/// Parses a config file. Diagnostics name the key and line number.
RunConfig parse_config(const std::filesystem::path& path);
/// Parses config text (used by parse_config and the tests).
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
/// Canonical key = value echo of the resolved configuration; reparsing it
/// reproduces the same RunConfig.
std::string echo_config(const RunConfig& config);

/// Fixed-layout binary snapshot:
///   magic "GPV1", version u32, nx ny nz u32,
///   dx dy dz x0 y0 z0 t N as f64, then nx*ny*nz (re,im) f64 pairs,
///   C-order with z fastest, little-endian.
void write_snapshot(const ComplexField& f, double n_particles,
                    const std::filesystem::path& path);
struct Snapshot {
    ComplexField field;
    double n_particles = 0;
};
Snapshot read_snapshot(const std::filesystem::path& path);

/// Delimited time-series writer; one header row, fixed column order
/// (t, norm, E_total, x_cm, y_cm, z_cm, an_z, minima_count, min_separation),
/// full double precision.
void write_series(const TimeSeries& ts, const std::filesystem::path& path);
TimeSeries read_series(const std::filesystem::path& path);

}  // namespace gpv
