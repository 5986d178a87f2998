#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpv/field.hpp"
#include "gpv/potential.hpp"

namespace gpv {

struct NumericalBlowup : std::runtime_error {
    NumericalBlowup(long step, double max_abs, const std::string& what)
        : std::runtime_error(what), step(step), max_abs(max_abs) {}
    long step;
    double max_abs;
};

struct EvolutionConfig {
    double dt = 0;          // s; must satisfy dt*omega_r <= 0.01
    double t_end = 0;       // s
    int observer_stride = 100;
    std::vector<double> snapshot_times;  // s, captured at the nearest step
    double boundary_warn_frac = 1e-8;    // boundary density vs peak warning level
    double noise_amplitude = 0;          // optional seeded symmetry-breaking noise
    std::uint64_t noise_seed = 12345;

    void validate(double omega_r) const;
};

struct TimeSample {
    double t = 0;
    double norm = 0;
    double e_total = 0;
    double x_cm = 0, y_cm = 0, z_cm = 0;
    // Analysis columns, filled by the observer when one is attached.
    double an_z = 0;
    int minima_count = 0;
    double min_separation = 0;
};

struct TimeSeries {
    std::vector<TimeSample> samples;
    bool boundary_warning = false;  // density at the box faces exceeded the floor
};

/// Observer hook invoked every observer_stride steps on the materialized
/// field. May fill the analysis columns of the sample and may stop the run.
class StepObserver {
public:
    virtual ~StepObserver() = default;
    virtual void on_sample(const ComplexField& f, TimeSample& sample) = 0;
    virtual bool stop_requested() const { return false; }
};

/// One Strang step: half kinetic, full local phase with the midpoint-time
/// potential, half kinetic. Advances f.time by dt.
void strang_step(ComplexField& f, const SpectralTransform& fft,
                 const TrapSchedule& trap, double interaction_g, double dt);

/// Substeps, exposed for accuracy tests.
void kinetic_half_step(ComplexField& f, const SpectralTransform& fft, double hbar,
                       double mass, double dt);
void local_step(ComplexField& f, const TrapSchedule& trap, double interaction_g,
                double t_mid, double dt);

struct EvolutionResult {
    TimeSeries series;
    std::vector<ComplexField> snapshots;
};

/// Split-operator propagation from f.time to t_end. Consecutive kinetic
/// half steps between observer samples are fused into full steps, so a
/// stride-s block costs s+1 transforms instead of 2s.
EvolutionResult evolve(ComplexField& f, const SpectralTransform& fft,
                       const TrapSchedule& trap, double interaction_g,
                       const EvolutionConfig& config,
                       StepObserver* observer = nullptr);

}  // namespace gpv
