#pragma once

#include <stdexcept>

#include "gpv/field.hpp"
#include "gpv/potential.hpp"

namespace gpv {

struct ConvergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StepTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GroundStateConfig {
    int winding = 2;
    double n_particles = 0;
    double interaction_g = 0;     // J m^3; 0 selects the noninteracting gas
    double tau_step = 0;          // final imaginary step, s (0 -> 1e-3/omega_r)
    double tolerance = 1e-10;     // |d mu / mu| per unit of omega_r * tau
    long max_iters = 400000;
    bool continuation = true;     // start at coarse tau and anneal down

    void validate() const;
};

struct GroundStateResult {
    ComplexField state;
    double mu = 0;         // J
    long iterations = 0;
    double final_tau = 0;  // s
};

/// Multiplies f by exp(i*winding*theta) where theta is the azimuth about
/// the vertical line (axis_x, axis_y). Density is unchanged.
/// Throws std::invalid_argument if the axis lies outside the grid.
void imprint_phase(ComplexField& f, int winding, double axis_x, double axis_y);

/// Thomas-Fermi modulus (Gaussian in the noninteracting case) for the trap
/// frozen at t=0, normalized to n_particles, without any phase.
ComplexField thomas_fermi_seed(const Grid& grid, const TrapSchedule& trap,
                               double n_particles, double interaction_g);

/// Imaginary-time relaxation to the energy-minimized state with an enforced
/// phase winding about the t=0 potential minimum axis. Each step renormalizes
/// and re-imposes exp(i*kappa*theta) (modulus kept, phase replaced), so the
/// dynamically unstable kappa=2 state survives the relaxation.
GroundStateResult imaginary_time_solve(const GroundStateConfig& config,
                                       const TrapSchedule& trap,
                                       ComplexField seed);

/// Convenience: Thomas-Fermi seed, imprint, solve.
GroundStateResult solve_ground_state(const GroundStateConfig& config,
                                     const TrapSchedule& trap, const Grid& grid);

/// Relative GP stationarity residual ||(H - mu) psi|| / ||mu psi||.
double stationarity_residual(const ComplexField& f, const TrapSchedule& trap,
                             double interaction_g, double mu);

/// Diameter of the single-quantum vortex core: twice the azimuthally
/// averaged radial distance from the core to 75% of the peak of the column
/// density n(x,y) over |z - z_cm| <= imaging_halfwidth.
/// Throws std::invalid_argument unless the state carries winding 1.
double reference_vortex_diameter(const ComplexField& kappa1_state,
                                 double imaging_halfwidth);

struct AnzSolveResult {
    double n_particles = 0;
    double achieved_anz = 0;
    GroundStateResult ground_state;
};

/// Finds N such that the converged ground state at N has
/// |an_z - target_anz| < tol_anz, by bisection from a Thomas-Fermi bracket.
/// target_anz = 0 returns the noninteracting configuration (interaction off,
/// nominal N). Warm-starts each bisection iterate from the previous state.
AnzSolveResult particle_number_for_anz(double target_anz,
                                       const GroundStateConfig& base_config,
                                       const TrapSchedule& trap, const Grid& grid,
                                       double tol_anz = 1e-2);

}  // namespace gpv
