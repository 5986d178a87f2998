#include "gpv/units.hpp"

#include <cmath>
#include <stdexcept>

namespace gpv {

double PhysicalConstants::interaction_g() const {
    return 4.0 * M_PI * hbar * hbar * scattering_length / atom_mass;
}

void PhysicalConstants::validate() const {
    if (!(hbar > 0) || !(atom_mass > 0) || !(bohr_magneton > 0) || !(gravity >= 0))
        throw std::invalid_argument("physical constants must be positive");
    if (scattering_length < 0)
        throw std::invalid_argument("attractive interactions (a < 0) are not supported");
}

UnitSystem oscillator_units(const PhysicalConstants& constants, double omega_r,
                            double omega_z) {
    constants.validate();
    if (!(omega_r > 0))
        throw std::invalid_argument("oscillator_units: omega_r must be positive");
    if (omega_z < 0)
        throw std::invalid_argument("oscillator_units: omega_z must be nonnegative");
    UnitSystem u;
    u.omega_r = omega_r;
    u.omega_z = omega_z;
    u.length_unit = std::sqrt(constants.hbar / (constants.atom_mass * omega_r));
    u.time_unit = 1.0 / omega_r;
    u.energy_unit = constants.hbar * omega_r;
    return u;
}

TrapCoefficients calibrate_trap(const PhysicalConstants& constants, double omega_r,
                                double omega_z, double bias0) {
    constants.validate();
    if (!(bias0 > 0))
        throw std::invalid_argument("calibrate_trap: bias0 must be positive");
    if (!(omega_r > 0) || omega_z < 0)
        throw std::invalid_argument("calibrate_trap: bad trap frequencies");
    const double m = constants.atom_mass;
    const double mu_b = constants.bohr_magneton;
    TrapCoefficients c;
    c.axial_curvature = 4.0 * m * omega_z * omega_z / mu_b;
    const double c2 = bias0 * c.axial_curvature / 2.0 +
                      4.0 * m * omega_r * omega_r * bias0 / mu_b;
    if (!(c2 > 0))
        throw std::domain_error("calibrate_trap: infeasible trap (C^2 <= 0)");
    c.radial_gradient = std::sqrt(c2);
    return c;
}

}  // namespace gpv
