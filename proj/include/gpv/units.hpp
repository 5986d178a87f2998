#pragma once

namespace gpv {

/// Physical constants in SI units. Defaults describe a 23Na condensate in
/// the weak-field seeking state; everything is overridable from the run
/// configuration.
struct PhysicalConstants {
    double hbar = 1.054571817e-34;        // J s
    double atom_mass = 3.8175406e-26;     // kg (23Na)
    double scattering_length = 2.75e-9;   // m
    double bohr_magneton = 9.2740100783e-24;  // J/T
    double gravity = 9.80665;             // m/s^2
    double lande_factor = -0.25;

    /// s-wave contact coupling g = 4*pi*hbar^2*a/m (J m^3).
    double interaction_g() const;

    /// Throws std::invalid_argument on nonpositive constants or a < 0.
    void validate() const;
};

/// Harmonic-oscillator unit system built on the radial trap frequency.
struct UnitSystem {
    double length_unit;   // sqrt(hbar/(m*omega_r)), m
    double time_unit;     // 1/omega_r, s
    double energy_unit;   // hbar*omega_r, J
    double omega_r;       // rad/s
    double omega_z;       // rad/s

    double trap_ratio() const { return omega_z / omega_r; }

    double length_to_dimensionless(double si) const { return si / length_unit; }
    double length_to_si(double dimensionless) const { return dimensionless * length_unit; }
    double time_to_dimensionless(double si) const { return si / time_unit; }
    double time_to_si(double dimensionless) const { return dimensionless * time_unit; }
    double energy_to_dimensionless(double si) const { return si / energy_unit; }
    double energy_to_si(double dimensionless) const { return dimensionless * energy_unit; }
};

UnitSystem oscillator_units(const PhysicalConstants& constants,
                            double omega_r, double omega_z);

/// Ioffe-Pritchard coefficients calibrated so the t=0 trap is harmonic with
/// the requested frequencies near its minimum.
struct TrapCoefficients {
    double axial_curvature;   // A, T/m^2
    double radial_gradient;   // C, T/m
};

/// A = 4 m omega_z^2 / mu_B, C^2 = bias0*A/2 + 4 m omega_r^2 bias0 / mu_B.
TrapCoefficients calibrate_trap(const PhysicalConstants& constants,
                                double omega_r, double omega_z, double bias0);

}  // namespace gpv
