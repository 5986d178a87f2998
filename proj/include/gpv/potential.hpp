#pragma once

#include "gpv/units.hpp"

namespace gpv {

/// Time-dependent Ioffe-Pritchard trap with gravity along +x.
///
/// The axial bias field is ramped linearly from +bias0 to -bias0 over
/// reversal_duration and held there; the sign of the axial curvature
/// coefficient follows the bias so the product stays confining. After the
/// reversal the potential equals its t=0 form.
struct TrapSchedule {
    enum class Model {
        exact,     // -g_L mu_B B(r,t) + G m x with the quadrupole B^2 expansion
        harmonic,  // 1/2 m wz^2 z^2 + 1/2 m wr^2 [y^2 + (x - x_c(t))^2]
    };

    TrapCoefficients coeffs;       // A (T/m^2), C (T/m)
    double bias0 = 1.0e-4;         // T
    double reversal_duration = 12e-3;  // s
    PhysicalConstants constants;
    double omega_r = 0;            // calibrated targets, rad/s
    double omega_z = 0;
    Model model = Model::exact;

    /// B_z(t): linear ramp to -bias0, then constant.
    /// Throws std::invalid_argument for t < 0.
    double bias_field(double t) const;

    /// A(t): sign flips with B_z so B_z(t)*A(t) >= 0.
    double axial_coefficient(double t) const;

    /// Quadrupole expansion of B^2, clamped at zero (the truncated series
    /// can dip below zero far off axis near the bias zero crossing).
    double b_squared(double r, double z, double t) const;

    /// Potential energy at an SI point, J.
    double potential_at(double x, double y, double z, double t) const;

    /// x-coordinate of the minimum of V(x,0,0,t), by 1D golden-section
    /// minimization of the exact potential (gravity sags the minimum to
    /// negative x).
    double potential_minimum_x(double t) const;

    /// Printed closed form Gm|B_z|/(g_L mu_B [C^2 - B_z A/2]); magnitude
    /// cross-check for potential_minimum_x.
    double closed_form_minimum_x(double t) const;

    /// True once the potential no longer depends on time.
    bool is_static_at(double t) const { return t >= reversal_duration; }

    void validate() const;
};

TrapSchedule make_trap(const PhysicalConstants& constants, double omega_r,
                       double omega_z, double bias0 = 1.0e-4,
                       double reversal_duration = 12e-3,
                       TrapSchedule::Model model = TrapSchedule::Model::exact);

}  // namespace gpv
