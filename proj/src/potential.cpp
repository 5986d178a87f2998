#include "gpv/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace gpv {

void TrapSchedule::validate() const {
    constants.validate();
    if (!(reversal_duration > 0))
        throw std::invalid_argument("trap: reversal_duration must be positive");
    if (!(bias0 > 0))
        throw std::invalid_argument("trap: bias0 must be positive");
}

double TrapSchedule::bias_field(double t) const {
    if (t < 0)
        throw std::invalid_argument("bias_field: negative time");
    if (t >= reversal_duration) return -bias0;
    return bias0 * (1.0 - 2.0 * t / reversal_duration);
}

double TrapSchedule::axial_coefficient(double t) const {
    return bias_field(t) >= 0 ? coeffs.axial_curvature : -coeffs.axial_curvature;
}

double TrapSchedule::b_squared(double r, double z, double t) const {
    const double bz = bias_field(t);
    const double a = axial_coefficient(t);
    const double c2 = coeffs.radial_gradient * coeffs.radial_gradient;
    const double b2 = c2 * r * r + bz * a * (z * z - 0.5 * r * r) + bz * bz;
    return b2 > 0 ? b2 : 0.0;
}

double TrapSchedule::potential_at(double x, double y, double z, double t) const {
    const double m = constants.atom_mass;
    if (model == Model::harmonic) {
        const double xc = -constants.gravity / (omega_r * omega_r) *
                          std::abs(bias_field(t)) / bias0;
        const double dxp = x - xc;
        return 0.5 * m * (omega_z * omega_z * z * z +
                          omega_r * omega_r * (y * y + dxp * dxp));
    }
    const double r2 = x * x + y * y;
    const double b = std::sqrt(b_squared(std::sqrt(r2), z, t));
    return -constants.lande_factor * constants.bohr_magneton * b +
           constants.gravity * m * x;
}

double TrapSchedule::closed_form_minimum_x(double t) const {
    const double bz = bias_field(t);
    const double denom = constants.lande_factor * constants.bohr_magneton *
                         (coeffs.radial_gradient * coeffs.radial_gradient -
                          bz * axial_coefficient(t) / 2.0);
    return constants.gravity * constants.atom_mass * std::abs(bz) / denom;
}

double TrapSchedule::potential_minimum_x(double t) const {
    if (t < 0)
        throw std::invalid_argument("potential_minimum_x: negative time");
    if (model == Model::harmonic)
        return -constants.gravity / (omega_r * omega_r) *
               std::abs(bias_field(t)) / bias0;
    auto v = [&](double x) { return potential_at(x, 0.0, 0.0, t); };
    // Coarse scan over a few field length scales, then golden-section.
    const double r_b = bias0 / coeffs.radial_gradient;
    double lo = -5.0 * r_b, hi = 5.0 * r_b;
    const int scan = 400;
    double best = 0.0, best_v = v(0.0);
    for (int i = 0; i <= scan; ++i) {
        const double x = lo + (hi - lo) * i / scan;
        const double vx = v(x);
        if (vx < best_v) { best_v = vx; best = x; }
    }
    double a = best - (hi - lo) / scan, b = best + (hi - lo) / scan;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 120 && (b - a) > 1e-13; ++it) {
        if (v(c) < v(d)) { b = d; } else { a = c; }
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return 0.5 * (a + b);
}

TrapSchedule make_trap(const PhysicalConstants& constants, double omega_r,
                       double omega_z, double bias0, double reversal_duration,
                       TrapSchedule::Model model) {
    TrapSchedule s;
    s.constants = constants;
    s.coeffs = calibrate_trap(constants, omega_r, omega_z, bias0);
    s.bias0 = bias0;
    s.reversal_duration = reversal_duration;
    s.omega_r = omega_r;
    s.omega_z = omega_z;
    s.model = model;
    s.validate();
    return s;
}

}  // namespace gpv
