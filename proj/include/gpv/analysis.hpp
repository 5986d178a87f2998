#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpv/field.hpp"

namespace gpv {

struct NoCondensate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// z-integrated density n(x,y) over an axial imaging window, m^-2.
struct ColumnDensity {
    int nx = 0, ny = 0;
    double dx = 0, dy = 0;
    double x0 = 0, y0 = 0;
    double time = 0;
    double imaging_halfwidth = 15e-6;
    std::vector<double> values;  // row-major, index = ix*ny + iy

    double at(int ix, int iy) const { return values[std::size_t(ix) * ny + iy]; }
    double x(int ix) const { return x0 + ix * dx; }
    double y(int iy) const { return y0 + iy * dy; }
};

/// Integrates |psi|^2 over |z - z_cm| <= halfwidth (trapezoid with
/// fractional end cells; the window tracks the axial center of mass).
/// Throws std::invalid_argument if the window exceeds the box.
ColumnDensity column_density(const ComplexField& f, double imaging_halfwidth);

/// Density parameter an_z: scattering length times the areal integral of
/// |psi|^2 over the z-plane nearest the axial center of mass.
double compute_anz(const ComplexField& f, double scattering_length);

struct Minimum {
    double x = 0, y = 0;   // subpixel position, m
    double value = 0;      // n at the minimum
    double depth = 0;      // neighborhood peak minus value
};

struct CoreMinima {
    std::vector<Minimum> minima;      // sorted by depth, deepest first
    double max_separation = 0;        // largest pairwise distance, m
};

struct MinimaParams {
    double mask_frac = 0.10;       // condensate mask threshold vs peak
    double merge_frac = 0.25;      // merge radius as a fraction of d_ref
    double min_depth_frac = 0.0;   // discard minima shallower than this vs peak
};

/// Local minima of the column density inside the (filled) condensate mask,
/// refined to subpixel by a quadratic fit and merged within
/// merge_frac*reference_diameter. Throws NoCondensate on an empty mask.
CoreMinima find_core_minima(const ColumnDensity& cd, double reference_diameter,
                            const MinimaParams& params = {});

/// Per-frame analysis record used by the splitting-time and chain criteria.
struct FrameAnalysis {
    double t = 0;
    CoreMinima minima;
    int total_winding = 0;      // large-loop winding on the z-center plane
    bool winding_valid = false; // false if the loop crossed near-zero density
};

/// Winding on a rectangle loop sized from the density support of the
/// z-plane nearest the axial center of mass.
int plane_winding(const ComplexField& f, double support_frac = 1e-3);

/// Earliest frame time with >= 2 minima separated by more than
/// reference_diameter, sustained for `persistence` consecutive frames.
std::optional<double> splitting_time(const std::vector<FrameAnalysis>& frames,
                                     double reference_diameter,
                                     int persistence = 3);

struct VortexLine {
    std::vector<std::array<double, 3>> points;  // ordered by z
    int winding = 0;      // signed charge carried by the line
    bool closed = false;
    bool ambiguous = false;  // a link had two near-equal candidates
};

struct TraceParams {
    double density_floor_frac = 1e-6;  // plaquette corners vs peak density
    double capture_radius_cells = 4.0; // link radius in units of max(dx,dy)
};

/// Phase-winding plaquette scan per z-slice with subpixel core location,
/// linked into polylines across adjacent slices.
std::vector<VortexLine> trace_vortex_lines(const ComplexField& f,
                                           const TraceParams& params = {});

struct ChainEvidence {
    bool detected = false;
    double frame_time = 0;
    std::vector<Minimum> minima;
};

/// True when some frame shows >= 4 column-density minima while the total
/// winding is still 2.
ChainEvidence detect_chain(const std::vector<FrameAnalysis>& frames);

/// Per-run record: density parameter, splitting time, diagnostics.
struct SplitReport {
    double an_z = 0;
    std::optional<double> splitting_time_s;
    double reference_diameter = 0;
    std::vector<int> minima_count_series;
    bool chain_detected = false;
};

}  // namespace gpv
