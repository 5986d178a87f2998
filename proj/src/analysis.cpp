#include "gpv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "internal.hpp"

namespace gpv {

using detail::parallel_sum;

ColumnDensity column_density(const ComplexField& f, double imaging_halfwidth) {
    const Grid& g = f.grid;
    if (!(imaging_halfwidth > 0) || 2.0 * imaging_halfwidth > g.length_z())
        throw std::invalid_argument("column_density: imaging window exceeds the box");

    const double z_cm = center_of_mass(f).z;
    // window clamped to the box; cells weighted by their overlap
    double zlo = z_cm - imaging_halfwidth, zhi = z_cm + imaging_halfwidth;
    const double zmin = g.z0 - 0.5 * g.dz, zmax = g.z0 + g.nz * g.dz - 0.5 * g.dz;
    zlo = std::max(zlo, zmin);
    zhi = std::min(zhi, zmax);

    std::vector<double> w(g.nz, 0.0);
    for (int iz = 0; iz < g.nz; ++iz) {
        const double clo = g.z(iz) - 0.5 * g.dz, chi = g.z(iz) + 0.5 * g.dz;
        w[iz] = std::max(0.0, std::min(chi, zhi) - std::max(clo, zlo));
    }

    ColumnDensity cd;
    cd.nx = g.nx;
    cd.ny = g.ny;
    cd.dx = g.dx;
    cd.dy = g.dy;
    cd.x0 = g.x0;
    cd.y0 = g.y0;
    cd.time = f.time;
    cd.imaging_halfwidth = imaging_halfwidth;
    cd.values.assign(std::size_t(g.nx) * g.ny, 0.0);

    const auto* a = f.data();
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            const std::size_t base = (std::size_t(ix) * g.ny + iy) * g.nz;
            double acc = 0.0;
            for (int iz = 0; iz < g.nz; ++iz)
                acc += w[iz] * std::norm(a[base + iz]);
            cd.values[std::size_t(ix) * g.ny + iy] = acc;
        }
    return cd;
}

double compute_anz(const ComplexField& f, double scattering_length) {
    const Grid& g = f.grid;
    const double nn = norm_squared(f);
    if (!(nn > 0)) return 0.0;
    const double z_cm = center_of_mass(f).z;
    int iz_c = int(std::lround((z_cm - g.z0) / g.dz));
    iz_c = std::clamp(iz_c, 0, g.nz - 1);
    const auto* a = f.data();
    double areal = 0.0;
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            areal += std::norm(a[g.index(ix, iy, iz_c)]);
    return scattering_length * areal * g.dx * g.dy;
}

namespace {

// Condensate support with interior holes filled: a pixel belongs to the
// mask when it sits between above-threshold pixels along both its row and
// its column.
struct FilledMask {
    int nx, ny;
    std::vector<int> row_lo, row_hi;  // per ix: iy range
    std::vector<int> col_lo, col_hi;  // per iy: ix range
    bool inside(int ix, int iy) const {
        return row_lo[ix] <= iy && iy <= row_hi[ix] && col_lo[iy] <= ix &&
               ix <= col_hi[iy];
    }
};

FilledMask build_mask(const ColumnDensity& cd, double threshold) {
    FilledMask m;
    m.nx = cd.nx;
    m.ny = cd.ny;
    m.row_lo.assign(cd.nx, 1);
    m.row_hi.assign(cd.nx, 0);
    m.col_lo.assign(cd.ny, 1);
    m.col_hi.assign(cd.ny, 0);
    bool any = false;
    for (int ix = 0; ix < cd.nx; ++ix)
        for (int iy = 0; iy < cd.ny; ++iy)
            if (cd.at(ix, iy) >= threshold) {
                any = true;
                if (m.row_lo[ix] > m.row_hi[ix]) m.row_lo[ix] = m.row_hi[ix] = iy;
                else { m.row_lo[ix] = std::min(m.row_lo[ix], iy); m.row_hi[ix] = std::max(m.row_hi[ix], iy); }
                if (m.col_lo[iy] > m.col_hi[iy]) m.col_lo[iy] = m.col_hi[iy] = ix;
                else { m.col_lo[iy] = std::min(m.col_lo[iy], ix); m.col_hi[iy] = std::max(m.col_hi[iy], ix); }
            }
    if (!any) throw NoCondensate("find_core_minima: empty condensate mask");
    return m;
}

}  // namespace

CoreMinima find_core_minima(const ColumnDensity& cd, double reference_diameter,
                            const MinimaParams& params) {
    double peak = 0.0;
    for (double v : cd.values) peak = std::max(peak, v);
    const FilledMask mask = build_mask(cd, params.mask_frac * peak);

    struct Candidate {
        double x, y, value, depth;
    };
    std::vector<Candidate> cands;

    const int wdep = std::max(1, int(std::lround(reference_diameter / (2.0 * cd.dx))));
    for (int ix = 1; ix < cd.nx - 1; ++ix)
        for (int iy = 1; iy < cd.ny - 1; ++iy) {
            if (!mask.inside(ix, iy)) continue;
            const double c = cd.at(ix, iy);
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    if (cd.at(ix + di, iy + dj) <= c) { is_min = false; break; }
                }
            if (!is_min) continue;

            // quadratic subpixel refinement on the 3x3 stencil
            double gx = 0, gy = 0, hxx = 0, hyy = 0, hxy = 0;
            for (int dj = -1; dj <= 1; ++dj) {
                gx += (cd.at(ix + 1, iy + dj) - cd.at(ix - 1, iy + dj)) / 6.0;
                gy += (cd.at(ix + dj, iy + 1) - cd.at(ix + dj, iy - 1)) / 6.0;
                hxx += (cd.at(ix + 1, iy + dj) - 2 * cd.at(ix, iy + dj) +
                        cd.at(ix - 1, iy + dj)) / 3.0;
                hyy += (cd.at(ix + dj, iy + 1) - 2 * cd.at(ix + dj, iy) +
                        cd.at(ix + dj, iy - 1)) / 3.0;
            }
            hxy = (cd.at(ix + 1, iy + 1) - cd.at(ix + 1, iy - 1) -
                   cd.at(ix - 1, iy + 1) + cd.at(ix - 1, iy - 1)) / 4.0;
            double du = 0, dv = 0;
            const double det = hxx * hyy - hxy * hxy;
            if (std::abs(det) > 1e-300) {
                du = -(hyy * gx - hxy * gy) / det;
                dv = -(hxx * gy - hxy * gx) / det;
                du = std::clamp(du, -0.75, 0.75);
                dv = std::clamp(dv, -0.75, 0.75);
            }
            const double value =
                c + gx * du + gy * dv +
                0.5 * (hxx * du * du + 2 * hxy * du * dv + hyy * dv * dv);

            double nb_peak = 0.0;
            for (int di = -wdep; di <= wdep; ++di)
                for (int dj = -wdep; dj <= wdep; ++dj) {
                    const int jx = ix + di, jy = iy + dj;
                    if (jx < 0 || jx >= cd.nx || jy < 0 || jy >= cd.ny) continue;
                    nb_peak = std::max(nb_peak, cd.at(jx, jy));
                }
            const double depth = nb_peak - value;
            if (depth < params.min_depth_frac * peak) continue;
            cands.push_back({cd.x(ix) + du * cd.dx, cd.y(iy) + dv * cd.dy,
                             std::max(value, 0.0), depth});
        }

    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.depth > b.depth; });

    // merge: deepest first, absorb anything within the merge radius
    const double merge_r = params.merge_frac * reference_diameter;
    CoreMinima out;
    for (const Candidate& c : cands) {
        bool absorbed = false;
        for (const Minimum& kept : out.minima) {
            const double d = std::hypot(c.x - kept.x, c.y - kept.y);
            if (d < merge_r) { absorbed = true; break; }
        }
        if (!absorbed)
            out.minima.push_back({c.x, c.y, c.value, c.depth});
    }

    for (std::size_t i = 0; i < out.minima.size(); ++i)
        for (std::size_t j = i + 1; j < out.minima.size(); ++j)
            out.max_separation = std::max(
                out.max_separation, std::hypot(out.minima[i].x - out.minima[j].x,
                                               out.minima[i].y - out.minima[j].y));
    return out;
}

std::optional<double> splitting_time(const std::vector<FrameAnalysis>& frames,
                                     double reference_diameter, int persistence) {
    if (persistence < 1) persistence = 1;
    auto satisfied = [&](const FrameAnalysis& fr) {
        return fr.minima.minima.size() >= 2 &&
               fr.minima.max_separation > reference_diameter;
    };
    for (std::size_t k = 0; k + persistence <= frames.size(); ++k) {
        bool ok = true;
        for (int j = 0; j < persistence; ++j)
            if (!satisfied(frames[k + j])) { ok = false; break; }
        if (ok) return frames[k].t;
    }
    return std::nullopt;
}

int plane_winding(const ComplexField& f, double support_frac) {
    const Grid& g = f.grid;
    const double z_cm = center_of_mass(f).z;
    int iz = int(std::lround((z_cm - g.z0) / g.dz));
    iz = std::clamp(iz, 0, g.nz - 1);

    const auto* a = f.data();
    double plane_peak = 0.0;
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            plane_peak = std::max(plane_peak, std::norm(a[g.index(ix, iy, iz)]));
    const double floor = support_frac * plane_peak;

    // largest rectangle around the density support, pulled in slightly
    const int cx = int(std::lround((center_of_mass(f).x - g.x0) / g.dx));
    const int cy = int(std::lround((center_of_mass(f).y - g.y0) / g.dy));
    auto extent = [&](int dix, int diy) {
        int r = 0;
        int ix = cx, iy = cy;
        while (true) {
            const int jx = ix + dix, jy = iy + diy;
            if (jx <= 0 || jx >= g.nx - 1 || jy <= 0 || jy >= g.ny - 1) break;
            if (std::norm(a[g.index(jx, jy, iz)]) < floor) break;
            ix = jx; iy = jy; ++r;
        }
        return r;
    };
    const int rxp = extent(1, 0), rxm = extent(-1, 0);
    const int ryp = extent(0, 1), rym = extent(0, -1);
    const int margin = 2;
    const int x1 = cx + std::max(1, rxp - margin), x0 = cx - std::max(1, rxm - margin);
    const int y1 = cy + std::max(1, ryp - margin), y0 = cy - std::max(1, rym - margin);
    const auto loop = rectangle_loop(x0, y0, x1, y1);
    return phase_winding(f, loop, iz);
}

namespace {

// Bilinear root of psi inside a plaquette; returns fractional (u,v) in
// [0,1]^2 or the center when the Newton iteration fails to settle.
std::pair<double, double> bilinear_zero(std::complex<double> f00,
                                        std::complex<double> f10,
                                        std::complex<double> f11,
                                        std::complex<double> f01) {
    double u = 0.5, v = 0.5;
    for (int it = 0; it < 12; ++it) {
        const std::complex<double> fu =
            (1 - v) * (f10 - f00) + v * (f11 - f01);
        const std::complex<double> fv =
            (1 - u) * (f01 - f00) + u * (f11 - f10);
        const std::complex<double> val = (1 - u) * (1 - v) * f00 + u * (1 - v) * f10 +
                                         u * v * f11 + (1 - u) * v * f01;
        const double j00 = fu.real(), j01 = fv.real();
        const double j10 = fu.imag(), j11 = fv.imag();
        const double det = j00 * j11 - j01 * j10;
        if (std::abs(det) < 1e-300) break;
        const double du = -(j11 * val.real() - j01 * val.imag()) / det;
        const double dv = -(-j10 * val.real() + j00 * val.imag()) / det;
        u += du;
        v += dv;
        if (!(u > -1 && u < 2 && v > -1 && v < 2)) { u = 0.5; v = 0.5; break; }
        if (std::abs(du) + std::abs(dv) < 1e-12) break;
    }
    u = std::clamp(u, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    return {u, v};
}

struct CorePoint {
    double x, y;
    int winding;
};

}  // namespace

std::vector<VortexLine> trace_vortex_lines(const ComplexField& f,
                                           const TraceParams& params) {
    const Grid& g = f.grid;
    const auto* a = f.data();

    double peak = 0.0;
    const long n = long(g.size());
    for (long i = 0; i < n; ++i) peak = std::max(peak, std::norm(a[i]));
    const double floor = params.density_floor_frac * peak;

    const double capture = params.capture_radius_cells * std::max(g.dx, g.dy);

    std::vector<VortexLine> lines;
    struct Active {
        std::size_t line;
        CorePoint last;
    };
    std::vector<Active> active;

    for (int iz = 0; iz < g.nz; ++iz) {
        std::vector<CorePoint> points;
        for (int ix = 0; ix + 1 < g.nx; ++ix)
            for (int iy = 0; iy + 1 < g.ny; ++iy) {
                const auto f00 = a[g.index(ix, iy, iz)];
                const auto f10 = a[g.index(ix + 1, iy, iz)];
                const auto f11 = a[g.index(ix + 1, iy + 1, iz)];
                const auto f01 = a[g.index(ix, iy + 1, iz)];
                if (std::norm(f00) < floor || std::norm(f10) < floor ||
                    std::norm(f11) < floor || std::norm(f01) < floor)
                    continue;
                const double total = std::arg(f10 * std::conj(f00)) +
                                     std::arg(f11 * std::conj(f10)) +
                                     std::arg(f01 * std::conj(f11)) +
                                     std::arg(f00 * std::conj(f01));
                const int w = int(std::lround(total / (2.0 * M_PI)));
                if (w == 0) continue;
                double u = 0.5, v = 0.5;
                if (std::abs(w) == 1)
                    std::tie(u, v) = bilinear_zero(f00, f10, f11, f01);
                points.push_back({g.x(ix) + u * g.dx, g.y(iy) + v * g.dy, w});
            }

        // link to lines that ended in the previous slice
        std::vector<bool> used(points.size(), false);
        std::vector<Active> next_active;
        for (const Active& act : active) {
            int best = -1, second = -1;
            double best_d = capture, second_d = std::numeric_limits<double>::max();
            for (std::size_t p = 0; p < points.size(); ++p) {
                if (used[p]) continue;
                if ((points[p].winding > 0) != (act.last.winding > 0)) continue;
                const double d =
                    std::hypot(points[p].x - act.last.x, points[p].y - act.last.y);
                if (d < best_d) {
                    second = best; second_d = best_d;
                    best = int(p); best_d = d;
                } else if (d < second_d) {
                    second = int(p); second_d = d;
                }
            }
            if (best >= 0) {
                if (second >= 0 && second_d < best_d * 1.1)
                    lines[act.line].ambiguous = true;
                used[best] = true;
                lines[act.line].points.push_back(
                    {points[best].x, points[best].y, g.z(iz)});
                next_active.push_back({act.line, points[best]});
            }
        }
        for (std::size_t p = 0; p < points.size(); ++p) {
            if (used[p]) continue;
            VortexLine line;
            line.winding = points[p].winding;
            line.points.push_back({points[p].x, points[p].y, g.z(iz)});
            lines.push_back(std::move(line));
            next_active.push_back({lines.size() - 1, points[p]});
        }
        active = std::move(next_active);
    }
    return lines;
}

ChainEvidence detect_chain(const std::vector<FrameAnalysis>& frames) {
    ChainEvidence ev;
    for (const FrameAnalysis& fr : frames) {
        if (fr.minima.minima.size() >= 4 && fr.winding_valid && fr.total_winding == 2) {
            ev.detected = true;
            ev.frame_time = fr.t;
            ev.minima = fr.minima.minima;
            return ev;
        }
    }
    return ev;
}

}  // namespace gpv
