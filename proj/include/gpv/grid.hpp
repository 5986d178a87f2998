#pragma once

#include <cstddef>
#include <vector>

namespace gpv {

/// Uniform periodic 3D grid. Values are stored C-order with z fastest:
/// index = (ix*ny + iy)*nz + iz.
struct Grid {
    int nx = 0, ny = 0, nz = 0;
    double dx = 0, dy = 0, dz = 0;    // m
    double x0 = 0, y0 = 0, z0 = 0;    // coordinate of sample (0,0,0), m

    std::size_t size() const { return std::size_t(nx) * ny * nz; }
    std::size_t index(int ix, int iy, int iz) const {
        return (std::size_t(ix) * ny + iy) * nz + iz;
    }
    double x(int ix) const { return x0 + ix * dx; }
    double y(int iy) const { return y0 + iy * dy; }
    double z(int iz) const { return z0 + iz * dz; }
    double cell_volume() const { return dx * dy * dz; }
    double length_x() const { return nx * dx; }
    double length_y() const { return ny * dy; }
    double length_z() const { return nz * dz; }

    bool same_shape(const Grid& o) const;

    /// Signed wavenumbers 2*pi*j/(n*d), j in the usual FFT order.
    std::vector<double> wavenumbers_x() const;
    std::vector<double> wavenumbers_y() const;
    std::vector<double> wavenumbers_z() const;

    /// Throws std::invalid_argument unless all dims are even and >= 8 and
    /// spacings are positive.
    void validate() const;
};

/// Centered box helper: spans [cx - Lx/2, cx + Lx/2) etc., so sample 0 sits
/// at the lower corner and the box closes periodically.
Grid make_grid(int nx, int ny, int nz, double Lx, double Ly, double Lz,
               double cx = 0, double cy = 0, double cz = 0);

}  // namespace gpv
