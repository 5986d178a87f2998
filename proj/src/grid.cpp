#include "gpv/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace gpv {

bool Grid::same_shape(const Grid& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz && dx == o.dx && dy == o.dy &&
           dz == o.dz && x0 == o.x0 && y0 == o.y0 && z0 == o.z0;
}

static std::vector<double> wavenumbers(int n, double d) {
    std::vector<double> k(n);
    const double dk = 2.0 * M_PI / (n * d);
    for (int j = 0; j < n; ++j)
        k[j] = dk * (j <= n / 2 ? j : j - n);
    return k;
}

std::vector<double> Grid::wavenumbers_x() const { return wavenumbers(nx, dx); }
std::vector<double> Grid::wavenumbers_y() const { return wavenumbers(ny, dy); }
std::vector<double> Grid::wavenumbers_z() const { return wavenumbers(nz, dz); }

void Grid::validate() const {
    for (int n : {nx, ny, nz}) {
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("grid dims must be even and >= 8");
    }
    if (!(dx > 0) || !(dy > 0) || !(dz > 0))
        throw std::invalid_argument("grid spacings must be positive");
}

Grid make_grid(int nx, int ny, int nz, double Lx, double Ly, double Lz,
               double cx, double cy, double cz) {
    Grid g;
    g.nx = nx; g.ny = ny; g.nz = nz;
    g.dx = Lx / nx; g.dy = Ly / ny; g.dz = Lz / nz;
    g.x0 = cx - Lx / 2.0;
    g.y0 = cy - Ly / 2.0;
    g.z0 = cz - Lz / 2.0;
    g.validate();
    return g;
}

}  // namespace gpv
