#include <cstdint>
#include <cstring>
#include <fstream>

#include "gpv/io.hpp"

namespace gpv {

// Layout: "GPV1" | u32 version | u32 nx ny nz | f64 dx dy dz x0 y0 z0 t N |
// nx*ny*nz interleaved (re,im) f64, C-order with z fastest, little-endian.
// std::complex<double> is (re,im) in memory, so the payload is written as-is
// on little-endian hosts.

namespace {
constexpr char kMagic[4] = {'G', 'P', 'V', '1'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_snapshot(const ComplexField& f, double n_particles,
                    const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_snapshot: cannot open " + path.string());
    out.write(kMagic, 4);
    auto put_u32 = [&](std::uint32_t v) {
        out.write(reinterpret_cast<const char*>(&v), 4);
    };
    auto put_f64 = [&](double v) {
        out.write(reinterpret_cast<const char*>(&v), 8);
    };
    put_u32(kVersion);
    put_u32(std::uint32_t(f.grid.nx));
    put_u32(std::uint32_t(f.grid.ny));
    put_u32(std::uint32_t(f.grid.nz));
    put_f64(f.grid.dx);
    put_f64(f.grid.dy);
    put_f64(f.grid.dz);
    put_f64(f.grid.x0);
    put_f64(f.grid.y0);
    put_f64(f.grid.z0);
    put_f64(f.time);
    put_f64(n_particles);
    out.write(reinterpret_cast<const char*>(f.data()),
              std::streamsize(f.grid.size() * sizeof(std::complex<double>)));
    if (!out) throw IoError("write_snapshot: short write to " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_snapshot: cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("read_snapshot: bad magic in " + path.string());
    auto get_u32 = [&]() {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_f64 = [&]() {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const std::uint32_t version = get_u32();
    if (version != kVersion)
        throw IoError("read_snapshot: unsupported version in " + path.string());
    Grid g;
    g.nx = int(get_u32());
    g.ny = int(get_u32());
    g.nz = int(get_u32());
    g.dx = get_f64();
    g.dy = get_f64();
    g.dz = get_f64();
    g.x0 = get_f64();
    g.y0 = get_f64();
    g.z0 = get_f64();
    const double t = get_f64();
    const double n_particles = get_f64();
    if (!in) throw IoError("read_snapshot: truncated header in " + path.string());
    g.validate();

    Snapshot snap;
    snap.field = ComplexField(g);
    snap.field.time = t;
    snap.n_particles = n_particles;
    in.read(reinterpret_cast<char*>(snap.field.data()),
            std::streamsize(g.size() * sizeof(std::complex<double>)));
    if (!in || std::size_t(in.gcount()) != g.size() * sizeof(std::complex<double>))
        throw IoError("read_snapshot: truncated payload in " + path.string());
    in.peek();
    if (!in.eof())
        throw IoError("read_snapshot: trailing bytes in " + path.string());
    return snap;
}

}  // namespace gpv
