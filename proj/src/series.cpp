#include <cstdio>
#include <fstream>
#include <sstream>

#include "gpv/io.hpp"

namespace gpv {

static const char* kHeader =
    "t_s,norm,E_total_J,x_cm_m,y_cm_m,z_cm_m,an_z,minima_count,min_separation_m";

void write_series(const TimeSeries& ts, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_series: cannot open " + path.string());
    out << kHeader << "\n";
    char buf[512];
    for (const TimeSample& s : ts.samples) {
        snprintf(buf, sizeof buf,
                 "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", s.t,
                 s.norm, s.e_total, s.x_cm, s.y_cm, s.z_cm, s.an_z,
                 s.minima_count, s.min_separation);
        out << buf;
    }
    if (!out) throw IoError("write_series: write failed for " + path.string());
}

TimeSeries read_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_series: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw IoError("read_series: bad header in " + path.string());
    TimeSeries ts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TimeSample s;
        if (sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg,%lg,%lg,%d,%lg", &s.t,
                   &s.norm, &s.e_total, &s.x_cm, &s.y_cm, &s.z_cm, &s.an_z,
                   &s.minima_count, &s.min_separation) != 9)
            throw IoError("read_series: malformed row in " + path.string());
        ts.samples.push_back(s);
    }
    return ts;
}

}  // namespace gpv
