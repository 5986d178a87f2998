#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gpv/io.hpp"

namespace gpv {

double RunConfig::omega_r() const {
    return frequencies_are_angular ? omega_r_hz : 2.0 * M_PI * omega_r_hz;
}
double RunConfig::omega_z() const {
    return frequencies_are_angular ? omega_z_hz : 2.0 * M_PI * omega_z_hz;
}

PhysicalConstants RunConfig::constants() const {
    PhysicalConstants c;
    c.hbar = hbar;
    c.atom_mass = atom_mass;
    c.scattering_length = scattering_length;
    c.bohr_magneton = bohr_magneton;
    c.gravity = gravity;
    c.lande_factor = lande_factor;
    return c;
}

void RunConfig::validate() const {
    constants().validate();
    if (an_z < 0 && !(n_particles > 0))
        throw ConfigError("config: either an_z >= 0 or n_particles > 0 required");
    if (!(omega_r_hz > 0) || omega_z_hz < 0)
        throw ConfigError("config: bad trap frequencies");
    if (!(bias0 > 0)) throw ConfigError("config: bias0 must be positive");
    if (!(reversal_ms > 0)) throw ConfigError("config: reversal_ms must be positive");
    if (trap_model != "exact" && trap_model != "harmonic")
        throw ConfigError("config: trap_model must be 'exact' or 'harmonic'");
    for (int n : {nx, ny, nz})
        if (n < 8 || n % 2)
            throw ConfigError("config: grid dims must be even and >= 8");
    if (dt < 0) throw ConfigError("config: dt must be positive (or 0 for auto)");
    if (dt > 0 && dt * omega_r() > 0.01 + 1e-12)
        throw ConfigError("config: dt*omega_r must be <= 0.01");
    if (!(t_end > 0)) throw ConfigError("config: t_end must be positive");
    if (observer_stride < 1) throw ConfigError("config: observer_stride must be >= 1");
    if (winding < -4 || winding > 4) throw ConfigError("config: |winding| must be <= 4");
    if (!(tau_osc > 0)) throw ConfigError("config: tau_osc must be positive");
    if (!(gs_tolerance > 0)) throw ConfigError("config: gs_tolerance must be positive");
    if (gs_max_iters < 1) throw ConfigError("config: gs_max_iters must be >= 1");
    if (!(imaging_halfwidth > 0))
        throw ConfigError("config: imaging_halfwidth must be positive");
    if (!(mask_frac > 0) || mask_frac >= 1)
        throw ConfigError("config: mask_frac must be in (0,1)");
    if (merge_frac < 0) throw ConfigError("config: merge_frac must be >= 0");
    if (min_depth_frac < 0) throw ConfigError("config: min_depth_frac must be >= 0");
    if (reference_diameter < 0)
        throw ConfigError("config: reference_diameter must be >= 0");
    if (frame_interval_ms < 0)
        throw ConfigError("config: frame_interval_ms must be >= 0");
    if (fft_threads < 0) throw ConfigError("config: fft_threads must be >= 0");
    if (workers < 0) throw ConfigError("config: workers must be >= 0");
    if (noise_amplitude < 0)
        throw ConfigError("config: noise_amplitude must be >= 0");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Parser {
    RunConfig cfg;
    std::string origin;
    int line_no = 0;

    [[noreturn]] void fail(const std::string& key, const std::string& why) {
        std::ostringstream os;
        os << origin << ":" << line_no << ": key '" << key << "': " << why;
        throw ConfigError(os.str());
    }

    double as_double(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            fail(key, "expected a number, got '" + v + "'");
        }
    }
    long as_long(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const long d = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            fail(key, "expected an integer, got '" + v + "'");
        }
    }
    bool as_bool(const std::string& key, const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail(key, "expected a boolean, got '" + v + "'");
    }
    std::vector<double> as_list(const std::string& key, const std::string& v) {
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(as_double(key, item));
        }
        return out;
    }

    void assign(const std::string& key, const std::string& v) {
        if (key == "an_z") cfg.an_z = as_double(key, v);
        else if (key == "n_particles") cfg.n_particles = as_double(key, v);
        else if (key == "scattering_length") cfg.scattering_length = as_double(key, v);
        else if (key == "atom_mass") cfg.atom_mass = as_double(key, v);
        else if (key == "hbar") cfg.hbar = as_double(key, v);
        else if (key == "bohr_magneton") cfg.bohr_magneton = as_double(key, v);
        else if (key == "gravity") cfg.gravity = as_double(key, v);
        else if (key == "lande_factor") cfg.lande_factor = as_double(key, v);
        else if (key == "omega_r_hz") cfg.omega_r_hz = as_double(key, v);
        else if (key == "omega_z_hz") cfg.omega_z_hz = as_double(key, v);
        else if (key == "frequencies_are_angular")
            cfg.frequencies_are_angular = as_bool(key, v);
        else if (key == "bias0") cfg.bias0 = as_double(key, v);
        else if (key == "reversal_ms") cfg.reversal_ms = as_double(key, v);
        else if (key == "trap_model") cfg.trap_model = v;
        else if (key == "nx") cfg.nx = int(as_long(key, v));
        else if (key == "ny") cfg.ny = int(as_long(key, v));
        else if (key == "nz") cfg.nz = int(as_long(key, v));
        else if (key == "box_x") cfg.box_x = as_double(key, v);
        else if (key == "box_y") cfg.box_y = as_double(key, v);
        else if (key == "box_z") cfg.box_z = as_double(key, v);
        else if (key == "dt") {
            cfg.dt = as_double(key, v);
            if (cfg.dt < 0) fail(key, "dt must be positive");
        }
        else if (key == "t_end") cfg.t_end = as_double(key, v);
        else if (key == "observer_stride") cfg.observer_stride = int(as_long(key, v));
        else if (key == "snapshot_ms") cfg.snapshot_ms = as_list(key, v);
        else if (key == "stop_after_split") cfg.stop_after_split = as_bool(key, v);
        else if (key == "noise_amplitude") cfg.noise_amplitude = as_double(key, v);
        else if (key == "noise_seed") cfg.noise_seed = (unsigned long)as_long(key, v);
        else if (key == "winding") cfg.winding = int(as_long(key, v));
        else if (key == "tau_osc") cfg.tau_osc = as_double(key, v);
        else if (key == "gs_tolerance") cfg.gs_tolerance = as_double(key, v);
        else if (key == "gs_max_iters") cfg.gs_max_iters = as_long(key, v);
        else if (key == "imaging_halfwidth") cfg.imaging_halfwidth = as_double(key, v);
        else if (key == "mask_frac") cfg.mask_frac = as_double(key, v);
        else if (key == "merge_frac") cfg.merge_frac = as_double(key, v);
        else if (key == "min_depth_frac") cfg.min_depth_frac = as_double(key, v);
        else if (key == "reference_diameter") cfg.reference_diameter = as_double(key, v);
        else if (key == "frame_interval_ms") cfg.frame_interval_ms = as_double(key, v);
        else if (key == "fft_threads") cfg.fft_threads = int(as_long(key, v));
        else if (key == "workers") cfg.workers = int(as_long(key, v));
        else if (key == "out_dir") cfg.out_dir = v;
        else fail(key, "unknown key");
    }
};

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    Parser p;
    p.origin = origin;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        ++p.line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << origin << ":" << p.line_no << ": expected 'key = value', got '"
               << line << "'";
            throw ConfigError(os.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream os;
            os << origin << ":" << p.line_no << ": empty key";
            throw ConfigError(os.str());
        }
        p.assign(key, value);
    }
    p.cfg.validate();
    return p.cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

namespace {

std::string fmt(double v) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string echo_config(const RunConfig& c) {
    std::ostringstream os;
    os << "# resolved configuration\n";
    os << "an_z = " << fmt(c.an_z) << "\n";
    os << "n_particles = " << fmt(c.n_particles) << "\n";
    os << "scattering_length = " << fmt(c.scattering_length) << "\n";
    os << "atom_mass = " << fmt(c.atom_mass) << "\n";
    os << "hbar = " << fmt(c.hbar) << "\n";
    os << "bohr_magneton = " << fmt(c.bohr_magneton) << "\n";
    os << "gravity = " << fmt(c.gravity) << "\n";
    os << "lande_factor = " << fmt(c.lande_factor) << "\n";
    os << "omega_r_hz = " << fmt(c.omega_r_hz) << "\n";
    os << "omega_z_hz = " << fmt(c.omega_z_hz) << "\n";
    os << "frequencies_are_angular = " << (c.frequencies_are_angular ? "true" : "false") << "\n";
    os << "bias0 = " << fmt(c.bias0) << "\n";
    os << "reversal_ms = " << fmt(c.reversal_ms) << "\n";
    os << "trap_model = " << c.trap_model << "\n";
    os << "nx = " << c.nx << "\n";
    os << "ny = " << c.ny << "\n";
    os << "nz = " << c.nz << "\n";
    os << "box_x = " << fmt(c.box_x) << "\n";
    os << "box_y = " << fmt(c.box_y) << "\n";
    os << "box_z = " << fmt(c.box_z) << "\n";
    os << "dt = " << fmt(c.dt) << "\n";
    os << "t_end = " << fmt(c.t_end) << "\n";
    os << "observer_stride = " << c.observer_stride << "\n";
    os << "snapshot_ms = ";
    for (std::size_t i = 0; i < c.snapshot_ms.size(); ++i)
        os << (i ? "," : "") << fmt(c.snapshot_ms[i]);
    os << "\n";
    os << "stop_after_split = " << (c.stop_after_split ? "true" : "false") << "\n";
    os << "noise_amplitude = " << fmt(c.noise_amplitude) << "\n";
    os << "noise_seed = " << c.noise_seed << "\n";
    os << "winding = " << c.winding << "\n";
    os << "tau_osc = " << fmt(c.tau_osc) << "\n";
    os << "gs_tolerance = " << fmt(c.gs_tolerance) << "\n";
    os << "gs_max_iters = " << c.gs_max_iters << "\n";
    os << "imaging_halfwidth = " << fmt(c.imaging_halfwidth) << "\n";
    os << "mask_frac = " << fmt(c.mask_frac) << "\n";
    os << "merge_frac = " << fmt(c.merge_frac) << "\n";
    os << "min_depth_frac = " << fmt(c.min_depth_frac) << "\n";
    os << "reference_diameter = " << fmt(c.reference_diameter) << "\n";
    os << "frame_interval_ms = " << fmt(c.frame_interval_ms) << "\n";
    os << "fft_threads = " << c.fft_threads << "\n";
    os << "workers = " << c.workers << "\n";
    os << "out_dir = " << c.out_dir << "\n";
    return os.str();
}

}  // namespace gpv
