#include "gpv/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace gpv {

namespace {

// Thomas-Fermi chemical potential implied by a target an_z in the radial
// plane: an_z = (mu / 2 hbar w_r)^2.
double tf_mu_of_anz(double anz, const PhysicalConstants& c, double omega_r) {
    return 2.0 * c.hbar * omega_r * std::sqrt(std::max(anz, 0.0));
}

double anz_estimate_from_n(double n_particles, const PhysicalConstants& c,
                           double omega_r, double omega_z) {
    const double wbar = std::cbrt(omega_r * omega_r * omega_z);
    const double abar = std::sqrt(c.hbar / (c.atom_mass * wbar));
    const double mu = 0.5 * c.hbar * wbar *
                      std::pow(15.0 * n_particles * c.scattering_length / abar, 0.4);
    const double r = mu / (2.0 * c.hbar * omega_r);
    return r * r;
}

}  // namespace

Grid resolve_grid(const RunConfig& config) {
    const PhysicalConstants c = config.constants();
    const double wr = config.omega_r(), wz = config.omega_z();
    const double l_r = std::sqrt(c.hbar / (c.atom_mass * wr));
    const double a_z = wz > 0 ? std::sqrt(c.hbar / (c.atom_mass * wz)) : 4.0 * l_r;

    double anz = config.an_z;
    if (anz < 0) anz = anz_estimate_from_n(config.n_particles, c, wr, wz);
    const double mu = tf_mu_of_anz(anz, c, wr);
    const double r_tf = std::sqrt(2.0 * mu / (c.atom_mass * wr * wr));
    const double z_tf = wz > 0 ? std::sqrt(2.0 * mu / (c.atom_mass * wz * wz)) : 0.0;

    // The trap minimum travels between the gravity sag and zero during the
    // bias reversal; center the box between them.
    const double sag = c.gravity / (wr * wr);
    const double half_x = 0.5 * sag + std::max(5.0 * l_r, 1.3 * r_tf + 1.5e-6);
    const double half_y = std::max(5.0 * l_r, 1.3 * r_tf + 1.5e-6);
    const double half_z = std::max(6.0 * a_z, 1.25 * z_tf);

    const double Lx = config.box_x > 0 ? config.box_x : 2.0 * half_x;
    const double Ly = config.box_y > 0 ? config.box_y : 2.0 * half_y;
    const double Lz = config.box_z > 0 ? config.box_z : 2.0 * half_z;
    return make_grid(config.nx, config.ny, config.nz, Lx, Ly, Lz, -0.5 * sag, 0.0, 0.0);
}

TrapSchedule resolve_trap(const RunConfig& config) {
    const auto model = config.trap_model == "harmonic" ? TrapSchedule::Model::harmonic
                                                       : TrapSchedule::Model::exact;
    return make_trap(config.constants(), config.omega_r(), config.omega_z(),
                     config.bias0, config.reversal_ms * 1e-3, model);
}

namespace {

// Observer computing the tomographic analysis columns each sample and
// deciding when a sweep run may stop early.
class AnalysisObserver : public StepObserver {
public:
    AnalysisObserver(const RunConfig& config, double reference_diameter)
        : config_(config), d_ref_(reference_diameter) {
        params_.mask_frac = config.mask_frac;
        params_.merge_frac = config.merge_frac;
        params_.min_depth_frac = config.min_depth_frac;
    }

    void on_sample(const ComplexField& f, TimeSample& sample) override {
        FrameAnalysis frame;
        frame.t = f.time;
        const ColumnDensity cd = column_density(f, config_.imaging_halfwidth);
        try {
            frame.minima = find_core_minima(cd, d_ref_, params_);
        } catch (const NoCondensate&) {
        }
        try {
            frame.total_winding = plane_winding(f);
            frame.winding_valid = true;
        } catch (const WindingUndefined&) {
            frame.winding_valid = false;
        }
        sample.an_z = compute_anz(f, config_.scattering_length);
        sample.minima_count = int(frame.minima.minima.size());
        sample.min_separation = frame.minima.max_separation;

        const bool satisfied = sample.minima_count >= 2 &&
                               sample.min_separation > d_ref_;
        consecutive_ = satisfied ? consecutive_ + 1 : 0;
        frames.push_back(std::move(frame));
    }

    bool stop_requested() const override {
        if (!config_.stop_after_split) return false;
        // Keep a margin beyond the persistence window so the detection is
        // insensitive to the stopping point.
        return consecutive_ >= 6;
    }

    std::vector<FrameAnalysis> frames;

private:
    const RunConfig& config_;
    double d_ref_;
    MinimaParams params_;
    int consecutive_ = 0;
};

void write_frames_jsonl(const std::vector<FrameAnalysis>& frames,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    for (const FrameAnalysis& fr : frames) {
        nlohmann::json j;
        j["t"] = fr.t;
        j["count"] = fr.minima.minima.size();
        j["separation"] = fr.minima.max_separation;
        j["winding"] = fr.total_winding;
        j["winding_valid"] = fr.winding_valid;
        auto& mins = j["minima"] = nlohmann::json::array();
        for (const Minimum& m : fr.minima.minima)
            mins.push_back({m.x, m.y, m.value, m.depth});
        out << j.dump() << "\n";
    }
}

}  // namespace

RunArtifacts run_single(const RunConfig& config,
                        const std::filesystem::path& run_dir) {
    config.validate();
    if (config.fft_threads > 0)
        SpectralTransform::set_default_threads(config.fft_threads);

    std::filesystem::create_directories(run_dir);
    {
        std::ofstream echo(run_dir / "config.echo");
        echo << echo_config(config);
    }

    const Grid grid = resolve_grid(config);
    const TrapSchedule trap = resolve_trap(config);
    const PhysicalConstants consts = config.constants();
    const double omega_r = config.omega_r();

    GroundStateConfig gs_config;
    gs_config.winding = config.winding;
    gs_config.tau_step = config.tau_osc / omega_r;
    gs_config.tolerance = config.gs_tolerance;
    gs_config.max_iters = config.gs_max_iters;

    // Initial state: N from the an_z target (or explicit N), winding kappa.
    AnzSolveResult init;
    if (config.an_z >= 0 && !(config.n_particles > 0)) {
        init = particle_number_for_anz(config.an_z, gs_config, trap, grid);
    } else {
        gs_config.n_particles = config.n_particles;
        gs_config.interaction_g = config.an_z == 0 ? 0.0 : consts.interaction_g();
        init.n_particles = config.n_particles;
        init.ground_state = solve_ground_state(gs_config, trap, grid);
        init.achieved_anz =
            compute_anz(init.ground_state.state, consts.scattering_length);
    }

    // Reference diameter from the kappa=1 state at the same N.
    double d_ref = config.reference_diameter;
    if (!(d_ref > 0)) {
        GroundStateConfig ref_config = gs_config;
        ref_config.winding = 1;
        ref_config.n_particles = init.n_particles;
        ref_config.interaction_g =
            config.an_z == 0 ? 0.0 : consts.interaction_g();
        GroundStateResult ref = solve_ground_state(ref_config, trap, grid);
        d_ref = reference_vortex_diameter(ref.state, config.imaging_halfwidth);
        write_snapshot(ref.state, ref_config.n_particles,
                       run_dir / "gs_kappa1.gpv");
    }

    write_snapshot(init.ground_state.state, init.n_particles,
                   run_dir / "gs_kappa2.gpv");

    // Full protocol evolution.
    EvolutionConfig evo;
    evo.dt = config.dt > 0 ? config.dt : 5e-3 / omega_r;
    evo.t_end = config.t_end;
    evo.observer_stride = config.observer_stride;
    if (config.frame_interval_ms > 0)
        evo.observer_stride =
            std::max(1, int(std::lround(config.frame_interval_ms * 1e-3 / evo.dt)));
    for (double ms : config.snapshot_ms) evo.snapshot_times.push_back(ms * 1e-3);
    evo.noise_amplitude = config.noise_amplitude;
    evo.noise_seed = config.noise_seed;

    SpectralTransform fft(grid);
    ComplexField psi = init.ground_state.state;
    psi.time = 0.0;
    AnalysisObserver observer(config, d_ref);
    const double interaction_g =
        config.an_z == 0 ? 0.0 : consts.interaction_g();
    EvolutionResult evolved = evolve(psi, fft, trap, interaction_g, evo, &observer);

    for (std::size_t i = 0; i < evolved.snapshots.size(); ++i) {
        char name[64];
        snprintf(name, sizeof name, "snapshot_%05.1fms.gpv",
                 evolved.snapshots[i].time * 1e3);
        write_snapshot(evolved.snapshots[i], init.n_particles, run_dir / name);
    }

    RunArtifacts art;
    art.run_dir = run_dir;
    art.n_particles = init.n_particles;
    art.mu = init.ground_state.mu;
    art.series = std::move(evolved.series);
    art.frames = std::move(observer.frames);

    art.report.an_z = config.an_z >= 0 ? config.an_z : init.achieved_anz;
    art.report.reference_diameter = d_ref;
    art.report.splitting_time_s = splitting_time(art.frames, d_ref);
    for (const FrameAnalysis& fr : art.frames)
        art.report.minima_count_series.push_back(int(fr.minima.minima.size()));
    const ChainEvidence chain = detect_chain(art.frames);
    art.report.chain_detected = chain.detected;

    write_series(art.series, run_dir / "series.csv");
    write_frames_jsonl(art.frames, run_dir / "frames.jsonl");
    {
        nlohmann::json j;
        j["an_z_target"] = art.report.an_z;
        j["an_z_achieved"] = init.achieved_anz;
        j["n_particles"] = art.n_particles;
        j["mu_J"] = art.mu;
        j["reference_diameter_m"] = art.report.reference_diameter;
        if (art.report.splitting_time_s)
            j["splitting_time_s"] = *art.report.splitting_time_s;
        else
            j["splitting_time_s"] = nullptr;
        j["chain_detected"] = art.report.chain_detected;
        if (chain.detected) j["chain_time_s"] = chain.frame_time;
        j["boundary_warning"] = art.series.boundary_warning;
        j["minima_count_series"] = art.report.minima_count_series;
        std::ofstream out(run_dir / "report.json");
        out << j.dump(2) << "\n";
    }
    return art;
}

std::vector<SweepRow> run_sweep(const RunConfig& config,
                                const std::vector<double>& anz_values,
                                const std::filesystem::path& out_dir) {
    config.validate();
    std::filesystem::create_directories(out_dir);

    int workers = config.workers;
    if (workers <= 0) {
        if (const char* env = std::getenv("GPV_WORKERS")) workers = std::atoi(env);
        if (workers <= 0) workers = 1;
    }
    workers = std::min<int>(workers, std::max<std::size_t>(anz_values.size(), 1));

    // Split the machine between workers unless the config pins fft_threads.
    if (config.fft_threads > 0) {
        SpectralTransform::set_default_threads(config.fft_threads);
    } else if (workers > 1) {
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        SpectralTransform::set_default_threads(std::max(1u, hw / unsigned(workers)));
    }

    std::vector<SweepRow> rows(anz_values.size());
    std::mutex mu;
    std::size_t next = 0;

    auto worker = [&]() {
        while (true) {
            std::size_t job;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= anz_values.size()) return;
                job = next++;
            }
            const double anz = anz_values[job];
            SweepRow row;
            row.an_z = anz;
            try {
                RunConfig rc = config;
                rc.an_z = anz;
                rc.n_particles = 0;
                char sub[64];
                snprintf(sub, sizeof sub, "anz_%g", anz);
                const RunArtifacts art = run_single(rc, out_dir / sub);
                row.splitting_time_s = art.report.splitting_time_s;
                row.status = "ok";
            } catch (const std::exception& e) {
                row.status = e.what();
            }
            rows[job] = std::move(row);
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<SweepRow> sorted = rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.an_z < b.an_z; });
    std::ofstream out(out_dir / "sweep.csv");
    out << "an_z,T_s,status\n";
    char buf[160];
    for (const SweepRow& r : sorted) {
        if (r.splitting_time_s)
            snprintf(buf, sizeof buf, "%.17g,%.17g,%s\n", r.an_z,
                     *r.splitting_time_s, r.status.c_str());
        else
            snprintf(buf, sizeof buf, "%.17g,none,%s\n", r.an_z, r.status.c_str());
        out << buf;
    }
    return sorted;
}

double run_reference_diameter(const RunConfig& config) {
    config.validate();
    if (config.fft_threads > 0)
        SpectralTransform::set_default_threads(config.fft_threads);
    if (config.winding == 0)
        throw std::invalid_argument(
            "reference diameter: winding 0 has no core to measure");

    const Grid grid = resolve_grid(config);
    const TrapSchedule trap = resolve_trap(config);
    const double omega_r = config.omega_r();

    GroundStateConfig gs_config;
    gs_config.winding = config.winding;  // kappa=2 defines the an_z <-> N map
    gs_config.tau_step = config.tau_osc / omega_r;
    gs_config.tolerance = config.gs_tolerance;
    gs_config.max_iters = config.gs_max_iters;

    double n_particles = config.n_particles;
    if (config.an_z >= 0 && !(n_particles > 0)) {
        AnzSolveResult init = particle_number_for_anz(config.an_z, gs_config, trap, grid);
        n_particles = init.n_particles;
    }

    GroundStateConfig ref = gs_config;
    ref.winding = 1;
    ref.n_particles = n_particles;
    ref.interaction_g =
        config.an_z == 0 ? 0.0 : config.constants().interaction_g();
    GroundStateResult gs = solve_ground_state(ref, trap, grid);
    return reference_vortex_diameter(gs.state, config.imaging_halfwidth);
}

}  // namespace gpv
