// Command line driver: ground states, full splitting runs, snapshot
// analysis and Fig.-style an_z sweeps for the vortex splitting simulator.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "gpv/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

gpv::RunConfig load_config(const std::string& path, const std::string& out_dir) {
    gpv::RunConfig cfg =
        path.empty() ? gpv::RunConfig{} : gpv::parse_config(path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    return cfg;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const gpv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const gpv::ConvergenceFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const gpv::StepTooLarge& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const gpv::NumericalBlowup& e) {
        std::cerr << "numerical failure: " << e.what() << " (step " << e.step
                  << ", max|psi| " << e.max_abs << ")\n";
        return kExitNumerical;
    } catch (const gpv::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doubly quantized vortex splitting simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, state_path, anz_list;
    int workers = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file (key = value)");
        cmd->add_option("--out", out_dir, "output directory");
    };

    CLI::App* cmd_gs = app.add_subcommand(
        "groundstate", "converge the initial vortex state and save it");
    add_common(cmd_gs);

    CLI::App* cmd_evolve = app.add_subcommand(
        "evolve", "ground state + bias reversal evolution + splitting analysis");
    add_common(cmd_evolve);

    CLI::App* cmd_analyze = app.add_subcommand(
        "analyze", "column density analysis of a saved snapshot");
    add_common(cmd_analyze);
    cmd_analyze->add_option("--state", state_path, "snapshot file (.gpv)")->required();

    CLI::App* cmd_ref = app.add_subcommand(
        "reference-diameter", "75% column-density diameter of the kappa=1 state");
    add_common(cmd_ref);

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "independent runs over a list of an_z values");
    add_common(cmd_sweep);
    cmd_sweep->add_option("--anz", anz_list, "comma separated an_z values")->required();
    cmd_sweep->add_option("--workers", workers, "parallel run count");

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand(cmd_gs)) {
        return run_guarded([&] {
            gpv::RunConfig cfg = load_config(config_path, out_dir);
            std::filesystem::create_directories(cfg.out_dir);
            const gpv::Grid grid = gpv::resolve_grid(cfg);
            const gpv::TrapSchedule trap = gpv::resolve_trap(cfg);
            if (cfg.fft_threads > 0)
                gpv::SpectralTransform::set_default_threads(cfg.fft_threads);

            gpv::GroundStateConfig gs;
            gs.winding = cfg.winding;
            gs.tau_step = cfg.tau_osc / cfg.omega_r();
            gs.tolerance = cfg.gs_tolerance;
            gs.max_iters = cfg.gs_max_iters;

            gpv::AnzSolveResult res;
            if (cfg.an_z >= 0 && !(cfg.n_particles > 0)) {
                res = gpv::particle_number_for_anz(cfg.an_z, gs, trap, grid);
            } else {
                gs.n_particles = cfg.n_particles;
                gs.interaction_g =
                    cfg.an_z == 0 ? 0.0 : cfg.constants().interaction_g();
                res.n_particles = cfg.n_particles;
                res.ground_state = gpv::solve_ground_state(gs, trap, grid);
                res.achieved_anz = gpv::compute_anz(res.ground_state.state,
                                                    cfg.scattering_length);
            }
            const auto path = std::filesystem::path(cfg.out_dir) / "groundstate.gpv";
            gpv::write_snapshot(res.ground_state.state, res.n_particles, path);
            printf("N = %.6g\nan_z = %.6g\nmu = %.9e J\niterations = %ld\n%s\n",
                   res.n_particles, res.achieved_anz, res.ground_state.mu,
                   res.ground_state.iterations, path.c_str());
            return kExitOk;
        });
    }

    if (app.got_subcommand(cmd_evolve)) {
        return run_guarded([&] {
            gpv::RunConfig cfg = load_config(config_path, out_dir);
            const gpv::RunArtifacts art = gpv::run_single(cfg, cfg.out_dir);
            if (art.report.splitting_time_s)
                printf("T = %.6g ms\n", *art.report.splitting_time_s * 1e3);
            else
                printf("T = none\n");
            printf("reference_diameter = %.6g um\nchain = %s\nout = %s\n",
                   art.report.reference_diameter * 1e6,
                   art.report.chain_detected ? "true" : "false",
                   art.run_dir.c_str());
            return kExitOk;
        });
    }

    if (app.got_subcommand(cmd_analyze)) {
        return run_guarded([&] {
            gpv::RunConfig cfg = load_config(config_path, out_dir);
            const gpv::Snapshot snap = gpv::read_snapshot(state_path);
            const double anz =
                gpv::compute_anz(snap.field, cfg.scattering_length);
            nlohmann::json j;
            j["t"] = snap.field.time;
            j["n_particles"] = snap.n_particles;
            j["norm"] = gpv::norm_squared(snap.field);
            j["an_z"] = anz;
            const gpv::ColumnDensity cd =
                gpv::column_density(snap.field, cfg.imaging_halfwidth);
            const double d_ref = cfg.reference_diameter > 0
                                     ? cfg.reference_diameter
                                     : 8.0 * std::max(cd.dx, cd.dy);
            gpv::MinimaParams mp;
            mp.mask_frac = cfg.mask_frac;
            mp.merge_frac = cfg.merge_frac;
            mp.min_depth_frac = cfg.min_depth_frac;
            const gpv::CoreMinima cm = gpv::find_core_minima(cd, d_ref, mp);
            j["minima_count"] = cm.minima.size();
            j["max_separation_m"] = cm.max_separation;
            try {
                j["winding"] = gpv::plane_winding(snap.field);
            } catch (const gpv::WindingUndefined&) {
                j["winding"] = nullptr;
            }
            auto& mins = j["minima"] = nlohmann::json::array();
            for (const auto& m : cm.minima) mins.push_back({m.x, m.y, m.depth});
            std::cout << j.dump(2) << "\n";
            return kExitOk;
        });
    }

    if (app.got_subcommand(cmd_ref)) {
        return run_guarded([&] {
            gpv::RunConfig cfg = load_config(config_path, out_dir);
            const double d = gpv::run_reference_diameter(cfg);
            printf("reference_diameter = %.9e m\n", d);
            return kExitOk;
        });
    }

    if (app.got_subcommand(cmd_sweep)) {
        return run_guarded([&] {
            gpv::RunConfig cfg = load_config(config_path, out_dir);
            if (workers > 0) cfg.workers = workers;
            std::vector<double> values;
            std::stringstream ss(anz_list);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) values.push_back(std::stod(item));
            if (values.empty()) throw gpv::ConfigError("sweep: empty an_z list");
            const auto rows = gpv::run_sweep(cfg, values, cfg.out_dir);
            for (const auto& r : rows) {
                if (r.splitting_time_s)
                    printf("an_z %-8g T = %.6g ms (%s)\n", r.an_z,
                           *r.splitting_time_s * 1e3, r.status.c_str());
                else
                    printf("an_z %-8g T = none (%s)\n", r.an_z, r.status.c_str());
            }
            return kExitOk;
        });
    }
    return kExitOk;
}
