#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpv/groundstate.hpp"
#include "gpv/io.hpp"

namespace gpv {

/// Grid with extents resolved (auto extents sized from the Thomas-Fermi
/// radii of the target an_z, centered between the sagged and unsagged trap
/// minima).
Grid resolve_grid(const RunConfig& config);

/// Trap built from the config's constants and calibrated coefficients.
TrapSchedule resolve_trap(const RunConfig& config);

struct RunArtifacts {
    SplitReport report;
    TimeSeries series;
    std::vector<FrameAnalysis> frames;
    double n_particles = 0;
    double mu = 0;
    std::filesystem::path run_dir;
};

/// Ground state (kappa=1 reference + kappa=2 initial state), full protocol
/// evolution and analysis for one configuration. Writes config echo,
/// series.csv, frames.jsonl, report.json and any requested snapshots into
/// run_dir.
RunArtifacts run_single(const RunConfig& config,
                        const std::filesystem::path& run_dir);

struct SweepRow {
    double an_z = 0;
    std::optional<double> splitting_time_s;
    std::string status;  // "ok" or the failure reason
};

/// Independent run_single jobs, one per an_z, executed by a small worker
/// pool; results are written sorted by an_z regardless of completion order.
std::vector<SweepRow> run_sweep(const RunConfig& config,
                                const std::vector<double>& anz_values,
                                const std::filesystem::path& out_dir);

/// kappa=1 ground state at the config's an_z; returns the 75% column-density
/// core diameter used by the splitting criterion.
double run_reference_diameter(const RunConfig& config);

}  // namespace gpv
