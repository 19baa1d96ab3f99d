#pragma once

#include <string>

#include "cim/ising.hpp"
#include "cim/reference.hpp"
#include "cim/sampling.hpp"

#include "json.hpp"

namespace cim {

using ordered_json = nlohmann::ordered_json;

// Problem file: {"n": int, "couplings": [[i, j, J], ...]} with i < j.
ordered_json problem_to_json(const IsingProblem& p);
IsingProblem problem_from_json(const ordered_json& j);

// Level-set file: {"energies": [...], "levels": [{"energy": E, "configs": [...]}]}.
ordered_json levelset_to_json(const LevelSet& l);
LevelSet levelset_from_json(const ordered_json& j);

ordered_json report_to_json(const SamplingReport& report, double histogram_bin_width);
ordered_json scan_to_json(const ScanResult& scan, const UserParams& base,
                          const EnsembleOptions& options, std::uint64_t seed);
ordered_json scaling_to_json(const ScalingResult& result, const ScalingOptions& options,
                             const UserParams& params);

std::string trajectory_to_csv(const TrajectoryRecord& traj);

// Continuous-reference trajectory in the same roundtrip,pulse,w schema so the
// two can be cross-plotted; `stride` fine steps map to one output row.
std::string sde_trajectory_to_csv(const SdeTrajectory& traj, std::uint64_t stride = 1);

// Run configuration (strict schema: unknown keys are rejected with their path).
struct RunConfig {
    UserParams params;
    std::uint64_t n_traj = 1000;
    std::uint64_t t_sim = 0; // 0 = 100 * t_decay
    std::uint64_t seed = 0;
    int workers = 0;
    std::vector<double> scan_alphas;
    std::vector<double> scan_pump_rs;
    ScalingOptions scaling;
    bool has_scaling = false;

    std::uint64_t resolved_t_sim() const {
        if (t_sim > 0) return t_sim;
        return static_cast<std::uint64_t>(std::llround(100.0 * params.t_decay));
    }
};

RunConfig config_from_json(const ordered_json& j);

ordered_json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

OperatingMode mode_from_string(const std::string& text);
std::string mode_to_string(OperatingMode mode);

} // namespace cim
