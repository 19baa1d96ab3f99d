#include "cim/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace cim {

namespace {

ordered_json time_or_null(double t) {
    if (std::isinf(t)) return nullptr;
    return t;
}

[[noreturn]] void bad_config(const std::string& path, const std::string& what) {
    throw config_error("config error at " + path + ": " + what);
}

void reject_unknown(const ordered_json& j, const std::set<std::string>& allowed,
                    const std::string& path) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) bad_config(path + "/" + key, "unknown key");
}

ordered_json histogram_json(const std::vector<std::int64_t>& first_times, double bin_width) {
    const auto width = static_cast<std::int64_t>(std::max(1.0, std::floor(bin_width)));
    std::map<std::int64_t, std::uint64_t> bins;
    for (std::int64_t t : first_times) {
        if (t == kNever) continue;
        ++bins[((t - 1) / width) * width + 1];
    }
    ordered_json out;
    out["bin_width"] = width;
    ordered_json rows = ordered_json::array();
    for (const auto& [start, count] : bins) rows.push_back({start, count});
    out["bins"] = std::move(rows);
    return out;
}

ordered_json params_json(const UserParams& p) {
    ordered_json j;
    j["t_decay"] = p.t_decay;
    j["eta_esc"] = p.eta_esc;
    j["pump_r"] = p.pump_r;
    j["n_sat"] = p.n_sat;
    j["alpha_fb"] = p.alpha_fb;
    j["mode"] = mode_to_string(p.mode);
    j["sigma_fb"] = p.sigma_fb;
    j["jitter"] = {{"alpha_sigma", p.jitter.alpha_sigma}, {"pump_sigma", p.jitter.pump_sigma}};
    return j;
}

ordered_json derived_json(const MachineParams& m) {
    ordered_json j;
    j["r_loss"] = m.r_loss;
    j["r_out"] = m.r_out;
    j["eps_tau"] = m.eps_tau;
    j["beta_th"] = m.beta_th;
    j["beta"] = m.beta;
    j["j0"] = m.j0;
    j["n_sat_eff"] = std::isinf(m.n_sat_eff) ? ordered_json(nullptr) : ordered_json(m.n_sat_eff);
    return j;
}

} // namespace

ordered_json problem_to_json(const IsingProblem& p) {
    ordered_json j;
    j["n"] = p.n();
    ordered_json rows = ordered_json::array();
    for (const auto& c : p.couplings()) {
        if (c.value == std::floor(c.value))
            rows.push_back({c.i, c.j, static_cast<std::int64_t>(c.value)});
        else
            rows.push_back({c.i, c.j, c.value});
    }
    j["couplings"] = std::move(rows);
    return j;
}

IsingProblem problem_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("couplings"))
        throw config_error("problem file must contain 'n' and 'couplings'");
    reject_unknown(j, {"n", "couplings"}, "problem");
    const int n = j.at("n").get<int>();
    std::vector<Coupling> couplings;
    for (const auto& row : j.at("couplings")) {
        if (!row.is_array() || row.size() != 3)
            throw config_error("problem couplings must be [i, j, J] triples");
        couplings.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<double>()});
    }
    return IsingProblem(n, std::move(couplings));
}

ordered_json levelset_to_json(const LevelSet& l) {
    ordered_json j;
    ordered_json energies = ordered_json::array();
    ordered_json levels = ordered_json::array();
    for (const auto& level : l.levels) {
        energies.push_back(level.energy);
        ordered_json configs = ordered_json::array();
        for (const auto& c : level.configs) configs.push_back(config_to_string(c));
        levels.push_back({{"energy", level.energy}, {"configs", std::move(configs)}});
    }
    j["energies"] = std::move(energies);
    j["levels"] = std::move(levels);
    return j;
}

LevelSet levelset_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("levels"))
        throw config_error("level-set file must contain 'levels'");
    reject_unknown(j, {"energies", "levels"}, "levelset");
    LevelSet out;
    for (const auto& row : j.at("levels")) {
        Level level;
        level.energy = row.at("energy").get<double>();
        for (const auto& text : row.at("configs"))
            level.configs.push_back(config_from_string(text.get<std::string>()));
        out.levels.push_back(std::move(level));
    }
    return out;
}

ordered_json report_to_json(const SamplingReport& report, double histogram_bin_width) {
    ordered_json j;
    j["schema"] = "cim-sampling-report/1";
    j["seed"] = report.seed;
    j["n_traj"] = report.n_traj;
    j["t_sim"] = report.t_sim;
    j["trajectories_run"] = report.trajectories_run;
    j["params"] = params_json(report.params);
    j["derived"] = derived_json(report.derived);
    j["problem"] = {{"n", report.problem_n}, {"pairs", report.problem_pairs}};
    j["ensemble"] = {{"t_all", time_or_null(report.t_all)},
                     {"t_any", time_or_null(report.t_any)},
                     {"trajectories_to_all", report.trajectories_to_all},
                     {"trajectories_to_any", report.trajectories_to_any},
                     {"terminated_early", report.terminated_early},
                     {"max_t_samp", time_or_null(report.max_t_samp())}};
    ordered_json targets = ordered_json::array();
    for (const auto& t : report.targets) {
        ordered_json row;
        row["config"] = config_to_string(t.config);
        row["energy"] = t.energy;
        row["count"] = t.count;
        row["count_exact"] = t.count_exact;
        row["count_flip"] = t.count_flip;
        row["t_samp"] = time_or_null(t.t_samp);
        row["first_times_histogram"] = histogram_json(t.first_times, histogram_bin_width);
        targets.push_back(std::move(row));
    }
    j["targets"] = std::move(targets);
    return j;
}

ordered_json scan_to_json(const ScanResult& scan, const UserParams& base,
                          const EnsembleOptions& options, std::uint64_t seed) {
    ordered_json j;
    j["schema"] = "cim-scan-report/1";
    j["seed"] = seed;
    j["params"] = params_json(base);
    j["protocol"] = {{"n_traj", options.n_traj}, {"t_sim", options.t_sim}};
    j["alpha"] = scan.alphas;
    j["pump_r"] = scan.pump_rs;
    ordered_json rows = ordered_json::array();
    for (const auto& p : scan.points) {
        rows.push_back({{"alpha_fb", p.alpha_fb},
                        {"pump_r", p.pump_r},
                        {"max_t_samp", time_or_null(p.max_t_samp)},
                        {"sampled_above_chance", p.sampled_above_chance},
                        {"lambda_max", p.lambda_max},
                        {"above_threshold", p.above_threshold}});
    }
    j["grid"] = std::move(rows);
    return j;
}

ordered_json scaling_to_json(const ScalingResult& result, const ScalingOptions& options,
                             const UserParams& params) {
    ordered_json j;
    j["schema"] = "cim-scaling-report/1";
    j["seed"] = options.seed;
    j["params"] = params_json(params);
    j["protocol"] = {{"sizes", options.sizes},
                     {"instances_per_size", options.instances_per_size},
                     {"t_sim_per_decay", options.t_sim_per_decay},
                     {"max_traj", options.max_traj},
                     {"levels", options.levels}};
    ordered_json rows = ordered_json::array();
    for (const auto& inst : result.instances) {
        rows.push_back({{"n", inst.n},
                        {"instance_seed", inst.instance_seed},
                        {"n_conf", inst.n_conf},
                        {"t_all", time_or_null(inst.t_all)},
                        {"t_any", time_or_null(inst.t_any)},
                        {"t_all_normalized", time_or_null(inst.t_all_normalized)},
                        {"oracle_failed", inst.oracle_failed}});
    }
    j["instances"] = std::move(rows);
    j["median_t_all"] = ordered_json::array();
    j["median_t_any"] = ordered_json::array();
    for (double m : result.median_t_all) j["median_t_all"].push_back(time_or_null(m));
    for (double m : result.median_t_any) j["median_t_any"].push_back(time_or_null(m));
    j["fit"] = {{"t_all_base", result.fit_all.base},
                {"t_any_base", result.fit_any.base},
                {"conf_scaling_exponent", result.conf_scaling_exponent},
                {"skipped", result.skipped}};
    return j;
}

std::string trajectory_to_csv(const TrajectoryRecord& traj) {
    std::string out = "roundtrip,pulse,w\n";
    char buf[64];
    for (std::uint64_t k = 1; k <= traj.roundtrips; ++k) {
        for (int i = 0; i < traj.n_pulses; ++i) {
            double w;
            if (!traj.homodyne.empty()) {
                w = traj.homodyne[(k - 1) * traj.n_pulses + i];
            } else {
                const std::uint64_t* bits = traj.signs_at(k);
                w = (bits[i / 64] >> (i % 64)) & 1 ? 1.0 : -1.0;
            }
            std::snprintf(buf, sizeof(buf), "%llu,%d,%.17g\n",
                          static_cast<unsigned long long>(k), i, w);
            out += buf;
        }
    }
    return out;
}

std::string sde_trajectory_to_csv(const SdeTrajectory& traj, std::uint64_t stride) {
    if (stride == 0) throw domain_error("csv stride must be positive");
    std::string out = "roundtrip,pulse,w\n";
    char buf[64];
    std::uint64_t row = 1;
    for (std::uint64_t step = stride; step <= traj.steps; step += stride, ++row) {
        const double* mean = traj.mean_at(step);
        for (int i = 0; i < traj.n; ++i) {
            std::snprintf(buf, sizeof(buf), "%llu,%d,%.17g\n",
                          static_cast<unsigned long long>(row), i, mean[i]);
            out += buf;
        }
    }
    return out;
}

OperatingMode mode_from_string(const std::string& text) {
    if (text == "gaussian") return OperatingMode::gaussian;
    if (text == "coherent") return OperatingMode::coherent_state;
    if (text == "meanfield") return OperatingMode::mean_field;
    throw config_error("mode must be one of gaussian|coherent|meanfield, got '" + text + "'");
}

std::string mode_to_string(OperatingMode mode) {
    switch (mode) {
        case OperatingMode::gaussian: return "gaussian";
        case OperatingMode::coherent_state: return "coherent";
        case OperatingMode::mean_field: return "meanfield";
    }
    return "gaussian";
}

RunConfig config_from_json(const ordered_json& j) {
    if (!j.is_object()) throw config_error("config must be a JSON object");
    reject_unknown(j, {"params", "n_traj", "t_sim", "seed", "workers", "scan", "scaling"},
                   "config");
    RunConfig cfg;

    if (j.contains("params")) {
        const auto& p = j.at("params");
        reject_unknown(p,
                       {"t_decay", "eta_esc", "pump_r", "n_sat", "alpha_fb", "mode", "sigma_fb",
                        "jitter"},
                       "config/params");
        if (p.contains("t_decay")) cfg.params.t_decay = p.at("t_decay").get<double>();
        if (p.contains("eta_esc")) cfg.params.eta_esc = p.at("eta_esc").get<double>();
        if (p.contains("pump_r")) cfg.params.pump_r = p.at("pump_r").get<double>();
        if (p.contains("n_sat")) cfg.params.n_sat = p.at("n_sat").get<double>();
        if (p.contains("alpha_fb")) cfg.params.alpha_fb = p.at("alpha_fb").get<double>();
        if (p.contains("mode")) cfg.params.mode = mode_from_string(p.at("mode").get<std::string>());
        if (p.contains("sigma_fb")) cfg.params.sigma_fb = p.at("sigma_fb").get<double>();
        if (p.contains("jitter")) {
            const auto& jit = p.at("jitter");
            reject_unknown(jit, {"alpha_sigma", "pump_sigma"}, "config/params/jitter");
            if (jit.contains("alpha_sigma"))
                cfg.params.jitter.alpha_sigma = jit.at("alpha_sigma").get<double>();
            if (jit.contains("pump_sigma"))
                cfg.params.jitter.pump_sigma = jit.at("pump_sigma").get<double>();
        }
    }
    if (j.contains("n_traj")) cfg.n_traj = j.at("n_traj").get<std::uint64_t>();
    if (j.contains("t_sim")) cfg.t_sim = j.at("t_sim").get<std::uint64_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    if (j.contains("scan")) {
        const auto& s = j.at("scan");
        reject_unknown(s, {"alpha", "pump_r"}, "config/scan");
        if (!s.contains("alpha") || !s.contains("pump_r"))
            bad_config("config/scan", "scan needs 'alpha' and 'pump_r' arrays");
        cfg.scan_alphas = s.at("alpha").get<std::vector<double>>();
        cfg.scan_pump_rs = s.at("pump_r").get<std::vector<double>>();
    }
    if (j.contains("scaling")) {
        const auto& s = j.at("scaling");
        reject_unknown(s, {"sizes", "instances_per_size", "t_sim_per_decay", "max_traj", "levels"},
                       "config/scaling");
        if (!s.contains("sizes")) bad_config("config/scaling", "scaling needs 'sizes'");
        cfg.scaling.sizes = s.at("sizes").get<std::vector<int>>();
        if (s.contains("instances_per_size"))
            cfg.scaling.instances_per_size = s.at("instances_per_size").get<int>();
        if (s.contains("t_sim_per_decay"))
            cfg.scaling.t_sim_per_decay = s.at("t_sim_per_decay").get<std::uint64_t>();
        if (s.contains("max_traj")) cfg.scaling.max_traj = s.at("max_traj").get<std::uint64_t>();
        if (s.contains("levels")) cfg.scaling.levels = s.at("levels").get<int>();
        cfg.has_scaling = true;
    }
    return cfg;
}

ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write file: " + path);
    out << text;
    if (!out) throw config_error("write failed: " + path);
}

} // namespace cim
