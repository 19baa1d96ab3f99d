// Command-line front end: SK1 instance generation, exact/heuristic level-set
// oracles, sampling ensembles, parameter scans, scaling studies, and single
// trajectory simulation. All commands are deterministic given (config, seed).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cim/report_io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitBudget = 4;

std::uint64_t resolve_seed(std::uint64_t seed, bool seed_given) {
    // Environment override wins over the config default but not over an
    // explicit --seed.
    if (seed_given) return seed;
    if (const char* env = std::getenv("CIM_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw cim::config_error("CIM_SEED must be an unsigned integer");
        return v;
    }
    return seed;
}

cim::IsingProblem load_problem(const std::string& path) {
    return cim::problem_from_json(cim::load_json_file(path));
}

cim::LevelSet resolve_targets(const cim::IsingProblem& problem,
                              const std::optional<std::string>& targets_path, int levels) {
    if (targets_path) return cim::levelset_from_json(cim::load_json_file(*targets_path));
    return cim::enumerate_brute_force(problem, levels);
}

struct SampleArgs {
    std::string problem_path;
    std::optional<std::string> config_path;
    std::optional<std::string> targets_path;
    std::string out_path = "report.json";
    std::optional<std::string> trajectory_path;
    std::uint64_t trajectories = 0;
    std::uint64_t roundtrips = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string mode;
    int workers = 0;
};

void run_sample(const SampleArgs& args) {
    cim::RunConfig cfg;
    if (args.config_path) cfg = cim::config_from_json(cim::load_json_file(*args.config_path));
    if (args.trajectories > 0) cfg.n_traj = args.trajectories;
    if (args.roundtrips > 0) cfg.t_sim = args.roundtrips;
    if (!args.mode.empty()) cfg.params.mode = cim::mode_from_string(args.mode);
    if (args.workers > 0) cfg.workers = args.workers;
    cfg.seed = resolve_seed(args.seed_given ? args.seed : cfg.seed, args.seed_given);

    const cim::IsingProblem problem = load_problem(args.problem_path);
    const cim::LevelSet levels = resolve_targets(problem, args.targets_path, 2);
    const cim::TargetSet targets = cim::make_target_set(levels, problem.n());

    cim::EnsembleOptions opts;
    opts.n_traj = cfg.n_traj;
    opts.t_sim = cfg.resolved_t_sim();
    opts.seed = cfg.seed;
    opts.workers = cfg.workers;

    const cim::SamplingReport report = cim::run_ensemble(problem, cfg.params, opts, targets);
    cim::write_text_file(args.out_path,
                         cim::report_to_json(report, cfg.params.t_decay).dump(2) + "\n");

    if (args.trajectory_path) {
        std::string csv = "roundtrip,pulse,w\n";
        for (std::uint64_t l = 0; l < cfg.n_traj; ++l) {
            const auto traj = cim::simulate_trajectory(problem, cfg.params, opts.t_sim, cfg.seed,
                                                       l, true, false);
            const std::string one = cim::trajectory_to_csv(traj);
            csv += one.substr(one.find('\n') + 1); // drop the per-trajectory header
        }
        cim::write_text_file(*args.trajectory_path, csv);
    }
    std::cout << "wrote " << args.out_path << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-time Gaussian-state simulator of a measurement-feedback "
                 "coherent Ising machine"};
    app.require_subcommand(1);

    // generate-sk1
    auto* gen = app.add_subcommand("generate-sk1", "Generate a random SK1 problem instance");
    int gen_n = 16;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "problem.json";
    gen->add_option("--n", gen_n, "Number of spins (>= 2)")->required();
    gen->add_option("--seed", gen_seed, "Instance seed");
    gen->add_option("--out", gen_out, "Output problem file");

    // enumerate
    auto* enu = app.add_subcommand("enumerate", "Enumerate the lowest energy levels");
    std::string enu_problem, enu_method = "brute", enu_out = "levels.json";
    int enu_levels = 2;
    std::uint64_t enu_seed = 0;
    std::uint64_t enu_sweeps = 100000;
    int enu_replicas = 32;
    enu->add_option("--problem", enu_problem, "Problem file")->required();
    enu->add_option("--levels", enu_levels, "Number of energy levels");
    enu->add_option("--method", enu_method, "brute | pt");
    enu->add_option("--seed", enu_seed, "Seed (pt method)");
    enu->add_option("--sweeps", enu_sweeps, "Sweeps per replica (pt method)");
    enu->add_option("--replicas", enu_replicas, "Replica count (pt method)");
    enu->add_option("--out", enu_out, "Output level-set file");

    // sample
    auto* smp = app.add_subcommand("sample", "Run a sampling ensemble and write a report");
    SampleArgs sample;
    smp->add_option("--problem", sample.problem_path, "Problem file")->required();
    std::string smp_config, smp_targets, smp_traj;
    smp->add_option("--config", smp_config, "Run configuration (JSON)");
    smp->add_option("--targets", smp_targets, "Level-set file with target configurations");
    smp->add_option("--trajectories", sample.trajectories, "Trajectory count override");
    smp->add_option("--roundtrips", sample.roundtrips, "Roundtrips per trajectory override");
    auto* smp_seed_opt = smp->add_option("--seed", sample.seed, "Master seed override");
    smp->add_option("--mode", sample.mode, "gaussian | coherent | meanfield");
    smp->add_option("--workers", sample.workers, "Worker threads (0 = all cores)");
    smp->add_option("--out", sample.out_path, "Output report file");
    smp->add_option("--emit-trajectory", smp_traj, "Also write the full homodyne record CSV");

    // scan
    auto* scn = app.add_subcommand("scan", "Required-sampling-time map over (alpha, pump_r)");
    std::string scn_problem, scn_config, scn_targets, scn_out = "scan.json";
    int scn_workers = 0;
    scn->add_option("--problem", scn_problem, "Problem file")->required();
    scn->add_option("--config", scn_config, "Run configuration with a 'scan' block")->required();
    scn->add_option("--targets", scn_targets, "Level-set file with target configurations");
    scn->add_option("--workers", scn_workers, "Worker threads");
    scn->add_option("--out", scn_out, "Output file");

    // scaling
    auto* scl = app.add_subcommand("scaling", "Median T_all/T_any scaling study over N");
    std::string scl_config, scl_out = "scaling.json";
    int scl_workers = 0;
    scl->add_option("--config", scl_config, "Run configuration with a 'scaling' block")
        ->required();
    scl->add_option("--workers", scl_workers, "Worker threads");
    scl->add_option("--out", scl_out, "Output file");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Single-trajectory run with full CSV record");
    std::string sim_problem, sim_config, sim_out = "trajectory.csv";
    std::uint64_t sim_traj = 1, sim_roundtrips = 0, sim_seed = 0;
    std::string sim_mode;
    sim->add_option("--problem", sim_problem, "Problem file")->required();
    sim->add_option("--config", sim_config, "Run configuration (JSON)");
    sim->add_option("--trajectories", sim_traj, "Number of trajectories to emit");
    sim->add_option("--roundtrips", sim_roundtrips, "Roundtrips per trajectory");
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Master seed");
    sim->add_option("--mode", sim_mode, "gaussian | coherent | meanfield");
    sim->add_option("--out", sim_out, "Output CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed()) {
            if (gen_n < 2) throw cim::config_error("generate-sk1 needs --n >= 2");
            const auto problem = cim::generate_sk1(gen_n, gen_seed);
            cim::write_text_file(gen_out, cim::problem_to_json(problem).dump(2) + "\n");
            std::cout << "wrote " << gen_out << "\n";
        } else if (enu->parsed()) {
            const auto problem = load_problem(enu_problem);
            cim::LevelSet levels;
            if (enu_method == "brute") {
                levels = cim::enumerate_brute_force(problem, enu_levels);
            } else if (enu_method == "pt") {
                cim::PtOptions pt;
                pt.seed = enu_seed;
                pt.sweeps = enu_sweeps;
                pt.replicas = enu_replicas;
                levels = cim::enumerate_parallel_tempering(problem, enu_levels, pt);
            } else {
                throw cim::config_error("enumerate --method must be 'brute' or 'pt'");
            }
            cim::write_text_file(enu_out, cim::levelset_to_json(levels).dump(2) + "\n");
            std::cout << "wrote " << enu_out << "\n";
        } else if (smp->parsed()) {
            if (!smp_config.empty()) sample.config_path = smp_config;
            if (!smp_targets.empty()) sample.targets_path = smp_targets;
            if (!smp_traj.empty()) sample.trajectory_path = smp_traj;
            sample.seed_given = smp_seed_opt->count() > 0;
            run_sample(sample);
        } else if (scn->parsed()) {
            auto cfg = cim::config_from_json(cim::load_json_file(scn_config));
            if (cfg.scan_alphas.empty() || cfg.scan_pump_rs.empty())
                throw cim::config_error("scan requires a config with a 'scan' block");
            if (scn_workers > 0) cfg.workers = scn_workers;
            cfg.seed = resolve_seed(cfg.seed, false);
            const auto problem = load_problem(scn_problem);
            const auto levels = resolve_targets(
                problem,
                scn_targets.empty() ? std::nullopt : std::optional<std::string>(scn_targets), 2);
            const auto targets = cim::make_target_set(levels, problem.n());
            cim::EnsembleOptions opts;
            opts.n_traj = cfg.n_traj;
            opts.t_sim = cfg.resolved_t_sim();
            opts.seed = cfg.seed;
            opts.workers = cfg.workers;
            const auto result = cim::parameter_scan(problem, cfg.params, cfg.scan_alphas,
                                                    cfg.scan_pump_rs, opts, targets);
            cim::write_text_file(scn_out,
                                 cim::scan_to_json(result, cfg.params, opts, cfg.seed).dump(2) +
                                     "\n");
            std::cout << "wrote " << scn_out << "\n";
        } else if (scl->parsed()) {
            auto cfg = cim::config_from_json(cim::load_json_file(scl_config));
            if (!cfg.has_scaling)
                throw cim::config_error("scaling requires a config with a 'scaling' block");
            if (scl_workers > 0) cfg.workers = scl_workers;
            cfg.scaling.seed = resolve_seed(cfg.seed, false);
            cfg.scaling.workers = cfg.workers;
            const auto result = cim::scaling_study(cfg.scaling, cfg.params);
            cim::write_text_file(
                scl_out, cim::scaling_to_json(result, cfg.scaling, cfg.params).dump(2) + "\n");
            std::cout << "wrote " << scl_out << "\n";
        } else if (sim->parsed()) {
            cim::RunConfig cfg;
            if (!sim_config.empty()) cfg = cim::config_from_json(cim::load_json_file(sim_config));
            if (!sim_mode.empty()) cfg.params.mode = cim::mode_from_string(sim_mode);
            if (sim_roundtrips > 0) cfg.t_sim = sim_roundtrips;
            cfg.seed = resolve_seed(sim_seed_opt->count() > 0 ? sim_seed : cfg.seed,
                                    sim_seed_opt->count() > 0);
            const auto problem = load_problem(sim_problem);
            std::string csv = "roundtrip,pulse,w\n";
            for (std::uint64_t l = 0; l < sim_traj; ++l) {
                const auto traj = cim::simulate_trajectory(problem, cfg.params,
                                                           cfg.resolved_t_sim(), cfg.seed, l,
                                                           true, false);
                const std::string one = cim::trajectory_to_csv(traj);
                csv += one.substr(one.find('\n') + 1);
            }
            cim::write_text_file(sim_out, csv);
            std::cout << "wrote " << sim_out << "\n";
        }
    } catch (const cim::budget_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const cim::divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const cim::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cim::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
