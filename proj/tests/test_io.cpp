#include "doctest.h"

#include "cim/report_io.hpp"

using namespace cim;

TEST_SUITE_BEGIN("io");

TEST_CASE("problem files round-trip through JSON") {
    const auto p = generate_sk1(8, 77);
    const auto j = problem_to_json(p);
    CHECK(j.at("n") == 8);
    CHECK(j.at("couplings").size() == 28);
    const auto q = problem_from_json(j);
    CHECK(q.n() == p.n());
    for (std::size_t i = 0; i < p.couplings().size(); ++i) {
        CHECK(q.couplings()[i].i == p.couplings()[i].i);
        CHECK(q.couplings()[i].j == p.couplings()[i].j);
        CHECK(q.couplings()[i].value == p.couplings()[i].value);
    }
}

TEST_CASE("problem schema is strict") {
    ordered_json j{{"n", 4}, {"couplings", ordered_json::array()}, {"extra", 1}};
    CHECK_THROWS_AS(problem_from_json(j), config_error);
    ordered_json missing{{"n", 4}};
    CHECK_THROWS_AS(problem_from_json(missing), config_error);
    ordered_json bad_row{{"n", 4}, {"couplings", ordered_json::array({{0, 1}})}};
    CHECK_THROWS_AS(problem_from_json(bad_row), config_error);
}

TEST_CASE("level sets round-trip through JSON with canonical config strings") {
    const auto p = generate_sk1(10, 5);
    const auto levels = enumerate_brute_force(p, 2);
    const auto j = levelset_to_json(levels);
    REQUIRE(j.at("energies").size() == 2);
    const auto back = levelset_from_json(j);
    REQUIRE(back.levels.size() == levels.levels.size());
    for (std::size_t l = 0; l < levels.levels.size(); ++l) {
        CHECK(back.levels[l].energy == levels.levels[l].energy);
        CHECK(back.levels[l].configs == levels.levels[l].configs);
    }
}

TEST_CASE("config strings reject foreign characters") {
    CHECK_THROWS_AS(config_from_string("+-0"), config_error);
    CHECK(config_to_string(config_from_string("+-+")) == "+-+");
}

TEST_CASE("run configs parse with defaults and reject unknown keys") {
    ordered_json j = ordered_json::parse(R"({
        "params": {"t_decay": 4, "eta_esc": 0.2, "pump_r": 0.8, "n_sat": 200,
                    "alpha_fb": 5.0, "mode": "gaussian",
                    "jitter": {"alpha_sigma": 0.6}},
        "n_traj": 500, "seed": 9
    })");
    const auto cfg = config_from_json(j);
    CHECK(cfg.params.t_decay == 4.0);
    CHECK(cfg.params.alpha_fb == 5.0);
    CHECK(cfg.params.jitter.alpha_sigma == 0.6);
    CHECK(cfg.n_traj == 500);
    CHECK(cfg.seed == 9);
    CHECK(cfg.resolved_t_sim() == 400); // 100 * t_decay default

    ordered_json bad = j;
    bad["params"]["typo_key"] = 1;
    CHECK_THROWS_WITH_AS(config_from_json(bad),
                         "config error at config/params/typo_key: unknown key", config_error);

    ordered_json bad_mode = j;
    bad_mode["params"]["mode"] = "quantum";
    CHECK_THROWS_AS(config_from_json(bad_mode), config_error);
}

TEST_CASE("reports serialize infinities as null and keep key order") {
    SamplingReport report;
    report.seed = 4;
    report.n_traj = 10;
    report.t_sim = 40;
    report.trajectories_run = 10;
    report.t_all = kInfTime;
    report.t_any = 40.0;
    ConfigStats stats;
    stats.config = config_from_string("+-");
    stats.energy = -2.0;
    stats.first_times = {3, kNever, 7};
    stats.t_samp = required_sampling_time(stats.first_times);
    stats.count = 2;
    report.targets.push_back(stats);

    const auto j = report_to_json(report, 4.0);
    CHECK(j.at("ensemble").at("t_all").is_null());
    CHECK(j.at("ensemble").at("t_any") == 40.0);
    CHECK(j.at("targets")[0].at("config") == "+-");
    const std::string text = j.dump();
    CHECK(text.find("\"schema\"") < text.find("\"seed\""));
    CHECK(text.find("null") != std::string::npos);
}

TEST_CASE("continuous-reference CSV shares the trajectory schema") {
    const auto problem = generate_sk1(3, 4);
    ContTimeParams rates;
    rates.kappa = 0.5;
    rates.gamma = 0.5;
    rates.dt = 0.25;
    SdeOptions opts;
    opts.horizon = 1.0;
    opts.initial_mean = {1.0, 0.5, -0.5};
    ZeroNoise quiet;
    const auto traj = integrate_gaussian_sde(problem, rates, opts, quiet);
    const auto csv = sde_trajectory_to_csv(traj, 2);
    CHECK(csv.rfind("roundtrip,pulse,w\n", 0) == 0);
    // 4 fine steps, stride 2 -> 2 rows x 3 pulses + header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("trajectory CSV has the documented layout") {
    const auto problem = generate_sk1(3, 1);
    UserParams u;
    u.t_decay = 4.0;
    u.eta_esc = 0.5;
    u.pump_r = 0.8;
    u.alpha_fb = 2.0;
    const auto traj = simulate_trajectory(problem, u, 2, 1, 0, true, false);
    const auto csv = trajectory_to_csv(traj);
    CHECK(csv.rfind("roundtrip,pulse,w\n", 0) == 0);
    // header + 2 roundtrips x 3 pulses
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(csv.find("\n1,0,") != std::string::npos);
    CHECK(csv.find("\n2,2,") != std::string::npos);
}

TEST_SUITE_END();
