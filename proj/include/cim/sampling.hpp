#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cim/ising.hpp"
#include "cim/machine.hpp"

namespace cim {

inline constexpr double kInfTime = std::numeric_limits<double>::infinity();
inline constexpr std::int64_t kNever = -1;

// Sign history of one trajectory, bit-packed per roundtrip (bit = 1 for +).
// Roundtrips are indexed from 1. Raw homodyne values and per-roundtrip
// measured energies are kept only when requested.
struct TrajectoryRecord {
    int n_pulses = 0;
    int words_per_roundtrip = 0;
    std::uint64_t roundtrips = 0; // roundtrips actually recorded
    bool terminated_early = false;
    std::vector<std::uint64_t> signs;
    std::vector<double> homodyne; // optional, n_pulses per roundtrip
    std::vector<double> measured_energy; // optional, one per roundtrip

    const std::uint64_t* signs_at(std::uint64_t k) const { // k is 1-based
        return signs.data() + (k - 1) * words_per_roundtrip;
    }
};

// Target configurations, bit-packed for the per-roundtrip match.
struct TargetSet {
    int n = 0;
    int words = 0;
    std::vector<SpinConfig> configs; // canonical representatives
    std::vector<double> energies;
    std::vector<std::uint64_t> packed; // words per config
    std::vector<std::uint64_t> mask_words;

    std::size_t size() const { return configs.size(); }
};

TargetSet make_target_set(const LevelSet& levels, int n);

std::vector<std::uint64_t> pack_signs(const double* w, int n);

// Earliest roundtrip whose sign vector equals the target or its global flip;
// kNever if it never appears. sgn(0) resolves to +1.
std::int64_t first_sampling_time(const TrajectoryRecord& traj, const SpinConfig& target);

// Harmonic aggregation 1/T = (1/N) sum 1/T_l with 1/infinity = 0; returns
// infinity when every entry is kNever.
double required_sampling_time(const std::vector<std::int64_t>& times);

struct ConfigStats {
    SpinConfig config;
    double energy = 0.0;
    std::vector<std::int64_t> first_times; // per trajectory, kNever if absent
    std::uint64_t count = 0;               // trajectories with a +/- combined hit
    std::uint64_t count_exact = 0;         // first hit matched the target as-is
    std::uint64_t count_flip = 0;          // first hit matched the global flip
    double t_samp = kInfTime;
};

struct SamplingReport {
    std::uint64_t seed = 0;
    std::uint64_t n_traj = 0;
    std::uint64_t t_sim = 0;
    std::uint64_t trajectories_run = 0;
    UserParams params;
    MachineParams derived;
    int problem_n = 0;
    std::size_t problem_pairs = 0;
    std::vector<ConfigStats> targets;
    double t_all = kInfTime;
    double t_any = kInfTime;
    std::uint64_t trajectories_to_all = 0; // 0 when never
    std::uint64_t trajectories_to_any = 0;
    std::uint64_t terminated_early = 0;

    double max_t_samp() const;
};

struct EnsembleOptions {
    std::uint64_t n_traj = 1000;
    std::uint64_t t_sim = 400;
    std::uint64_t seed = 0;
    int workers = 0;                // 0 = library default (all cores)
    bool stop_when_all_seen = false; // early exit for T_all/T_any studies
    bool serial_reference = false;   // plain-loop runner, kept for testing
};

// Runs n_traj independent trajectories (fresh state, fresh jitter, stream
// keyed by trajectory index) and aggregates the sampling metrics. Results
// are bit-identical for any worker count and for the serial reference.
SamplingReport run_ensemble(const IsingProblem& problem, const UserParams& params,
                            const EnsembleOptions& options, const TargetSet& targets);

// Expected required sampling time for i.i.d. fair-coin sign noise. Below
// threshold the homodyne signs are near-fair coins, so T_samp pins to this
// level instead of diverging; results well under it indicate genuine
// sampling.
double chance_level_t_samp(int n_spins, std::uint64_t t_sim);

inline bool above_chance(double t_samp, int n_spins, std::uint64_t t_sim) {
    return t_samp < chance_level_t_samp(n_spins, t_sim) / 3.0;
}

struct ScanPoint {
    double alpha_fb = 0.0;
    double pump_r = 0.0;
    double max_t_samp = kInfTime;
    bool sampled_above_chance = false;
    double lambda_max = 0.0;
    bool above_threshold = false;
};

struct ScanResult {
    std::vector<double> alphas;
    std::vector<double> pump_rs;
    std::vector<ScanPoint> points; // row-major over (alpha, pump_r)
};

ScanResult parameter_scan(const IsingProblem& problem, const UserParams& base,
                          const std::vector<double>& alphas,
                          const std::vector<double>& pump_rs,
                          const EnsembleOptions& options, const TargetSet& targets);

struct ScalingInstance {
    int n = 0;
    std::uint64_t instance_seed = 0;
    std::size_t n_conf = 0;
    double t_all = kInfTime;
    double t_any = kInfTime;
    double t_all_normalized = kInfTime;
    bool oracle_failed = false;
};

struct ScalingOptions {
    std::vector<int> sizes;
    int instances_per_size = 20;
    std::uint64_t t_sim_per_decay = 50; // T_sim = t_sim_per_decay * t_decay
    std::uint64_t max_traj = 4000;
    std::uint64_t seed = 0;
    int workers = 0;
    int levels = 2; // ground + first excited
};

struct ScalingFit {
    double base = 0.0;      // fitted exponential base of the median vs N
    double intercept = 0.0; // median at N = 0 on the log scale
};

struct ScalingResult {
    std::vector<ScalingInstance> instances;
    std::vector<int> sizes;
    std::vector<double> median_t_all;
    std::vector<double> median_t_any;
    ScalingFit fit_all;
    ScalingFit fit_any;
    double conf_scaling_exponent = 0.0; // log-log slope of T~_all vs N_conf
    std::size_t skipped = 0;
};

ScalingResult scaling_study(const ScalingOptions& options, const UserParams& params);

// Wall-clock seconds for a roundtrip count on a time-multiplexed machine with
// N pulses at repetition rate f_rep.
inline double wall_clock_seconds(double roundtrips, double n, double f_rep) {
    return roundtrips * n / f_rep;
}

// Single-trajectory simulation with full record retention (CLI `simulate`).
TrajectoryRecord simulate_trajectory(const IsingProblem& problem, const UserParams& params,
                                     std::uint64_t t_sim, std::uint64_t seed,
                                     std::uint64_t trajectory_index, bool keep_homodyne,
                                     bool keep_energy);

} // namespace cim
