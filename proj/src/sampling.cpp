#include "cim/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cim/rng.hpp"

namespace cim {

namespace {

constexpr std::uint64_t kScanStream = 0x5343414eULL;
constexpr std::uint64_t kScaleStream = 0x53495a45ULL;
constexpr std::uint64_t kEnsembleStream = 0x454e53ULL;
constexpr std::uint64_t kEarlyStopBlock = 64; // fixed, so results never depend on workers

int effective_workers(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

// Per-trajectory outcome: first roundtrip at which each target appeared in
// its exact form and in its flipped form.
struct TrajOutcome {
    std::vector<std::int64_t> first_exact;
    std::vector<std::int64_t> first_flip;
    bool terminated = false;
    bool failed = false;
    std::string message;
};

void run_single_trajectory(const IsingProblem& problem, const UserParams& params,
                           std::uint64_t t_sim, std::uint64_t master_seed,
                           std::uint64_t traj_index, const TargetSet& targets,
                           bool stop_when_all_seen, TrajOutcome& out) {
    const int n = problem.n();
    const std::size_t n_targets = targets.size();
    out.first_exact.assign(n_targets, kNever);
    out.first_flip.assign(n_targets, kNever);

    PhiloxNoise noise(stream_key(master_seed, traj_index));
    const UserParams jittered = apply_jitter(params, noise);
    const MachineParams machine = derive_params(jittered, problem.coupling_abs_sum());
    MachineState state = initial_state(params.mode, n, noise);

    std::vector<double> record(n);
    std::vector<std::uint64_t> packed(targets.words);
    std::size_t unseen_combined = n_targets;

    for (std::uint64_t k = 1; k <= t_sim; ++k) {
        const RoundtripResult rt =
            step_roundtrip(state, machine, problem, noise, jittered.sigma_fb, record);
        bool finite_record = true;
        for (double w : record)
            if (!std::isfinite(w)) finite_record = false;
        if (!finite_record) {
            out.terminated = true;
            break;
        }

        auto bits = pack_signs(record.data(), n);
        for (std::size_t t = 0; t < n_targets; ++t) {
            const std::uint64_t* tgt = targets.packed.data() + t * targets.words;
            bool exact = true, flip = true;
            for (int w = 0; w < targets.words; ++w) {
                const std::uint64_t mask = targets.mask_words[w];
                if ((bits[w] & mask) != tgt[w]) exact = false;
                if (((~bits[w]) & mask) != tgt[w]) flip = false;
            }
            const bool had_combined =
                out.first_exact[t] != kNever || out.first_flip[t] != kNever;
            if (exact && out.first_exact[t] == kNever)
                out.first_exact[t] = static_cast<std::int64_t>(k);
            if (flip && out.first_flip[t] == kNever)
                out.first_flip[t] = static_cast<std::int64_t>(k);
            if (!had_combined && (exact || flip)) --unseen_combined;
        }
        if (stop_when_all_seen && unseen_combined == 0) break;
        if (rt.overflow) {
            out.terminated = true;
            break;
        }
    }
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    if (v.size() % 2 == 1) return v[m];
    return 0.5 * (v[m - 1] + v[m]);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    bool ok = false;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit fit;
    if (x.size() != y.size() || x.size() < 2) return fit;
    const double nx = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nx;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / nx;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.ok = true;
    return fit;
}

} // namespace

TargetSet make_target_set(const LevelSet& levels, int n) {
    TargetSet t;
    t.n = n;
    t.words = (n + 63) / 64;
    t.mask_words.assign(t.words, ~0ULL);
    const int rem = n % 64;
    if (rem != 0) t.mask_words.back() = (1ULL << rem) - 1;

    for (const auto& level : levels.levels) {
        for (const auto& config : level.configs) {
            if (static_cast<int>(config.size()) != n)
                throw domain_error("target configuration size does not match problem");
            SpinConfig canon = canonical_config(config);
            t.configs.push_back(canon);
            t.energies.push_back(level.energy);
            std::vector<std::uint64_t> packed(t.words, 0);
            for (int i = 0; i < n; ++i)
                if (canon[i] > 0) packed[i / 64] |= (1ULL << (i % 64));
            t.packed.insert(t.packed.end(), packed.begin(), packed.end());
        }
    }
    return t;
}

std::vector<std::uint64_t> pack_signs(const double* w, int n) {
    std::vector<std::uint64_t> bits((n + 63) / 64, 0);
    for (int i = 0; i < n; ++i)
        if (!(w[i] < 0.0)) bits[i / 64] |= (1ULL << (i % 64)); // sgn(0) := +1
    return bits;
}

std::int64_t first_sampling_time(const TrajectoryRecord& traj, const SpinConfig& target) {
    if (static_cast<int>(target.size()) != traj.n_pulses)
        throw domain_error("target size does not match trajectory record");
    const int words = traj.words_per_roundtrip;
    std::vector<std::uint64_t> tgt(words, 0);
    std::vector<std::uint64_t> mask(words, ~0ULL);
    const int rem = traj.n_pulses % 64;
    if (rem != 0) mask.back() = (1ULL << rem) - 1;
    for (int i = 0; i < traj.n_pulses; ++i)
        if (target[i] > 0) tgt[i / 64] |= (1ULL << (i % 64));

    for (std::uint64_t k = 1; k <= traj.roundtrips; ++k) {
        const std::uint64_t* bits = traj.signs_at(k);
        bool exact = true, flip = true;
        for (int w = 0; w < words; ++w) {
            if ((bits[w] & mask[w]) != tgt[w]) exact = false;
            if (((~bits[w]) & mask[w]) != tgt[w]) flip = false;
        }
        if (exact || flip) return static_cast<std::int64_t>(k);
    }
    return kNever;
}

double required_sampling_time(const std::vector<std::int64_t>& times) {
    if (times.empty()) throw domain_error("required_sampling_time needs at least one entry");
    double acc = 0.0;
    for (std::int64_t t : times) {
        if (t == kNever) continue;
        if (t <= 0) throw domain_error("first-sampling times must be positive");
        acc += 1.0 / static_cast<double>(t);
    }
    if (acc == 0.0) return kInfTime;
    return static_cast<double>(times.size()) / acc;
}

double SamplingReport::max_t_samp() const {
    double worst = 0.0;
    for (const auto& t : targets) worst = std::max(worst, t.t_samp);
    return targets.empty() ? kInfTime : worst;
}

SamplingReport run_ensemble(const IsingProblem& problem, const UserParams& params,
                            const EnsembleOptions& options, const TargetSet& targets) {
    if (targets.size() == 0) throw domain_error("run_ensemble needs a nonempty target set");
    if (targets.n != problem.n()) throw domain_error("target set does not match problem size");
    if (options.n_traj == 0) throw domain_error("run_ensemble needs at least one trajectory");
    // validate the operating point up front, outside the worker loop
    const MachineParams derived = derive_params(params, problem.coupling_abs_sum());

    const std::size_t n_targets = targets.size();
    std::vector<TrajOutcome> outcomes(options.n_traj);

    const std::uint64_t block_size =
        options.stop_when_all_seen ? kEarlyStopBlock : options.n_traj;
    const int workers = effective_workers(options.workers);
    std::uint64_t trajectories_run = 0;

    std::vector<bool> seen(n_targets, false);
    std::size_t seen_count = 0;

    for (std::uint64_t begin = 0; begin < options.n_traj; begin += block_size) {
        const std::uint64_t end = std::min(begin + block_size, options.n_traj);
        const std::int64_t sbegin = static_cast<std::int64_t>(begin);
        const std::int64_t send = static_cast<std::int64_t>(end);

        if (options.serial_reference) {
            for (std::int64_t l = sbegin; l < send; ++l)
                run_single_trajectory(problem, params, options.t_sim, options.seed,
                                      static_cast<std::uint64_t>(l), targets,
                                      options.stop_when_all_seen, outcomes[l]);
        } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
            for (std::int64_t l = sbegin; l < send; ++l) {
                try {
                    run_single_trajectory(problem, params, options.t_sim, options.seed,
                                          static_cast<std::uint64_t>(l), targets,
                                          options.stop_when_all_seen, outcomes[l]);
                } catch (const std::exception& e) {
                    outcomes[l].failed = true;
                    outcomes[l].message = e.what();
                }
            }
        }
        trajectories_run = end;

        for (std::uint64_t l = begin; l < end; ++l) {
            if (outcomes[l].failed) throw divergence_error(outcomes[l].message);
            for (std::size_t t = 0; t < n_targets; ++t) {
                if (seen[t]) continue;
                if (outcomes[l].first_exact[t] != kNever ||
                    outcomes[l].first_flip[t] != kNever) {
                    seen[t] = true;
                    ++seen_count;
                }
            }
        }
        if (options.stop_when_all_seen && seen_count == n_targets) break;
    }

    SamplingReport report;
    report.seed = options.seed;
    report.n_traj = options.n_traj;
    report.t_sim = options.t_sim;
    report.trajectories_run = trajectories_run;
    report.params = params;
    report.derived = derived;
    report.problem_n = problem.n();
    report.problem_pairs = problem.couplings().size();

    report.targets.resize(n_targets);
    for (std::size_t t = 0; t < n_targets; ++t) {
        auto& stats = report.targets[t];
        stats.config = targets.configs[t];
        stats.energy = targets.energies[t];
        stats.first_times.resize(trajectories_run);
        for (std::uint64_t l = 0; l < trajectories_run; ++l) {
            const std::int64_t fe = outcomes[l].first_exact[t];
            const std::int64_t ff = outcomes[l].first_flip[t];
            std::int64_t combined = kNever;
            if (fe != kNever && ff != kNever)
                combined = std::min(fe, ff);
            else if (fe != kNever)
                combined = fe;
            else if (ff != kNever)
                combined = ff;
            stats.first_times[l] = combined;
            if (combined == kNever) continue;
            ++stats.count;
            if (fe == combined)
                ++stats.count_exact;
            else
                ++stats.count_flip;
        }
        stats.t_samp = required_sampling_time(stats.first_times);
    }

    std::vector<bool> all_seen(n_targets, false);
    std::size_t covered = 0;
    for (std::uint64_t l = 0; l < trajectories_run; ++l) {
        bool any_hit = false;
        for (std::size_t t = 0; t < n_targets; ++t) {
            const bool hit = outcomes[l].first_exact[t] != kNever ||
                             outcomes[l].first_flip[t] != kNever;
            if (!hit) continue;
            any_hit = true;
            if (!all_seen[t]) {
                all_seen[t] = true;
                ++covered;
            }
        }
        if (any_hit && report.trajectories_to_any == 0) {
            report.trajectories_to_any = l + 1;
            report.t_any = static_cast<double>((l + 1) * options.t_sim);
        }
        if (covered == n_targets && report.trajectories_to_all == 0) {
            report.trajectories_to_all = l + 1;
            report.t_all = static_cast<double>((l + 1) * options.t_sim);
        }
        if (outcomes[l].terminated) ++report.terminated_early;
    }
    return report;
}

double chance_level_t_samp(int n_spins, std::uint64_t t_sim) {
    // i.i.d. fair signs hit a +/- combined configuration with probability
    // p = 2^(1-n) per roundtrip; E[1/T_first] over one trajectory is ~ p H(T).
    const double p = std::pow(2.0, 1.0 - n_spins);
    double harmonic = 0.0;
    for (std::uint64_t k = 1; k <= t_sim; ++k) harmonic += 1.0 / static_cast<double>(k);
    const double rate = p * harmonic;
    return rate > 0.0 ? 1.0 / rate : kInfTime;
}

ScanResult parameter_scan(const IsingProblem& problem, const UserParams& base,
                          const std::vector<double>& alphas,
                          const std::vector<double>& pump_rs,
                          const EnsembleOptions& options, const TargetSet& targets) {
    if (alphas.empty() || pump_rs.empty()) throw domain_error("parameter scan needs a grid");
    ScanResult result;
    result.alphas = alphas;
    result.pump_rs = pump_rs;
    result.points.reserve(alphas.size() * pump_rs.size());

    std::size_t index = 0;
    for (double alpha : alphas) {
        for (double r : pump_rs) {
            UserParams point = base;
            point.alpha_fb = alpha;
            point.pump_r = r;

            EnsembleOptions opts = options;
            opts.seed = stream_key(options.seed, kScanStream + index);
            const SamplingReport report = run_ensemble(problem, point, opts, targets);

            ScanPoint sp;
            sp.alpha_fb = alpha;
            sp.pump_r = r;
            sp.max_t_samp = report.max_t_samp();
            sp.sampled_above_chance =
                above_chance(sp.max_t_samp, problem.n(), options.t_sim);
            const auto threshold =
                linear_threshold(derive_params(point, problem.coupling_abs_sum()), problem);
            sp.lambda_max = threshold.lambda_max;
            sp.above_threshold = threshold.above;
            result.points.push_back(sp);
            ++index;
        }
    }
    return result;
}

ScalingResult scaling_study(const ScalingOptions& options, const UserParams& params) {
    if (options.sizes.size() < 3) throw domain_error("scaling study needs at least 3 sizes");
    if (options.instances_per_size < 1) throw domain_error("scaling study needs instances");

    ScalingResult result;
    result.sizes = options.sizes;

    for (std::size_t si = 0; si < options.sizes.size(); ++si) {
        const int n = options.sizes[si];
        for (int inst = 0; inst < options.instances_per_size; ++inst) {
            ScalingInstance record;
            record.n = n;
            record.instance_seed =
                stream_key(options.seed, kScaleStream + static_cast<std::uint64_t>(n) * 4096 +
                                             static_cast<std::uint64_t>(inst));
            const IsingProblem problem = generate_sk1(n, record.instance_seed);

            LevelSet oracle;
            try {
                if (n <= 24) {
                    oracle = enumerate_brute_force(problem, options.levels);
                } else {
                    PtOptions pt;
                    pt.seed = record.instance_seed;
                    oracle = enumerate_parallel_tempering(problem, options.levels, pt);
                }
            } catch (const std::exception&) {
                record.oracle_failed = true;
            }
            if (!record.oracle_failed && oracle.config_count() == 0) record.oracle_failed = true;
            if (record.oracle_failed) {
                ++result.skipped;
                result.instances.push_back(record);
                continue;
            }

            record.n_conf = oracle.config_count();
            const TargetSet targets = make_target_set(oracle, n);

            EnsembleOptions opts;
            opts.n_traj = options.max_traj;
            opts.t_sim = static_cast<std::uint64_t>(
                std::llround(options.t_sim_per_decay * params.t_decay));
            opts.seed = stream_key(record.instance_seed, kEnsembleStream);
            opts.workers = options.workers;
            opts.stop_when_all_seen = true;

            const SamplingReport report = run_ensemble(problem, params, opts, targets);
            record.t_all = report.t_all;
            record.t_any = report.t_any;
            result.instances.push_back(record);
        }
    }

    // Medians and the exponential fits of median vs N.
    std::vector<double> fit_n_all, fit_log_all, fit_n_any, fit_log_any;
    for (std::size_t si = 0; si < options.sizes.size(); ++si) {
        const int n = options.sizes[si];
        std::vector<double> t_all, t_any;
        for (const auto& rec : result.instances) {
            if (rec.n != n || rec.oracle_failed) continue;
            t_all.push_back(rec.t_all);
            t_any.push_back(rec.t_any);
        }
        const double med_all = median_of(t_all);
        const double med_any = median_of(t_any);
        result.median_t_all.push_back(med_all);
        result.median_t_any.push_back(med_any);
        if (std::isfinite(med_all) && med_all > 0.0) {
            fit_n_all.push_back(n);
            fit_log_all.push_back(std::log(med_all));
        }
        if (std::isfinite(med_any) && med_any > 0.0) {
            fit_n_any.push_back(n);
            fit_log_any.push_back(std::log(med_any));
        }
        for (auto& rec : result.instances) {
            if (rec.n != n || rec.oracle_failed) continue;
            rec.t_all_normalized =
                std::isfinite(med_all) && med_all > 0.0 ? rec.t_all / med_all : kInfTime;
        }
    }
    const LineFit all_fit = least_squares(fit_n_all, fit_log_all);
    const LineFit any_fit = least_squares(fit_n_any, fit_log_any);
    result.fit_all = {all_fit.ok ? std::exp(all_fit.slope) : 0.0, all_fit.intercept};
    result.fit_any = {any_fit.ok ? std::exp(any_fit.slope) : 0.0, any_fit.intercept};

    std::vector<double> log_conf, log_norm;
    for (const auto& rec : result.instances) {
        if (rec.oracle_failed || !std::isfinite(rec.t_all_normalized) ||
            rec.t_all_normalized <= 0.0 || rec.n_conf == 0)
            continue;
        log_conf.push_back(std::log(static_cast<double>(rec.n_conf)));
        log_norm.push_back(std::log(rec.t_all_normalized));
    }
    const LineFit conf_fit = least_squares(log_conf, log_norm);
    result.conf_scaling_exponent = conf_fit.ok ? conf_fit.slope : 0.0;
    return result;
}

TrajectoryRecord simulate_trajectory(const IsingProblem& problem, const UserParams& params,
                                     std::uint64_t t_sim, std::uint64_t seed,
                                     std::uint64_t trajectory_index, bool keep_homodyne,
                                     bool keep_energy) {
    const int n = problem.n();
    PhiloxNoise noise(stream_key(seed, trajectory_index));
    const UserParams jittered = apply_jitter(params, noise);
    const MachineParams machine = derive_params(jittered, problem.coupling_abs_sum());
    MachineState state = initial_state(params.mode, n, noise);

    TrajectoryRecord traj;
    traj.n_pulses = n;
    traj.words_per_roundtrip = (n + 63) / 64;
    traj.signs.reserve(traj.words_per_roundtrip * t_sim);
    if (keep_homodyne) traj.homodyne.reserve(static_cast<std::size_t>(n) * t_sim);
    if (keep_energy) traj.measured_energy.reserve(t_sim);

    std::vector<double> record(n);
    SpinConfig signs(n);
    for (std::uint64_t k = 1; k <= t_sim; ++k) {
        const RoundtripResult rt =
            step_roundtrip(state, machine, problem, noise, jittered.sigma_fb, record);
        bool finite_record = true;
        for (double w : record)
            if (!std::isfinite(w)) finite_record = false;
        if (!finite_record) {
            traj.terminated_early = true;
            break;
        }
        auto bits = pack_signs(record.data(), n);
        traj.signs.insert(traj.signs.end(), bits.begin(), bits.end());
        if (keep_homodyne) traj.homodyne.insert(traj.homodyne.end(), record.begin(), record.end());
        if (keep_energy) {
            for (int i = 0; i < n; ++i) signs[i] = record[i] < 0.0 ? -1 : +1;
            traj.measured_energy.push_back(energy(problem, signs));
        }
        traj.roundtrips = k;
        if (rt.overflow) {
            traj.terminated_early = true;
            break;
        }
    }
    return traj;
}

} // namespace cim
