// Throughput benchmark: OpenMP trajectory ensemble vs the serial reference
// runner, on a representative N=16 sampling workload. Also reports the hash
// of the aggregated metrics so divergence between the two paths is visible.

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cim/sampling.hpp"

namespace {

double seconds(std::function<void()> fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

std::uint64_t digest(const cim::SamplingReport& report) {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    auto mixin = [&h](std::uint64_t v) {
        h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    };
    for (const auto& t : report.targets) {
        mixin(t.count);
        for (std::int64_t ft : t.first_times) mixin(static_cast<std::uint64_t>(ft + 2));
    }
    mixin(report.trajectories_to_all);
    mixin(report.trajectories_to_any);
    return h;
}

} // namespace

int main() {
    const auto problem = cim::generate_sk1(16, 42);
    const auto levels = cim::enumerate_brute_force(problem, 2);
    const auto targets = cim::make_target_set(levels, problem.n());

    cim::UserParams params;
    params.t_decay = 4.0;
    params.eta_esc = 0.2;
    params.pump_r = 0.8;
    params.n_sat = 200.0;
    params.alpha_fb = 5.0;

    cim::EnsembleOptions opts;
    opts.n_traj = 200;
    opts.t_sim = 400;
    opts.seed = 7;

    cim::SamplingReport serial_report, parallel_report;
    opts.serial_reference = true;
    const double t_serial =
        seconds([&] { serial_report = cim::run_ensemble(problem, params, opts, targets); });
    opts.serial_reference = false;
    const double t_parallel =
        seconds([&] { parallel_report = cim::run_ensemble(problem, params, opts, targets); });

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    const double traj_per_s_serial = opts.n_traj / t_serial;
    const double traj_per_s_parallel = opts.n_traj / t_parallel;
    std::printf("workload: N=16 SK1, %llu trajectories x %llu roundtrips\n",
                static_cast<unsigned long long>(opts.n_traj),
                static_cast<unsigned long long>(opts.t_sim));
    std::printf("serial reference: %8.2f traj/s (%.3f s)\n", traj_per_s_serial, t_serial);
    std::printf("openmp (%2d thr):  %8.2f traj/s (%.3f s), speedup %.2fx\n", threads,
                traj_per_s_parallel, t_parallel, t_parallel > 0 ? t_serial / t_parallel : 0.0);
    const bool match = digest(serial_report) == digest(parallel_report);
    std::printf("results identical: %s\n", match ? "yes" : "NO");
    return match ? 0 : 1;
}
