#include "cim/reference.hpp"

#include <cmath>

namespace cim {

namespace {

constexpr std::uint64_t kConvergenceStream = 0x434f4e56ULL;

// Coarse-grains a fine noise path into per-roundtrip homodyne draws:
// z_rt = (1/sqrt(m)) sum of m consecutive fine draws, preserving the
// quadratic variation. Jitter and init channels are silenced.
struct CoarseNoise final : NoiseSource {
    const std::vector<double>* fine = nullptr; // steps x n, row-major
    int n = 0;
    std::uint64_t m = 1;

    double normal(std::uint64_t c0, std::uint64_t c1) const override {
        const std::uint64_t ch = c1 % channel::width;
        if (ch != channel::homodyne || c0 == 0) return 0.0;
        const std::uint64_t pulse = c1 / channel::width;
        const std::uint64_t begin = (c0 - 1) * m;
        double acc = 0.0;
        for (std::uint64_t j = 0; j < m; ++j)
            acc += (*fine)[(begin + j) * n + pulse];
        return acc / std::sqrt(static_cast<double>(m));
    }
};

struct FineNoise final : NoiseSource {
    const std::vector<double>* fine = nullptr;
    int n = 0;
    double normal(std::uint64_t c0, std::uint64_t c1) const override {
        return (*fine)[c0 * n + c1];
    }
};

} // namespace

ContTimeParams from_discrete(const MachineParams& params, double dt_roundtrip) {
    if (!(dt_roundtrip > 0.0)) throw domain_error("roundtrip duration must be positive");
    ContTimeParams c;
    c.dt = dt_roundtrip;
    c.gamma = params.r_loss * params.r_loss / dt_roundtrip;
    c.kappa = params.r_out * params.r_out / (2.0 * dt_roundtrip);
    c.p = params.beta * params.eps_tau / (std::sqrt(2.0) * dt_roundtrip);
    c.g = params.eps_tau * params.eps_tau / (4.0 * dt_roundtrip);
    c.lambda = params.j0 * params.r_out / dt_roundtrip;
    return c;
}

ContTimeParams continuum_limit(const UserParams& u, double coupling_abs_sum) {
    ContTimeParams c;
    c.gamma = 1.0 - u.eta_esc;
    c.kappa = u.eta_esc;
    c.p = u.pump_r;
    const double t = u.t_decay;
    const double n_sat_eff = std::max(u.n_sat, 800.0 / t); // eps_tau cap
    c.g = 2.0 / n_sat_eff;
    c.lambda = coupling_abs_sum > 0.0
                   ? u.alpha_fb * std::sqrt(2.0 * u.eta_esc / coupling_abs_sum)
                   : 0.0;
    return c;
}

SdeTrajectory integrate_gaussian_sde(const IsingProblem& problem, const ContTimeParams& params,
                                     const SdeOptions& options, const NoiseSource& noise) {
    const int n = problem.n();
    const double dt = params.dt;
    if (!(dt > 0.0)) throw domain_error("SDE integration needs dt > 0");
    const auto steps = static_cast<std::uint64_t>(std::llround(options.horizon / dt));

    SdeTrajectory traj;
    traj.n = n;
    traj.steps = steps;
    traj.mean.assign(static_cast<std::size_t>(steps + 1) * n, 0.0);
    traj.variance.assign(static_cast<std::size_t>(steps + 1) * n, 0.5);
    if (!options.initial_mean.empty()) {
        if (static_cast<int>(options.initial_mean.size()) != n)
            throw domain_error("initial mean size does not match problem");
        for (int i = 0; i < n; ++i) traj.mean[i] = options.initial_mean[i];
    }

    std::vector<double> q(traj.mean.begin(), traj.mean.begin() + n);
    std::vector<double> s(n, 0.5);
    std::vector<double> sp(n, 0.5); // p variance, used by the exact variant
    std::vector<double> jq(n), z(n), jz(n);

    const double root_dt = std::sqrt(dt);
    const double gk = params.g, kp = params.kappa, gm = params.gamma, pp = params.p;
    const double lam = params.lambda;
    const double root_k = std::sqrt(std::max(kp, 0.0));

    for (std::uint64_t step = 0; step < steps; ++step) {
        for (int i = 0; i < n; ++i) z[i] = noise.normal(step, i);
        problem.matvec(q.data(), jq.data());
        problem.matvec(z.data(), jz.data());

        for (int i = 0; i < n; ++i) {
            double drift_q =
                (pp - kp - gm) * q[i] - 0.5 * gk * q[i] * q[i] * q[i] + lam * jq[i];
            double drift_s = 2.0 * pp * s[i] - 2.0 * (gm + kp) * (s[i] - 0.5) -
                             4.0 * kp * (s[i] - 0.5) * (s[i] - 0.5) -
                             2.0 * gk * q[i] * q[i] * (1.5 * s[i] - 0.5);
            if (options.exact_terms) {
                drift_q += -0.5 * gk * q[i] * (3.0 * s[i] + sp[i] - 2.0);
                drift_s += -gk * (3.0 * s[i] * (s[i] + sp[i] / 3.0 - 1.0) - sp[i] + 1.0);
                const double drift_sp = -2.0 * pp * sp[i] - 2.0 * (gm + kp) * (sp[i] - 0.5);
                sp[i] += dt * drift_sp;
            }
            double diffusion = 0.0;
            if (kp > 0.0)
                diffusion = 2.0 * root_k * (s[i] - 0.5) * z[i] +
                            (lam / (2.0 * root_k)) * jz[i];
            q[i] += dt * drift_q + root_dt * diffusion;
            s[i] += dt * drift_s;
            if (!(s[i] > 0.0) || !std::isfinite(q[i]))
                throw divergence_error("SDE integration lost variance positivity or diverged");
        }
        for (int i = 0; i < n; ++i) {
            traj.mean[(step + 1) * static_cast<std::size_t>(n) + i] = q[i];
            traj.variance[(step + 1) * static_cast<std::size_t>(n) + i] = s[i];
        }
    }
    return traj;
}

ConvergenceResult convergence_compare(const IsingProblem& problem, const UserParams& base,
                                      const std::vector<double>& t_decays, double horizon_decay,
                                      double dt_fine, std::uint64_t seed) {
    const int n = problem.n();
    const auto fine_steps = static_cast<std::uint64_t>(std::llround(horizon_decay / dt_fine));
    const double abs_sum = problem.coupling_abs_sum();

    // One shared fine-grained standard-normal path.
    std::vector<double> fine(static_cast<std::size_t>(fine_steps) * n);
    const std::uint64_t key = stream_key(seed, kConvergenceStream);
    for (std::uint64_t step = 0; step < fine_steps; ++step)
        for (int i = 0; i < n; ++i)
            fine[step * static_cast<std::size_t>(n) + i] = philox_normal(key, step, i);

    ContTimeParams cont = continuum_limit(base, abs_sum);
    cont.dt = dt_fine;
    FineNoise fine_noise;
    fine_noise.fine = &fine;
    fine_noise.n = n;
    SdeOptions sde_opts;
    sde_opts.horizon = horizon_decay;
    const SdeTrajectory reference = integrate_gaussian_sde(problem, cont, sde_opts, fine_noise);

    ConvergenceResult result;
    result.t_decays = t_decays;
    for (double t_decay : t_decays) {
        UserParams u = base;
        u.t_decay = t_decay;
        const MachineParams machine = derive_params(u, abs_sum);

        const auto m = static_cast<std::uint64_t>(std::llround(1.0 / (t_decay * dt_fine)));
        const auto roundtrips =
            static_cast<std::uint64_t>(std::llround(horizon_decay * t_decay));

        CoarseNoise coarse;
        coarse.fine = &fine;
        coarse.n = n;
        coarse.m = m;

        MachineState state = initial_state(OperatingMode::gaussian, n, coarse);
        std::vector<double> record(n);
        double acc = 0.0;
        std::uint64_t count = 0;
        for (std::uint64_t k = 1; k <= roundtrips; ++k) {
            roundtrip(state, machine, problem, coarse, record);
            const double* ref = reference.mean_at(k * m);
            for (int i = 0; i < n; ++i) {
                const double d = state.pulses[i].mean.q - ref[i];
                acc += d * d;
            }
            count += n;
        }
        result.rms.push_back(std::sqrt(acc / static_cast<double>(count)));
    }
    return result;
}

double landscape_potential(const std::vector<double>& q, const ContTimeParams& params,
                           const IsingProblem& problem) {
    const int n = problem.n();
    if (static_cast<int>(q.size()) != n)
        throw domain_error("landscape potential: size mismatch");
    std::vector<double> jq(n);
    problem.matvec(q.data(), jq.data());
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
        v -= 0.5 * (params.p - params.kappa - params.gamma) * q[i] * q[i];
        v += 0.125 * params.g * q[i] * q[i] * q[i] * q[i];
        v -= 0.5 * params.lambda * q[i] * jq[i];
    }
    return v;
}

} // namespace cim
