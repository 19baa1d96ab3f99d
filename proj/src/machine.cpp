#include "cim/machine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cim/crystal.hpp"
#include "cim/linalg.hpp"

namespace cim {

namespace {

void validate(const UserParams& u) {
    if (!(u.t_decay > 0.0)) throw domain_error("t_decay must be positive");
    if (!(u.eta_esc > 0.0 && u.eta_esc <= 1.0)) throw domain_error("eta_esc must lie in (0, 1]");
    if (!(u.n_sat > 0.0)) throw domain_error("n_sat must be positive");
    if (!(u.sigma_fb >= 0.0)) throw domain_error("sigma_fb must be >= 0");
}

GaussianMode facet_loss(const GaussianMode& pulse, double r_loss) {
    auto mixed = apply_beamsplitter(tensor(pulse, vacuum_mode()), r_loss);
    return partial_trace(mixed, ModeSel::A);
}

} // namespace

MachineParams derive_params(const UserParams& u, double coupling_abs_sum) {
    validate(u);
    MachineParams m;
    m.t_decay = u.t_decay;

    const double decay = 1.0 - std::exp(-2.0 / u.t_decay); // total power attenuation
    const double big_r_out = u.eta_esc * decay;
    if (big_r_out >= 1.0) throw domain_error("infeasible outcoupling: R_out >= 1");
    const double big_r_loss = 1.0 - std::exp(-2.0 / u.t_decay) / (1.0 - big_r_out);
    m.r_out = std::sqrt(big_r_out);
    m.r_loss = std::sqrt(1.0 - std::sqrt(1.0 - big_r_loss)); // per facet

    if (u.mode == OperatingMode::coherent_state) {
        // No optical nonlinearity: eps_tau = 0 and the pump is undefined.
        m.eps_tau = 0.0;
        m.beta_th = 0.0;
        m.beta = 0.0;
        m.n_sat_eff = std::numeric_limits<double>::infinity();
    } else {
        const double et2 = std::min(8.0 / (u.n_sat * u.t_decay), 1e-2);
        m.eps_tau = std::sqrt(et2);
        m.beta_th = std::sqrt(2.0) / (m.eps_tau * u.t_decay);
        m.beta = u.pump_r * m.beta_th;
        m.n_sat_eff = 8.0 / (et2 * u.t_decay);
    }

    // Positive gain aligns the pulse amplitudes with the couplings, which
    // minimizes the Ising energy -sum J_ij s_i s_j.
    m.j0 = coupling_abs_sum > 0.0
               ? u.alpha_fb / (std::sqrt(u.t_decay) * std::sqrt(coupling_abs_sum))
               : 0.0;
    return m;
}

UserParams apply_jitter(const UserParams& u, const NoiseSource& noise) {
    if (!u.jitter.any()) return u;
    UserParams out = u;
    if (u.jitter.alpha_sigma != 0.0) {
        const double z = noise.normal(0, noise_counter(0, channel::jitter_alpha));
        out.alpha_fb = std::max(u.alpha_fb + u.jitter.alpha_sigma * z, 0.0);
    }
    if (u.jitter.pump_sigma != 0.0) {
        const double z = noise.normal(0, noise_counter(0, channel::jitter_pump));
        out.pump_r = std::clamp(u.pump_r + u.jitter.pump_sigma * z, -1.999999, 1.999999);
    }
    return out;
}

MachineState initial_state(OperatingMode mode, int n, const NoiseSource& noise) {
    if (n < 1) throw domain_error("machine needs at least one pulse");
    MachineState s;
    s.mode = mode;
    if (mode == OperatingMode::mean_field) {
        s.amplitudes.resize(n);
        for (int i = 0; i < n; ++i) {
            const double z = noise.normal(0, noise_counter(i, channel::init_sign));
            s.amplitudes[i] = (z >= 0.0 ? +1.0 : -1.0) * kMeanFieldSeed;
        }
    } else {
        s.pulses.assign(n, vacuum_mode());
    }
    return s;
}

RoundtripResult roundtrip(MachineState& state, const MachineParams& params,
                          const IsingProblem& problem, const NoiseSource& noise,
                          std::span<double> record) {
    const int n = state.n();
    if (problem.n() != n) throw domain_error("problem size does not match machine state");
    if (record.size() != static_cast<std::size_t>(n))
        throw domain_error("record span size does not match machine state");

    const std::uint64_t k = state.roundtrip + 1;
    RoundtripResult result;

    for (int i = 0; i < n; ++i) {
        GaussianMode pulse = state.pulses[i];
        pulse = facet_loss(pulse, params.r_loss);
        if (params.eps_tau > 0.0) {
            auto with_pump = propagate_with_pump(pulse, params.beta, params.eps_tau);
            pulse = partial_trace(with_pump, ModeSel::A);
        }
        pulse = facet_loss(pulse, params.r_loss);

        auto split = apply_beamsplitter(tensor(pulse, vacuum_mode()), params.r_out);
        auto outcome =
            homodyne_q(split, ModeSel::B, noise.normal(k, noise_counter(i, channel::homodyne)));
        record[i] = outcome.value;
        state.pulses[i] = outcome.conditioned;
    }

    // Feedback displacement from the same-roundtrip record.
    for (int i = 0; i < n; ++i) {
        const double* row = problem.dense().data() + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * record[j];
        state.pulses[i] = displace(state.pulses[i], {params.j0 * acc, 0.0});
    }

    for (int i = 0; i < n; ++i) {
        const GaussianMode& pulse = state.pulses[i];
        if (!all_finite(pulse)) {
            if (state.mode == OperatingMode::coherent_state) {
                result.overflow = true;
                break;
            }
            throw divergence_error("roundtrip produced non-finite pulse state");
        }
        if (std::fabs(pulse.mean.q) > kOverflowLimit) {
            result.overflow = true;
            if (state.mode != OperatingMode::coherent_state)
                throw divergence_error("pulse mean overflow outside coherent-state mode");
            break;
        }
    }

    ++state.roundtrip;
    return result;
}

RoundtripResult mean_field_roundtrip(MachineState& state, const MachineParams& params,
                                     const IsingProblem& problem, const NoiseSource& noise,
                                     double sigma_fb, std::span<double> record) {
    const int n = state.n();
    if (problem.n() != n) throw domain_error("problem size does not match machine state");
    if (record.size() != static_cast<std::size_t>(n))
        throw domain_error("record span size does not match machine state");

    const std::uint64_t k = state.roundtrip + 1;
    const double a = std::sqrt(1.0 - params.r_loss * params.r_loss);
    const double t_out = std::sqrt(1.0 - params.r_out * params.r_out);
    // Rescaled amplitude q~ = sqrt(g/kappa) <q>, so <x> = (r_out/eps_tau) q~.
    const double x_scale = params.eps_tau > 0.0 ? params.r_out / params.eps_tau : 0.0;

    for (int i = 0; i < n; ++i) {
        double amp = state.amplitudes[i] * a;
        if (params.eps_tau > 0.0) {
            // Means-only crystal step: dx/ds = x_b x, dx_b/ds = -x^2/2.
            std::array<double, 2> y{amp * x_scale, params.beta / std::sqrt(2.0)};
            y = detail::rk4(y, params.eps_tau, kCrystalSteps,
                            [](const std::array<double, 2>& s, std::array<double, 2>& d) {
                                d[0] = s[1] * s[0];
                                d[1] = -0.5 * s[0] * s[0];
                            });
            amp = y[0] / x_scale;
        }
        amp *= a;
        record[i] = params.r_out * amp;
        state.amplitudes[i] = amp * t_out;
    }

    for (int i = 0; i < n; ++i) {
        const double* row = problem.dense().data() + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            double w = record[j];
            if (sigma_fb > 0.0)
                w += sigma_fb * noise.normal(k, noise_counter(j, channel::feedback));
            acc += row[j] * w;
        }
        state.amplitudes[i] += params.j0 * acc;
    }

    for (double amp : state.amplitudes)
        if (!std::isfinite(amp)) throw divergence_error("mean-field amplitudes diverged");

    ++state.roundtrip;
    return {};
}

RoundtripResult step_roundtrip(MachineState& state, const MachineParams& params,
                               const IsingProblem& problem, const NoiseSource& noise,
                               double sigma_fb, std::span<double> record) {
    if (state.mode == OperatingMode::mean_field)
        return mean_field_roundtrip(state, params, problem, noise, sigma_fb, record);
    return roundtrip(state, params, problem, noise, record);
}

ThresholdInfo linear_threshold(const MachineParams& params, const IsingProblem& problem) {
    const double a2 = 1.0 - params.r_loss * params.r_loss; // both facets on the mean
    const double t_out = std::sqrt(1.0 - params.r_out * params.r_out);
    const double gain = std::exp(params.beta * params.eps_tau / std::sqrt(2.0));

    double best = 0.0;
    for (double ev : symmetric_eigenvalues(problem.dense(), problem.n()))
        best = std::max(best, std::fabs(t_out + params.j0 * params.r_out * ev));

    ThresholdInfo info;
    info.lambda_max = a2 * gain * best;
    info.above = info.lambda_max > 1.0;
    return info;
}

} // namespace cim
