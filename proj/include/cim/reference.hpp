#pragma once

#include <cstdint>
#include <vector>

#include "cim/ising.hpp"
#include "cim/machine.hpp"
#include "cim/rng.hpp"

namespace cim {

// Continuous-time Gaussian model used as the high-finesse reference. Rates
// follow the discrete-to-continuous map (gamma: loss, kappa: outcoupling,
// p: pump, g: nonlinearity, lambda: feedback coupling).
struct ContTimeParams {
    double gamma = 0.0;
    double kappa = 0.0;
    double p = 0.0;
    double g = 0.0;
    double lambda = 0.0;
    double dt = 1.0 / 256.0;
};

// Literal per-roundtrip rate map: gamma = r_loss^2/dt, kappa = r_out^2/(2 dt),
// p = beta eps_tau/(sqrt(2) dt), g = eps_tau^2/(4 dt), lambda = j0 r_out/dt,
// where dt is the roundtrip duration in the chosen time unit.
ContTimeParams from_discrete(const MachineParams& params, double dt_roundtrip);

// Closed-form infinite-finesse limit in cavity-decay-time units, where
// kappa + gamma = 1 and p equals the pump parameter exactly.
ContTimeParams continuum_limit(const UserParams& u, double coupling_abs_sum);

struct SdeOptions {
    double horizon = 15.0;     // integration time in the params' unit
    bool exact_terms = false;  // retain the additional g-scaled terms
    std::vector<double> initial_mean; // per pulse; empty = vacuum
};

struct SdeTrajectory {
    int n = 0;
    std::uint64_t steps = 0;
    std::vector<double> mean;     // (steps+1) x n, row-major, includes t = 0
    std::vector<double> variance; // same layout, q variance

    const double* mean_at(std::uint64_t step) const { return mean.data() + step * n; }
    const double* variance_at(std::uint64_t step) const { return variance.data() + step * n; }
};

// Euler-Maruyama integration of the continuous-time Gaussian equations of
// motion. Noise draws are requested per (step, pulse) so that a shared path
// can drive both this reference and coarse-grained discrete runs.
SdeTrajectory integrate_gaussian_sde(const IsingProblem& problem, const ContTimeParams& params,
                                     const SdeOptions& options, const NoiseSource& noise);

struct ConvergenceResult {
    std::vector<double> t_decays;
    std::vector<double> rms; // RMS deviation of <q_i> from the reference, per finesse
};

// Drives discrete machines at several finesses and the continuous reference
// with one shared fine-grained noise path (dt in decay-time units), then
// reports the RMS mean-amplitude deviation per finesse.
ConvergenceResult convergence_compare(const IsingProblem& problem, const UserParams& base,
                                      const std::vector<double>& t_decays, double horizon_decay,
                                      double dt_fine, std::uint64_t seed);

// Mean-field landscape V(q); its negative gradient is the deterministic part
// of the continuous-time mean equation of motion.
double landscape_potential(const std::vector<double>& q, const ContTimeParams& params,
                           const IsingProblem& problem);

} // namespace cim
