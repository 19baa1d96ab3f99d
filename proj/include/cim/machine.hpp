#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cim/errors.hpp"
#include "cim/gaussian.hpp"
#include "cim/ising.hpp"
#include "cim/rng.hpp"

namespace cim {

enum class OperatingMode { gaussian, coherent_state, mean_field };

// Per-trajectory Gaussian perturbations of the feedback gain and the pump
// parameter; the perturbed pump is clamped to |r| < 2 and the perturbed gain
// to alpha >= 0.
struct JitterSpec {
    double alpha_sigma = 0.0;
    double pump_sigma = 0.0;
    bool any() const { return alpha_sigma != 0.0 || pump_sigma != 0.0; }
};

// User-facing operating point. alpha_fb is the feedback gain parameter
// (distinct from the displacement amplitude fed to displace()).
struct UserParams {
    double t_decay = 4.0;  // roundtrips for the photon number to decay by 1/e^2
    double eta_esc = 0.5;  // fraction of attenuation due to the measured outcoupler
    double pump_r = 0.0;   // pump field over threshold; may be negative or zero
    double n_sat = 200.0;  // saturation photon number at pump_r = 2
    double alpha_fb = 0.0; // feedback gain parameter
    OperatingMode mode = OperatingMode::gaussian;
    double sigma_fb = 0.0; // feedback-noise root-variance (mean-field mode)
    JitterSpec jitter;
};

// Derived per-roundtrip physical parameters.
struct MachineParams {
    double r_loss = 0.0;   // per-facet field amplitude into the loss port
    double r_out = 0.0;    // outcoupler field amplitude
    double eps_tau = 0.0;  // dimensionless nonlinear strength (<= 0.1)
    double beta_th = 0.0;  // threshold pump displacement
    double beta = 0.0;     // pump q-displacement
    double j0 = 0.0;       // feedback gain applied to the homodyne record
    double n_sat_eff = 0.0; // effective n_sat after the eps_tau cap
    double t_decay = 0.0;
};

// Closed-form inversion of the operating-point parametrization.
// coupling_abs_sum is the ordered-pair sum  sum_{i != j} |J_ij|.
MachineParams derive_params(const UserParams& u, double coupling_abs_sum);

// Applies the per-trajectory jitter draws (channels jitter_alpha/jitter_pump
// at roundtrip counter 0) and returns the perturbed user parameters.
UserParams apply_jitter(const UserParams& u, const NoiseSource& noise);

// Noise channels multiplexed into the low bits of the pulse counter.
namespace channel {
inline constexpr std::uint64_t homodyne = 0;
inline constexpr std::uint64_t feedback = 1;
inline constexpr std::uint64_t jitter_alpha = 2;
inline constexpr std::uint64_t jitter_pump = 3;
inline constexpr std::uint64_t init_sign = 4;
inline constexpr std::uint64_t width = 8;
} // namespace channel

inline std::uint64_t noise_counter(std::uint64_t pulse, std::uint64_t ch) {
    return pulse * channel::width + ch;
}

// State of the N circulating pulses. Gaussian and coherent-state modes track
// per-pulse Gaussian states (pulses never entangle: the dynamics are LOCC);
// the mean-field mode tracks rescaled real amplitudes.
struct MachineState {
    OperatingMode mode = OperatingMode::gaussian;
    std::vector<GaussianMode> pulses;
    std::vector<double> amplitudes;
    std::uint64_t roundtrip = 0; // completed roundtrips

    int n() const {
        return static_cast<int>(mode == OperatingMode::mean_field ? amplitudes.size()
                                                                  : pulses.size());
    }
};

// Fresh machine state: vacuum pulses, or +/- 1e-3 mean-field seeds drawn from
// the init_sign channel.
MachineState initial_state(OperatingMode mode, int n, const NoiseSource& noise);

inline constexpr double kMeanFieldSeed = 1e-3;
inline constexpr double kOverflowLimit = 1e100;

struct RoundtripResult {
    bool overflow = false; // coherent-state means grew beyond kOverflowLimit
};

// One roundtrip of the five-step pipeline, in order: input facet loss,
// crystal propagation (skipped when eps_tau = 0), output facet loss,
// outcoupling + homodyne, measurement feedback. Homodyne records for the
// roundtrip are written to `record`; feedback uses the same-roundtrip record.
RoundtripResult roundtrip(MachineState& state, const MachineParams& params,
                          const IsingProblem& problem, const NoiseSource& noise,
                          std::span<double> record);

// Mean-field limit of the same pipeline on rescaled amplitudes, with optional
// classical noise of root-variance sigma_fb injected into the feedback.
RoundtripResult mean_field_roundtrip(MachineState& state, const MachineParams& params,
                                     const IsingProblem& problem, const NoiseSource& noise,
                                     double sigma_fb, std::span<double> record);

// Dispatches on state.mode.
RoundtripResult step_roundtrip(MachineState& state, const MachineParams& params,
                               const IsingProblem& problem, const NoiseSource& noise,
                               double sigma_fb, std::span<double> record);

struct ThresholdInfo {
    double lambda_max = 0.0; // spectral radius of the linearized q-mean map
    bool above = false;
};

// Largest-|eigenvalue| of the linearized one-roundtrip mean map
//   M = (1-R_loss)^(1/2) e^(beta eps_tau / sqrt(2)) ((1-R_out)^(1/2) I + j0 r_out J).
ThresholdInfo linear_threshold(const MachineParams& params, const IsingProblem& problem);

} // namespace cim
