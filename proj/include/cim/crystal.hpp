#pragma once

#include <array>
#include <cmath>

#include "cim/errors.hpp"
#include "cim/gaussian.hpp"

namespace cim {

// Nonlinear signal-pump propagation through the chi(2) crystal, expressed as
// ODEs for the Gaussian moments in scaled quadratures x = q/sqrt(2),
// y = p/sqrt(2) (vacuum variance 1/4). Integration runs over the
// dimensionless interaction strength s = eps * tau from 0 to eps*tau_nl.
//
// The reduced 8-variable system assumes the phase-sensitive sector: zero
// y-means and no x-y correlations. Those conditions are invariants of the
// propagation and of every linear operation in the machine, so the reduced
// system is the production path. The full 14-moment system is kept as a test
// oracle and for inputs that violate the sector conditions.

struct CrystalState {
    double mx_s = 0.0;   // <x_i>
    double mx_b = 0.0;   // <x_b>
    double vxx_s = 0.25; // <dx_i^2>
    double vyy_s = 0.25; // <dy_i^2>
    double vxx_b = 0.25; // <dx_b^2>
    double vyy_b = 0.25; // <dy_b^2>
    double cxx = 0.0;    // <dx_b dx_i>
    double cyy = 0.0;    // <dy_b dy_i>
};

struct FullCrystalState {
    double mx_s = 0.0, my_s = 0.0, mx_b = 0.0, my_b = 0.0;
    double vxx_s = 0.25, vyy_s = 0.25, vxy_s = 0.0;
    double vxx_b = 0.25, vyy_b = 0.25, vxy_b = 0.0;
    double cxx = 0.0, cyy = 0.0, cxy = 0.0, cyx = 0.0;
};

enum class PumpModel { depleted, frozen };

inline constexpr int kCrystalSteps = 16; // fixed-step RK4, ample for s <= 0.1

namespace detail {

using Red = std::array<double, 8>;
using Full = std::array<double, 14>;

inline Red pack(const CrystalState& c) {
    return {c.mx_s, c.mx_b, c.vxx_s, c.vyy_s, c.vxx_b, c.vyy_b, c.cxx, c.cyy};
}

inline CrystalState unpack_red(const Red& y) {
    return {y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7]};
}

inline Full pack(const FullCrystalState& c) {
    return {c.mx_s, c.my_s, c.mx_b, c.my_b, c.vxx_s, c.vyy_s, c.vxy_s,
            c.vxx_b, c.vyy_b, c.vxy_b, c.cxx, c.cyy, c.cxy, c.cyx};
}

inline FullCrystalState unpack_full(const Full& y) {
    return {y[0], y[1], y[2], y[3], y[4], y[5], y[6],
            y[7], y[8], y[9], y[10], y[11], y[12], y[13]};
}

inline void rhs_reduced(const Red& y, Red& d, PumpModel pump) {
    const double mx_s = y[0], mx_b = y[1];
    const double vxx_s = y[2], vyy_s = y[3];
    const double vxx_b = y[4], vyy_b = y[5];
    const double cxx = y[6], cyy = y[7];
    if (pump == PumpModel::depleted) {
        d[0] = mx_b * mx_s + (cxx + cyy);
        d[1] = -0.5 * mx_s * mx_s - 0.5 * (vxx_s - vyy_s);
        d[2] = 2.0 * mx_b * vxx_s + 2.0 * mx_s * cxx;
        d[3] = -2.0 * mx_b * vyy_s + 2.0 * mx_s * cyy;
        d[4] = -2.0 * mx_s * cxx;
        d[5] = -2.0 * mx_s * cyy;
        d[6] = mx_s * (vxx_b - vxx_s) + mx_b * cxx;
        d[7] = mx_s * (vyy_b - vyy_s) - mx_b * cyy;
    } else {
        // Classical undepleted pump: the pump moments are frozen and no
        // signal-pump correlations build up.
        d[0] = mx_b * mx_s;
        d[1] = 0.0;
        d[2] = 2.0 * mx_b * vxx_s;
        d[3] = -2.0 * mx_b * vyy_s;
        d[4] = d[5] = d[6] = d[7] = 0.0;
    }
}

inline void rhs_full(const Full& y, Full& d) {
    const double m1 = y[0], m2 = y[1], m3 = y[2], m4 = y[3];
    const double sxx = y[4], syy = y[5], sxy = y[6];
    const double bxx = y[7], byy = y[8], bxy = y[9];
    const double cxx = y[10], cyy = y[11], cxy = y[12], cyx = y[13];

    d[0] = m3 * m1 + m4 * m2 + (cxx + cyy);
    d[1] = m4 * m1 - m3 * m2 + (cyx - cxy);
    d[2] = -0.5 * (m1 * m1 - m2 * m2) - 0.5 * (sxx - syy);
    d[3] = -m1 * m2 - sxy;

    d[4] = 2.0 * m3 * sxx + 2.0 * m1 * cxx + 2.0 * m2 * cyx + 2.0 * m4 * sxy;
    d[5] = -2.0 * m3 * syy + 2.0 * m1 * cyy - 2.0 * m2 * cxy + 2.0 * m4 * sxy;
    d[6] = m1 * (cxy + cyx) - m2 * (cxx - cyy) + m4 * (sxx + syy);

    // the +y^2/2 part of the pump equation flips the sign of the second term
    d[7] = -2.0 * m1 * cxx + 2.0 * m2 * cxy;
    d[8] = -2.0 * m1 * cyy - 2.0 * m2 * cyx;
    d[9] = -m1 * (cxy + cyx) - m2 * (cxx - cyy);

    d[10] = m3 * cxx + m1 * (bxx - sxx) + m4 * cxy + m2 * (bxy + sxy);
    d[11] = -m3 * cyy + m1 * (byy - syy) + m4 * cyx - m2 * (sxy + bxy);
    d[12] = -m3 * cxy + m1 * (bxy - sxy) + m4 * cxx - m2 * (bxx - syy);
    d[13] = m3 * cyx + m1 * (bxy - sxy) + m4 * cyy + m2 * (byy - sxx);
}

template <std::size_t K, class Rhs>
std::array<double, K> rk4(std::array<double, K> y, double length, int steps, Rhs rhs) {
    const double h = length / steps;
    std::array<double, K> k1, k2, k3, k4, tmp;
    for (int n = 0; n < steps; ++n) {
        rhs(y, k1);
        for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < K; ++i)
            y[i] += (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
    return y;
}

template <std::size_t K>
bool finite(const std::array<double, K>& y) {
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace detail

inline CrystalState propagate_reduced(const CrystalState& in, double strength, int steps,
                                      PumpModel pump = PumpModel::depleted) {
    if (!(strength >= 0.0)) throw domain_error("crystal strength must be >= 0");
    if (steps < 1) throw domain_error("crystal integration needs steps >= 1");
    if (strength == 0.0) return in;
    auto y = detail::rk4(detail::pack(in), strength, steps,
                         [pump](const detail::Red& s, detail::Red& d) {
                             detail::rhs_reduced(s, d, pump);
                         });
    if (!detail::finite(y))
        throw divergence_error("crystal propagation diverged (reduced moments)");
    return detail::unpack_red(y);
}

inline FullCrystalState propagate_full(const FullCrystalState& in, double strength,
                                       int steps) {
    if (!(strength >= 0.0)) throw domain_error("crystal strength must be >= 0");
    if (steps < 1) throw domain_error("crystal integration needs steps >= 1");
    if (strength == 0.0) return in;
    auto y = detail::rk4(detail::pack(in), strength, steps, detail::rhs_full);
    if (!detail::finite(y))
        throw divergence_error("crystal propagation diverged (full moments)");
    return detail::unpack_full(y);
}

// Manley-Rowe invariant <n_pump> + <n_signal>/2 with
// <n> = <x>^2 + <y>^2 + <dx^2> + <dy^2> - 1/2 in scaled-quadrature units.
inline double manley_rowe(const CrystalState& c) {
    const double n_sig = c.mx_s * c.mx_s + c.vxx_s + c.vyy_s - 0.5;
    const double n_pump = c.mx_b * c.mx_b + c.vxx_b + c.vyy_b - 0.5;
    return n_pump + 0.5 * n_sig;
}

inline double manley_rowe(const FullCrystalState& c) {
    const double n_sig = c.mx_s * c.mx_s + c.my_s * c.my_s + c.vxx_s + c.vyy_s - 0.5;
    const double n_pump = c.mx_b * c.mx_b + c.my_b * c.my_b + c.vxx_b + c.vyy_b - 0.5;
    return n_pump + 0.5 * n_sig;
}

struct PicardResult {
    double mean_q = 0.0;
    double var_q = 0.0;
};

// Closed-form first-order Picard update of the crystal map, valid for
// strength^2 << 1; used by the continuous-time reduction and as a
// cross-check of the integrated EOMs.
inline PicardResult picard_map(double mean_q, double var_q, double var_p, double beta,
                               double strength) {
    const double s = strength;
    const double s2 = s * s;
    const double root2 = std::sqrt(2.0);
    PicardResult r;
    r.mean_q = mean_q + (beta * s / root2) * mean_q - (s2 / 8.0) * mean_q * mean_q * mean_q -
               (s2 / 8.0) * mean_q * (3.0 * var_q + var_p - 2.0);
    r.var_q = var_q + root2 * beta * s * var_q - 0.75 * s2 * mean_q * mean_q * var_q +
              0.25 * s2 * mean_q * mean_q - 0.25 * s2 * var_q * (var_q - var_p);
    return r;
}

// q-unit boundary: propagates a signal mode against a fresh coherent pump
// with q-displacement beta and returns the correlated signal(A)-pump(B)
// state. Requires the phase-sensitive sector (zero p-mean, diagonal
// covariance), which the roundtrip pipeline preserves exactly.
inline JointGaussianState propagate_with_pump(const GaussianMode& signal, double beta,
                                              double strength, int steps = kCrystalSteps) {
    if (std::fabs(signal.mean.p) > 1e-9 || std::fabs(signal.cov.qp) > 1e-9)
        throw domain_error("crystal propagation requires a phase-sensitive-sector input");
    CrystalState c;
    c.mx_s = signal.mean.q / std::sqrt(2.0);
    c.mx_b = beta / std::sqrt(2.0);
    c.vxx_s = 0.5 * signal.cov.qq;
    c.vyy_s = 0.5 * signal.cov.pp;
    c = propagate_reduced(c, strength, steps);

    JointGaussianState j;
    j.mean_a = {std::sqrt(2.0) * c.mx_s, 0.0};
    j.mean_b = {std::sqrt(2.0) * c.mx_b, 0.0};
    j.cov_a = {2.0 * c.vxx_s, 0.0, 2.0 * c.vyy_s};
    j.cov_b = {2.0 * c.vxx_b, 0.0, 2.0 * c.vyy_b};
    j.cross = {2.0 * c.cxx, 0.0, 0.0, 2.0 * c.cyy};
    return j;
}

} // namespace cim
