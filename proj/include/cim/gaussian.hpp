#pragma once

#include <array>
#include <cmath>

#include "cim/errors.hpp"

namespace cim {

// Single- and two-mode Gaussian states in dimensionless quadrature units.
// Quadrature ordering is (q, p) per mode; the vacuum covariance is
// diag(1/2, 1/2), so the Heisenberg bound reads det(cov) >= 1/4.

struct Vec2 {
    double q = 0.0;
    double p = 0.0;
};

// Symmetric 2x2 covariance block, stored as its three independent entries.
struct Mat2 {
    double qq = 0.5;
    double qp = 0.0;
    double pp = 0.5;
};

inline double det(const Mat2& m) { return m.qq * m.pp - m.qp * m.qp; }

struct GaussianMode {
    Vec2 mean;
    Mat2 cov;
};

inline GaussianMode vacuum_mode() { return {}; }

inline GaussianMode coherent_mode(double q, double p = 0.0) {
    return {{q, p}, {}};
}

// Cross-covariance block V with V[k][l] = cov(a_k, b_l); not symmetric.
struct CrossBlock {
    double qq = 0.0;
    double qp = 0.0;
    double pq = 0.0;
    double pp = 0.0;
};

struct JointGaussianState {
    Vec2 mean_a, mean_b;
    Mat2 cov_a, cov_b;
    CrossBlock cross;
};

enum class ModeSel { A, B };

struct HomodyneOutcome {
    double value = 0.0;
    GaussianMode conditioned;
};

inline JointGaussianState tensor(const GaussianMode& a, const GaussianMode& b) {
    JointGaussianState j;
    j.mean_a = a.mean;
    j.mean_b = b.mean;
    j.cov_a = a.cov;
    j.cov_b = b.cov;
    return j; // cross block zero: the factors are uncorrelated
}

inline GaussianMode partial_trace(const JointGaussianState& j, ModeSel keep) {
    if (keep == ModeSel::A) return {j.mean_a, j.cov_a};
    return {j.mean_b, j.cov_b};
}

// Two-mode beamsplitter with field-exchange amplitude r:
//   a' = t a - r b,  b' = r a + t b,  t = sqrt(1 - r^2).
// Acts identically on both quadratures, so it preserves the trace of the
// joint covariance and the Euclidean norm of the joint mean.
inline JointGaussianState apply_beamsplitter(const JointGaussianState& j, double r) {
    if (!(r >= 0.0 && r <= 1.0))
        throw domain_error("beamsplitter exchange amplitude must lie in [0, 1]");
    const double t = std::sqrt(1.0 - r * r);
    const double tt = t * t, rr = r * r, tr = t * r;

    JointGaussianState o;
    o.mean_a = {t * j.mean_a.q - r * j.mean_b.q, t * j.mean_a.p - r * j.mean_b.p};
    o.mean_b = {r * j.mean_a.q + t * j.mean_b.q, r * j.mean_a.p + t * j.mean_b.p};

    const Mat2& A = j.cov_a;
    const Mat2& B = j.cov_b;
    const CrossBlock& V = j.cross;
    const double s_qq = 2.0 * V.qq;       // (V + V^T) entries
    const double s_qp = V.qp + V.pq;
    const double s_pp = 2.0 * V.pp;

    o.cov_a = {tt * A.qq + rr * B.qq - tr * s_qq,
               tt * A.qp + rr * B.qp - tr * s_qp,
               tt * A.pp + rr * B.pp - tr * s_pp};
    o.cov_b = {rr * A.qq + tt * B.qq + tr * s_qq,
               rr * A.qp + tt * B.qp + tr * s_qp,
               rr * A.pp + tt * B.pp + tr * s_pp};
    // V' = tr A + t^2 V - r^2 V^T - tr B
    o.cross = {tr * (A.qq - B.qq) + tt * V.qq - rr * V.qq,
               tr * (A.qp - B.qp) + tt * V.qp - rr * V.pq,
               tr * (A.qp - B.qp) + tt * V.pq - rr * V.qp,
               tr * (A.pp - B.pp) + tt * V.pp - rr * V.pp};
    return o;
}

inline GaussianMode displace(const GaussianMode& a, const Vec2& alpha) {
    return {{a.mean.q + alpha.q, a.mean.p + alpha.p}, a.cov};
}

// q-quadrature homodyne of one mode of a two-mode state. The measured value
// is mu_q + sqrt(Sigma_qq) * noise; the retained mode is conditioned with the
// rank-one backaction update, which never increases its q variance.
inline HomodyneOutcome homodyne_q(const JointGaussianState& j, ModeSel measured,
                                  double noise) {
    const bool meas_b = (measured == ModeSel::B);
    const double mu_q = meas_b ? j.mean_b.q : j.mean_a.q;
    const double var_q = meas_b ? j.cov_b.qq : j.cov_a.qq;
    if (!(var_q >= 1e-12))
        throw divergence_error("homodyne on numerically degenerate quadrature");

    // v_q = covariance of the retained quadratures with the measured q.
    double vq_q, vq_p;
    if (meas_b) {
        vq_q = j.cross.qq;
        vq_p = j.cross.pq;
    } else {
        vq_q = j.cross.qq;
        vq_p = j.cross.qp;
    }

    const double w = mu_q + std::sqrt(var_q) * noise;
    const double scale = (w - mu_q) / var_q;

    const Vec2 mu = meas_b ? j.mean_a : j.mean_b;
    const Mat2 cov = meas_b ? j.cov_a : j.cov_b;

    HomodyneOutcome out;
    out.value = w;
    out.conditioned.mean = {mu.q + scale * vq_q, mu.p + scale * vq_p};
    out.conditioned.cov = {cov.qq - vq_q * vq_q / var_q,
                           cov.qp - vq_q * vq_p / var_q,
                           cov.pp - vq_p * vq_p / var_q};
    return out;
}

inline bool all_finite(const GaussianMode& m) {
    return std::isfinite(m.mean.q) && std::isfinite(m.mean.p) &&
           std::isfinite(m.cov.qq) && std::isfinite(m.cov.qp) && std::isfinite(m.cov.pp);
}

inline bool all_finite(const JointGaussianState& j) {
    return all_finite(GaussianMode{j.mean_a, j.cov_a}) &&
           all_finite(GaussianMode{j.mean_b, j.cov_b}) &&
           std::isfinite(j.cross.qq) && std::isfinite(j.cross.qp) &&
           std::isfinite(j.cross.pq) && std::isfinite(j.cross.pp);
}

inline std::array<std::array<double, 4>, 4> joint_cov_matrix(const JointGaussianState& j) {
    return {{{j.cov_a.qq, j.cov_a.qp, j.cross.qq, j.cross.qp},
             {j.cov_a.qp, j.cov_a.pp, j.cross.pq, j.cross.pp},
             {j.cross.qq, j.cross.pq, j.cov_b.qq, j.cov_b.qp},
             {j.cross.qp, j.cross.pp, j.cov_b.qp, j.cov_b.pp}}};
}

inline double joint_cov_det(const JointGaussianState& j) {
    auto m = joint_cov_matrix(j);
    double d = 1.0;
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
        if (m[piv][c] == 0.0) return 0.0;
        if (piv != c) {
            std::swap(m[piv], m[c]);
            d = -d;
        }
        d *= m[c][c];
        for (int r = c + 1; r < 4; ++r) {
            const double f = m[r][c] / m[c][c];
            for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
        }
    }
    return d;
}

// Smaller symplectic eigenvalue of the two-mode covariance; physical states
// satisfy nu_min >= 1/2 (the two-mode Heisenberg bound).
inline double min_symplectic_nu(const JointGaussianState& j) {
    const double det_a = det(j.cov_a);
    const double det_b = det(j.cov_b);
    const double det_v = j.cross.qq * j.cross.pp - j.cross.qp * j.cross.pq;
    const double delta = det_a + det_b + 2.0 * det_v;
    const double d4 = joint_cov_det(j);
    const double disc = std::max(delta * delta - 4.0 * d4, 0.0);
    const double nu2 = 0.5 * (delta - std::sqrt(disc));
    return std::sqrt(std::max(nu2, 0.0));
}

} // namespace cim
