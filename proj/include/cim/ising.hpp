#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cim/errors.hpp"

namespace cim {

// Spin configurations are vectors of +/-1. The canonical representative of a
// global-flip pair fixes the first spin to +1.
using SpinConfig = std::vector<int>;

struct Coupling {
    int i = 0;
    int j = 0;
    double value = 0.0;
};

// Symmetric coupling matrix with zero diagonal, held both as an (i<j) pair
// list and as a dense row-major matrix for the per-roundtrip matvec.
class IsingProblem {
public:
    IsingProblem() = default;
    IsingProblem(int n, std::vector<Coupling> couplings);

    int n() const { return n_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }
    const std::vector<double>& dense() const { return dense_; }
    double coupling(int i, int j) const { return dense_[static_cast<std::size_t>(i) * n_ + j]; }

    // Sum over ordered pairs: sum_{i != j} |J_ij| = 2 sum_{i<j} |J_ij|.
    double coupling_abs_sum() const;

    // y = J x
    void matvec(const double* x, double* y) const;

private:
    int n_ = 0;
    std::vector<Coupling> couplings_;
    std::vector<double> dense_;
};

// Ising energy -sum_{i != j} J_ij s_i s_j = -2 sum_{i<j} J_ij s_i s_j.
double energy(const IsingProblem& p, const SpinConfig& s);

// Sherrington-Kirkpatrick range-1 instance: every unordered pair gets
// J_ij = +/-1 with probability 1/2 each, deterministically from the seed.
IsingProblem generate_sk1(int n, std::uint64_t seed);

struct Level {
    double energy = 0.0;
    std::vector<SpinConfig> configs; // canonical representatives, sorted
};

struct LevelSet {
    std::vector<Level> levels; // strictly increasing energies
    std::size_t config_count() const;
};

// Exact enumeration of the lowest `levels` energy levels over the 2^(n-1)
// canonical configurations. Rejects n > 24.
LevelSet enumerate_brute_force(const IsingProblem& p, int levels);

struct PtOptions {
    int replicas = 32;
    std::uint64_t sweeps = 100000;
    double t_min = 0.3;
    double t_max = 3.0;
    std::uint64_t seed = 0;
};

// Replica-exchange Metropolis search. Returns the lowest `levels` energy
// levels observed with every distinct configuration found there; each
// reported configuration is re-verified against energy(). Heuristic:
// completeness is not guaranteed.
LevelSet enumerate_parallel_tempering(const IsingProblem& p, int levels,
                                      const PtOptions& opts = {});

std::string config_to_string(const SpinConfig& s);
SpinConfig config_from_string(const std::string& text);
SpinConfig canonical_config(SpinConfig s);

} // namespace cim
