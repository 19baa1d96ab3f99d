#include "cim/ising.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cim/rng.hpp"

namespace cim {

namespace {

constexpr std::uint64_t kSk1Stream = 0x534b3147454eULL;      // sk1 generator
constexpr std::uint64_t kPtSweepStream = 0x50545357ULL;      // pt metropolis
constexpr std::uint64_t kPtExchangeStream = 0x50545845ULL;   // pt exchange
constexpr std::uint64_t kPtInitStream = 0x5054494eULL;       // pt replica init

std::uint64_t pack_bits(const SpinConfig& s) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] > 0) bits |= (1ULL << i);
    return bits;
}

SpinConfig unpack_bits(std::uint64_t bits, int n) {
    SpinConfig s(n);
    for (int i = 0; i < n; ++i) s[i] = (bits >> i) & 1 ? +1 : -1;
    return s;
}

} // namespace

IsingProblem::IsingProblem(int n, std::vector<Coupling> couplings)
    : n_(n), couplings_(std::move(couplings)) {
    if (n_ < 2) throw domain_error("Ising problem needs at least 2 spins");
    dense_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    std::set<std::pair<int, int>> seen;
    for (const auto& c : couplings_) {
        if (!(0 <= c.i && c.i < c.j && c.j < n_))
            throw domain_error("coupling indices must satisfy 0 <= i < j < n");
        if (!seen.insert({c.i, c.j}).second)
            throw domain_error("duplicate coupling pair");
        if (!std::isfinite(c.value)) throw domain_error("coupling value must be finite");
        dense_[static_cast<std::size_t>(c.i) * n_ + c.j] = c.value;
        dense_[static_cast<std::size_t>(c.j) * n_ + c.i] = c.value;
    }
}

double IsingProblem::coupling_abs_sum() const {
    double s = 0.0;
    for (const auto& c : couplings_) s += std::fabs(c.value);
    return 2.0 * s;
}

void IsingProblem::matvec(const double* x, double* y) const {
    for (int i = 0; i < n_; ++i) {
        const double* row = dense_.data() + static_cast<std::size_t>(i) * n_;
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

double energy(const IsingProblem& p, const SpinConfig& s) {
    if (static_cast<int>(s.size()) != p.n())
        throw domain_error("spin configuration size does not match problem");
    double e = 0.0;
    for (const auto& c : p.couplings()) e += c.value * s[c.i] * s[c.j];
    return -2.0 * e;
}

IsingProblem generate_sk1(int n, std::uint64_t seed) {
    if (n < 2) throw domain_error("SK1 instance needs n >= 2");
    const std::uint64_t key = stream_key(seed, kSk1Stream);
    std::vector<Coupling> couplings;
    couplings.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    std::uint64_t pair_index = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++pair_index)
            couplings.push_back({i, j, (philox_u64(key, pair_index, 0) & 1) ? 1.0 : -1.0});
    return IsingProblem(n, std::move(couplings));
}

std::size_t LevelSet::config_count() const {
    std::size_t c = 0;
    for (const auto& l : levels) c += l.configs.size();
    return c;
}

namespace {

// Collects configurations of the lowest `levels` distinct energies. Keys are
// energies recomputed with the fixed-order pair sum, so identical
// configurations always map to identical keys; nearly equal keys (possible
// for irrational couplings) are merged on finalization.
class LevelCollector {
public:
    LevelCollector(int levels, int n) : levels_(levels), n_(n) {}

    bool worth(double e) const {
        return static_cast<int>(found_.size()) < levels_ || e <= cutoff() + 1e-9;
    }

    void insert(double e, std::uint64_t canonical_bits) {
        auto it = found_.find(e);
        if (it == found_.end()) {
            if (static_cast<int>(found_.size()) >= levels_ && e > cutoff()) return;
            found_[e].insert(canonical_bits);
            while (static_cast<int>(found_.size()) > levels_)
                found_.erase(std::prev(found_.end()));
        } else {
            it->second.insert(canonical_bits);
        }
    }

    LevelSet finalize() const {
        LevelSet out;
        for (const auto& [e, bits] : found_) {
            if (!out.levels.empty() &&
                std::fabs(out.levels.back().energy - e) <= 1e-9 * std::max(1.0, std::fabs(e))) {
                for (std::uint64_t b : bits)
                    out.levels.back().configs.push_back(unpack_bits(b, n_));
                continue;
            }
            Level l;
            l.energy = e;
            for (std::uint64_t b : bits) l.configs.push_back(unpack_bits(b, n_));
            out.levels.push_back(std::move(l));
        }
        for (auto& l : out.levels) std::sort(l.configs.begin(), l.configs.end());
        return out;
    }

private:
    double cutoff() const { return std::prev(found_.end())->first; }
    int levels_;
    int n_;
    std::map<double, std::set<std::uint64_t>> found_;
};

} // namespace

LevelSet enumerate_brute_force(const IsingProblem& p, int levels) {
    const int n = p.n();
    if (levels < 1) throw domain_error("need at least one level");
    if (n > 24) throw budget_error("brute-force enumeration limited to n <= 24");

    SpinConfig s(n, +1);
    std::vector<double> h(n, 0.0); // local fields h_k = sum_j J_kj s_j
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += p.coupling(k, j) * s[j];
        h[k] = acc;
    }
    double e = energy(p, s);

    LevelCollector collector(levels, n);
    auto consider = [&]() {
        if (!collector.worth(e)) return;
        collector.insert(energy(p, s), pack_bits(s)); // exact re-evaluation
    };
    consider();

    // Gray-code walk over the 2^(n-1) canonical configurations (spin 0 = +1).
    const std::uint64_t total = 1ULL << (n - 1);
    for (std::uint64_t code = 1; code < total; ++code) {
        const int k = __builtin_ctzll(code) + 1; // spin to flip
        e += 4.0 * s[k] * h[k];
        const int old = s[k];
        s[k] = -old;
        for (int j = 0; j < n; ++j) h[j] -= 2.0 * p.coupling(j, k) * old;
        consider();
    }
    return collector.finalize();
}

LevelSet enumerate_parallel_tempering(const IsingProblem& p, int levels,
                                      const PtOptions& opts) {
    const int n = p.n();
    if (levels < 1) throw domain_error("need at least one level");
    if (opts.replicas < 2) throw domain_error("parallel tempering needs >= 2 replicas");

    // Geometric temperature ladder, replica 0 coldest.
    std::vector<double> temp(opts.replicas);
    const double ratio = std::pow(opts.t_max / opts.t_min,
                                  1.0 / static_cast<double>(opts.replicas - 1));
    temp[0] = opts.t_min;
    for (int r = 1; r < opts.replicas; ++r) temp[r] = temp[r - 1] * ratio;

    struct Replica {
        SpinConfig s;
        std::vector<double> h;
        double e = 0.0;
    };
    std::vector<Replica> reps(opts.replicas);
    const std::uint64_t init_key = stream_key(opts.seed, kPtInitStream);
    for (int r = 0; r < opts.replicas; ++r) {
        auto& rep = reps[r];
        rep.s.resize(n);
        for (int k = 0; k < n; ++k)
            rep.s[k] = (philox_u64(init_key, static_cast<std::uint64_t>(r), k) & 1) ? +1 : -1;
        rep.h.assign(n, 0.0);
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += p.coupling(k, j) * rep.s[j];
            rep.h[k] = acc;
        }
        rep.e = energy(p, rep.s);
    }

    LevelCollector collector(levels, n);
    auto record = [&](const Replica& rep) {
        if (!collector.worth(rep.e)) return;
        SpinConfig canon = canonical_config(rep.s);
        const double verified = energy(p, canon); // never trust the running sum
        collector.insert(verified, pack_bits(canon));
    };
    for (const auto& rep : reps) record(rep);

    const std::uint64_t sweep_key = stream_key(opts.seed, kPtSweepStream);
    const std::uint64_t exch_key = stream_key(opts.seed, kPtExchangeStream);

    for (std::uint64_t sweep = 0; sweep < opts.sweeps; ++sweep) {
        for (int r = 0; r < opts.replicas; ++r) {
            auto& rep = reps[r];
            const double beta_t = 1.0 / temp[r];
            for (int k = 0; k < n; ++k) {
                const double de = 4.0 * rep.s[k] * rep.h[k];
                bool accept = de <= 0.0;
                if (!accept) {
                    const std::uint64_t c1 =
                        (static_cast<std::uint64_t>(r) << 32) | static_cast<std::uint64_t>(k);
                    accept = philox_uniform(sweep_key, sweep, c1) < std::exp(-de * beta_t);
                }
                if (accept) {
                    const int old = rep.s[k];
                    rep.s[k] = -old;
                    rep.e += de;
                    for (int j = 0; j < n; ++j) rep.h[j] -= 2.0 * p.coupling(j, k) * old;
                }
            }
            record(rep);
        }
        // Alternating-parity neighbour exchanges.
        for (int r = static_cast<int>(sweep & 1); r + 1 < opts.replicas; r += 2) {
            const double arg = (1.0 / temp[r] - 1.0 / temp[r + 1]) * (reps[r].e - reps[r + 1].e);
            if (arg >= 0.0 || philox_uniform(exch_key, sweep, r) < std::exp(arg))
                std::swap(reps[r], reps[r + 1]);
        }
    }
    return collector.finalize();
}

std::string config_to_string(const SpinConfig& s) {
    std::string text;
    text.reserve(s.size());
    for (int v : s) text.push_back(v > 0 ? '+' : '-');
    return text;
}

SpinConfig config_from_string(const std::string& text) {
    SpinConfig s;
    s.reserve(text.size());
    for (char c : text) {
        if (c == '+')
            s.push_back(+1);
        else if (c == '-')
            s.push_back(-1);
        else
            throw config_error("spin configuration strings may contain only '+'/'-'");
    }
    return s;
}

SpinConfig canonical_config(SpinConfig s) {
    if (!s.empty() && s[0] < 0)
        for (int& v : s) v = -v;
    return s;
}

} // namespace cim
