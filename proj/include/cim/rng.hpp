#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace cim {

// Counter-based randomness. Every draw is a pure function of
// (stream key, counter), so ensembles can be distributed across threads in
// any order while producing bit-identical results.

inline std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Philox2x64-10 block cipher (Salmon et al. counting constants).
inline std::pair<std::uint64_t, std::uint64_t>
philox2x64(std::uint64_t key, std::uint64_t c0, std::uint64_t c1) {
    constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ULL;
    constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;
    for (int round = 0; round < 10; ++round) {
        const unsigned __int128 prod = static_cast<unsigned __int128>(kMul) * c0;
        const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
        const std::uint64_t lo = static_cast<std::uint64_t>(prod);
        c0 = hi ^ key ^ c1;
        c1 = lo;
        key += kWeyl;
    }
    return {c0, c1};
}

// Derives an independent stream key from a master seed and a stream id
// (trajectory index, module tag, ...).
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) + stream);
}

// Uniform in the open interval (0, 1); never returns 0 or 1.
inline double u01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline std::uint64_t philox_u64(std::uint64_t key, std::uint64_t c0, std::uint64_t c1) {
    return philox2x64(key, c0, c1).first;
}

inline double philox_uniform(std::uint64_t key, std::uint64_t c0, std::uint64_t c1) {
    return u01(philox2x64(key, c0, c1).first);
}

// Standard normal via Box-Muller; one draw consumes one Philox block.
inline double philox_normal(std::uint64_t key, std::uint64_t c0, std::uint64_t c1) {
    const auto [a, b] = philox2x64(key, c0, c1);
    const double u1 = u01(a);
    const double u2 = u01(b);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Draw provider handed to the per-roundtrip pipeline. Counters identify the
// consumer (roundtrip, pulse, channel), never an internal position, so the
// same draw is always retrievable regardless of evaluation order.
struct NoiseSource {
    virtual ~NoiseSource() = default;
    virtual double normal(std::uint64_t c0, std::uint64_t c1) const = 0;
};

struct PhiloxNoise final : NoiseSource {
    std::uint64_t key = 0;
    explicit PhiloxNoise(std::uint64_t k) : key(k) {}
    double normal(std::uint64_t c0, std::uint64_t c1) const override {
        return philox_normal(key, c0, c1);
    }
};

// Negates every draw of an inner source; used by sign-covariance tests.
struct NegatedNoise final : NoiseSource {
    const NoiseSource* inner = nullptr;
    explicit NegatedNoise(const NoiseSource& n) : inner(&n) {}
    double normal(std::uint64_t c0, std::uint64_t c1) const override {
        return -inner->normal(c0, c1);
    }
};

struct ZeroNoise final : NoiseSource {
    double normal(std::uint64_t, std::uint64_t) const override { return 0.0; }
};

} // namespace cim
