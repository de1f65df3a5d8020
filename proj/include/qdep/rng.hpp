#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace qdep {

// =========================================================================
// Deterministic random number generation.
//
// Generator identity (part of every report's reproducibility contract):
//   xoshiro256++ streams, each seeded by a splitmix64 chain over
//   (master seed, purpose tag, index a, index b).
//
// The same (master, tag, a, b) always yields the same stream, on any
// worker count and in any scheduling order, so replicated computations
// are bitwise reproducible.
// =========================================================================

inline constexpr const char* kGeneratorId =
    "xoshiro256++/splitmix64-streams";

// splitmix64 single step: advances state, returns next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream key derivation: h = sm(sm(sm(sm(master) ^ tag) ^ a) ^ b).
inline std::uint64_t derive_stream_key(std::uint64_t master, std::uint64_t tag,
                                       std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t st = master;
    std::uint64_t h = splitmix64(st);
    st ^= tag;
    h ^= splitmix64(st);
    st ^= a;
    h ^= splitmix64(st);
    st ^= b;
    h ^= splitmix64(st);
    return h;
}

// Purpose tags keep independent uses of one master seed on disjoint streams.
namespace stream_tag {
inline constexpr std::uint64_t kTieBreakX = 0x7165'0001;
inline constexpr std::uint64_t kTieBreakY = 0x7165'0002;
inline constexpr std::uint64_t kNullReplicate = 0x7165'0003;
inline constexpr std::uint64_t kModelSample = 0x7165'0004;
inline constexpr std::uint64_t kPowerCell = 0x7165'0005;
inline constexpr std::uint64_t kPoolSeed = 0x7165'0006;
}  // namespace stream_tag

class Rng {
public:
    // Stream constructor; see derive_stream_key for the derivation rule.
    static Rng stream(std::uint64_t master, std::uint64_t tag,
                      std::uint64_t a = 0, std::uint64_t b = 0) {
        Rng r;
        std::uint64_t key = derive_stream_key(master, tag, a, b);
        for (auto& w : r.s_) w = splitmix64(key);
        return r;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double strictly inside (0,1): ((u >> 11) + 0.5) * 2^-53.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Unbiased integer in [0, bound).
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Standard normal via Box-Muller (no spare caching, so the draw count
    // per call is fixed and streams stay alignment-independent).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(k2Pi * u2);
    }

    double exponential(double lambda) {
        return -std::log(uniform()) / lambda;
    }

    double chi_squared(int dof) {
        double acc = 0.0;
        for (int k = 0; k < dof; ++k) {
            const double z = normal();
            acc += z * z;
        }
        return acc;
    }

    // Totally skewed positive stable S_alpha(1, beta=1, 0), alpha in (0,1),
    // Chambers-Mallows-Stuck sampler.
    double positive_stable(double alpha) {
        const double theta0 = std::atan(std::tan(kPi * alpha / 2.0)) / alpha;
        const double theta = kPi * (uniform() - 0.5);
        const double w = exponential(1.0);
        const double prefactor =
            std::pow(std::cos(kPi * alpha / 2.0), -1.0 / alpha);
        const double num = std::sin(alpha * (theta + theta0));
        const double den = std::pow(std::cos(theta), 1.0 / alpha);
        const double tail = std::pow(
            std::cos(theta - alpha * (theta + theta0)) / w, (1.0 - alpha) / alpha);
        return prefactor * (num / den) * tail;
    }

    // Fisher-Yates permutation of {1,...,n}.
    std::vector<int> permutation(int n) {
        std::vector<int> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
        for (int i = n - 1; i > 0; --i) {
            const auto j = static_cast<int>(uniform_below(static_cast<std::uint64_t>(i) + 1));
            std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
        }
        return v;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static constexpr double kPi = 3.14159265358979323846;
    static constexpr double k2Pi = 6.28318530717958647692;

    std::array<std::uint64_t, 4> s_{1, 2, 3, 4};
};

}  // namespace qdep
