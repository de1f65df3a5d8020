#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "qdep/errors.hpp"
#include "qdep/rng.hpp"

namespace qdep {

// A paired bivariate sample. Both margins must have the same length n >= 2
// and contain only finite values.
struct Sample {
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
};

inline void validate_sample(const Sample& sample) {
    if (sample.x.size() != sample.y.size())
        throw LengthMismatch("x and y have different lengths");
    if (sample.x.size() < 2)
        throw DomainError("sample needs at least 2 observations");
    for (double v : sample.x)
        if (!std::isfinite(v)) throw NonFiniteValue("non-finite value in x");
    for (double v : sample.y)
        if (!std::isfinite(v)) throw NonFiniteValue("non-finite value in y");
}

enum class TiePolicy {
    Error,        // duplicate margin values are rejected
    RandomBreak,  // ties broken by a seeded uniform shuffle among tied values
};

// Ranks and reversed ranks of one sample. r and s are permutations of
// {1,...,n}; r_prime[i] = n+1-r[i], s_prime[i] = n+1-s[i].
struct RankedSample {
    std::vector<int> r;
    std::vector<int> s;
    std::vector<int> r_prime;
    std::vector<int> s_prime;
    int n = 0;
};

namespace detail {

// Ranks of one margin; 1 = smallest. Ties according to policy.
inline std::vector<int> rank_margin(const std::vector<double>& values,
                                    TiePolicy policy, Rng tie_rng) {
    const int n = static_cast<int>(values.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[static_cast<std::size_t>(a)] <
                                                values[static_cast<std::size_t>(b)]; });

    // Walk tied groups; under RandomBreak shuffle each group before ranks
    // are assigned so the result stays a uniformly chosen valid permutation.
    std::size_t g = 0;
    while (g < order.size()) {
        std::size_t h = g + 1;
        while (h < order.size() &&
               values[static_cast<std::size_t>(order[h])] ==
                   values[static_cast<std::size_t>(order[g])]) {
            ++h;
        }
        if (h - g > 1) {
            if (policy == TiePolicy::Error)
                throw TiesPresent("tied values in margin; margins are assumed continuous");
            for (std::size_t i = h - g - 1; i > 0; --i) {
                const auto j = static_cast<std::size_t>(tie_rng.uniform_below(i + 1));
                std::swap(order[g + i], order[g + j]);
            }
        }
        g = h;
    }

    std::vector<int> ranks(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k + 1;
    return ranks;
}

}  // namespace detail

inline RankedSample compute_ranks(const Sample& sample,
                                  TiePolicy policy = TiePolicy::Error,
                                  std::uint64_t seed = 0) {
    validate_sample(sample);
    const int n = static_cast<int>(sample.size());

    RankedSample out;
    out.n = n;
    out.r = detail::rank_margin(sample.x, policy,
                                Rng::stream(seed, stream_tag::kTieBreakX));
    out.s = detail::rank_margin(sample.y, policy,
                                Rng::stream(seed, stream_tag::kTieBreakY));
    out.r_prime.resize(static_cast<std::size_t>(n));
    out.s_prime.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.r_prime[static_cast<std::size_t>(i)] = n + 1 - out.r[static_cast<std::size_t>(i)];
        out.s_prime[static_cast<std::size_t>(i)] = n + 1 - out.s[static_cast<std::size_t>(i)];
    }
    return out;
}

// Ranked sample built directly from rank permutations (null replicates,
// synthetic tests). Vectors must already be permutations of {1,...,n}.
inline RankedSample ranked_from_permutations(std::vector<int> r, std::vector<int> s) {
    if (r.size() != s.size()) throw LengthMismatch("rank vectors differ in length");
    RankedSample out;
    out.n = static_cast<int>(r.size());
    out.r = std::move(r);
    out.s = std::move(s);
    out.r_prime.resize(out.r.size());
    out.s_prime.resize(out.s.size());
    for (std::size_t i = 0; i < out.r.size(); ++i) {
        out.r_prime[i] = out.n + 1 - out.r[i];
        out.s_prime[i] = out.n + 1 - out.s[i];
    }
    return out;
}

// =========================================================================
// Evaluation grid: u_i = (i+0.5)/(n+1), i = 0..n. Grid coordinates stay
// strictly inside (0,1) and never coincide with k/(n+1), so strict and
// non-strict count inequalities agree at every grid point.
// =========================================================================

inline double grid_coord(int i, int n) {
    return (static_cast<double>(i) + 0.5) / (static_cast<double>(n) + 1.0);
}

struct GridPoint {
    int i = 0;
    int j = 0;
    double u = 0.0;
    double v = 0.0;
};

// All (n+1)^2 grid points in row-major order (i outer, j inner).
inline std::vector<GridPoint> grid_points(int n) {
    if (n < 1) throw DomainError("grid_points requires n >= 1");
    std::vector<GridPoint> pts;
    pts.reserve(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            pts.push_back({i, j, grid_coord(i, n), grid_coord(j, n)});
    return pts;
}

}  // namespace qdep
