#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qdep/copula_grid.hpp"
#include "qdep/errors.hpp"
#include "qdep/ranks.hpp"

namespace qdep {

// Test configuration; defaults are the recommended operating point.
struct StatConfig {
    int r = 6;              // L_r exponent feeding the min-p combination (2 or 6)
    double epsilon = 0.01;  // corner trim of the integration region
    double kappa = 0.025;   // margin of the supremum region [kappa, 1-kappa]^2
    int s = 4;              // smoothing radius of the smoothed supremum statistic
};

inline void validate_stat_config(const StatConfig& cfg) {
    if (cfg.r < 1) throw InvalidParameter("L_r exponent must be >= 1");
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon < 0.5))
        throw InvalidParameter("epsilon must lie in [0, 0.5)");
    if (!(cfg.kappa > 0.0 && cfg.kappa < 0.5))
        throw InvalidParameter("kappa must lie in (0, 0.5)");
    if (cfg.s < 0) throw InvalidParameter("smoothing radius must be >= 0");
}

// The five statistic values computed for one sample.
struct TestStatistics {
    double l_r2 = 0.0;
    double l_r6 = 0.0;
    double d_s0 = 0.0;
    double d_s4 = 0.0;
    double hhg = 0.0;
};

namespace detail {

inline double ipow(double x, int r) {
    double acc = 1.0;
    for (int k = 0; k < r; ++k) acc *= x;
    return acc;
}

// Membership in the trimmed region: everything except the interiors of the
// four epsilon corner squares (boundary points count as inside).
inline bool in_trimmed_region(double u, double v, double eps) {
    const double hi = 1.0 - eps;
    const bool corner = (u < eps && v < eps) || (u > hi && v < eps) ||
                        (u < eps && v > hi) || (u > hi && v > hi);
    return !corner;
}

}  // namespace detail

// Integral-norm statistic: sqrt(n)/(n+1)^2 * (sum over grid points inside
// the trimmed region of |Q*(u_i,v_j)|^r)^(1/r). Consumes the unsmoothed grid.
inline double l_statistic(const QGrid& grid, int r, double epsilon) {
    if (grid.s != 0) throw DomainError("l_statistic consumes the unsmoothed grid");
    if (r < 1) throw InvalidParameter("L_r exponent must be >= 1");
    if (!(epsilon >= 0.0 && epsilon < 0.5))
        throw InvalidParameter("epsilon must lie in [0, 0.5)");

    const int n = grid.n;
    double sum = 0.0;
    long count = 0;
    for (int i = 0; i <= n; ++i) {
        const double u = grid_coord(i, n);
        for (int j = 0; j <= n; ++j) {
            const double v = grid_coord(j, n);
            if (!detail::in_trimmed_region(u, v, epsilon)) continue;
            sum += detail::ipow(std::fabs(grid.at(i, j)), r);
            ++count;
        }
    }
    if (count == 0) throw DegenerateRegion("no grid point in the trimmed region");

    const double np1 = static_cast<double>(n) + 1.0;
    return std::sqrt(static_cast<double>(n)) / (np1 * np1) *
           std::pow(sum, 1.0 / static_cast<double>(r));
}

// Supremum-norm statistic: max over grid points of [kappa,1-kappa]^2 of
// sqrt(n)|Q*(u_i,v_j)|, on a grid of any smoothing radius.
inline double d_statistic(const QGrid& grid, double kappa) {
    if (!(kappa > 0.0 && kappa < 0.5))
        throw InvalidParameter("kappa must lie in (0, 0.5)");

    const int n = grid.n;
    const double hi = 1.0 - kappa;
    double maxabs = -1.0;
    for (int i = 0; i <= n; ++i) {
        const double u = grid_coord(i, n);
        if (u < kappa || u > hi) continue;
        for (int j = 0; j <= n; ++j) {
            const double v = grid_coord(j, n);
            if (v < kappa || v > hi) continue;
            const double a = std::fabs(grid.at(i, j));
            if (a > maxabs) maxabs = a;
        }
    }
    if (maxabs < 0.0) throw DegenerateRegion("no grid point in [kappa,1-kappa]^2");
    return std::sqrt(static_cast<double>(n)) * maxabs;
}

// Pairwise-distance association statistic on rank distances. For every
// ordered pair (i,j) the remaining n-2 points are classified into a 2x2
// table by d_x(k) <= d_x(i,j) and d_y(k) <= d_y(i,j); the Pearson term
// (n-2)(A12 A21 - A11 A22)^2 / (A1. A2. A.1 A.2) is accumulated, skipping
// tables with a zero margin. Pair order of the accumulation is fixed, so
// the sum is reproducible bit for bit.
inline double hhg_statistic(const RankedSample& ranked) {
    const int n = ranked.n;
    if (n < 3) throw SampleTooSmall("pairwise-distance statistic needs n >= 3");

    const int m = n - 2;
    std::vector<int> dx(static_cast<std::size_t>(n));
    std::vector<int> dy(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const int ri = ranked.r[static_cast<std::size_t>(i)];
        const int si = ranked.s[static_cast<std::size_t>(i)];
        for (int k = 0; k < n; ++k) {
            dx[static_cast<std::size_t>(k)] = std::abs(ranked.r[static_cast<std::size_t>(k)] - ri);
            dy[static_cast<std::size_t>(k)] = std::abs(ranked.s[static_cast<std::size_t>(k)] - si);
        }
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const int dxij = dx[static_cast<std::size_t>(j)];
            const int dyij = dy[static_cast<std::size_t>(j)];
            int a11 = 0, arow = 0, acol = 0;
            for (int k = 0; k < n; ++k) {
                const int bx = dx[static_cast<std::size_t>(k)] <= dxij;
                const int by = dy[static_cast<std::size_t>(k)] <= dyij;
                arow += bx;
                acol += by;
                a11 += bx & by;
            }
            // k = i and k = j always land in the (<=,<=) cell; drop them.
            a11 -= 2;
            arow -= 2;
            acol -= 2;

            const int a12 = arow - a11;
            const int a21 = acol - a11;
            const int a22 = m - arow - acol + a11;
            const int r2 = m - arow;
            const int c2 = m - acol;
            if (arow == 0 || r2 == 0 || acol == 0 || c2 == 0) continue;

            const double num = static_cast<double>(a12) * a21 - static_cast<double>(a11) * a22;
            const double den = static_cast<double>(arow) * r2 * acol * c2;
            total += static_cast<double>(m) * num * num / den;
        }
    }
    return total;
}

inline double min_p(double p1, double p2) {
    if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
        throw DomainError("p-values must lie in [0,1]");
    return p1 < p2 ? p1 : p2;
}

// All five statistics for one ranked sample under one configuration.
inline TestStatistics compute_statistics(const RankedSample& ranked,
                                         const StatConfig& cfg) {
    validate_stat_config(cfg);
    const QGrid q0 = q_grid(ranked);
    const QGrid qs = smooth_q_grid(q0, cfg.s);
    TestStatistics out;
    out.l_r2 = l_statistic(q0, 2, cfg.epsilon);
    out.l_r6 = l_statistic(q0, 6, cfg.epsilon);
    out.d_s0 = d_statistic(q0, cfg.kappa);
    out.d_s4 = d_statistic(qs, cfg.kappa);
    out.hhg = hhg_statistic(ranked);
    return out;
}

// The L ingredient feeding the min-p combination, selected by cfg.r.
inline double selected_l(const TestStatistics& stats, const StatConfig& cfg) {
    if (cfg.r == 2) return stats.l_r2;
    if (cfg.r == 6) return stats.l_r6;
    throw InvalidParameter("min-p combination supports r = 2 or r = 6");
}

}  // namespace qdep
