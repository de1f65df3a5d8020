#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <utility>
#include <vector>

#include "qdep/errors.hpp"
#include "qdep/ranks.hpp"

namespace qdep {

// Variance-normalizing weight w(u,v) = 1/sqrt(u v (1-u)(1-v)), evaluated
// as a product of per-axis factors.
inline double axis_weight(double t) {
    return 1.0 / std::sqrt(t * (1.0 - t));
}

inline double weight(double u, double v) {
    return axis_weight(u) * axis_weight(v);
}

// Which rank pairing a copula table is built from. The primed vectors are
// the reversed ranks r' = n+1-r, s' = n+1-s.
enum class Pairing { RS, RSp, RpSp, RpS };

// Empirical copula counts on the (n+1)x(n+1) grid for one rank pairing:
// count(i,j) = #{k : a_k <= i and b_k <= j}. The copula value is count/n.
struct CopulaGrid {
    int n = 0;
    std::vector<std::int32_t> counts;  // row-major, (n+1)^2

    std::int32_t count(int i, int j) const {
        return counts[static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 1) +
                      static_cast<std::size_t>(j)];
    }

    double value(int i, int j) const {
        return static_cast<double>(count(i, j)) / static_cast<double>(n);
    }
};

// Column recursion over sorted pairs: counts in row i equal row i-1 plus an
// indicator step at the second coordinate paired with first coordinate i.
// Total work is proportional to n^2.
inline CopulaGrid empirical_copula_recursive(const RankedSample& ranked, Pairing pairing) {
    const int n = ranked.n;
    const std::vector<int>* a = nullptr;
    const std::vector<int>* b = nullptr;
    switch (pairing) {
        case Pairing::RS:   a = &ranked.r;       b = &ranked.s;       break;
        case Pairing::RSp:  a = &ranked.r;       b = &ranked.s_prime; break;
        case Pairing::RpSp: a = &ranked.r_prime; b = &ranked.s_prime; break;
        case Pairing::RpS:  a = &ranked.r_prime; b = &ranked.s;       break;
    }

    // Sorting by the first coordinate of a rank permutation is an inverse
    // permutation lookup: step[a_k] = b_k.
    std::vector<int> step(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t k = 0; k < a->size(); ++k)
        step[static_cast<std::size_t>((*a)[k])] = (*b)[k];

    CopulaGrid grid;
    grid.n = n;
    const std::size_t w = static_cast<std::size_t>(n) + 1;
    grid.counts.assign(w * w, 0);
    for (int i = 1; i <= n; ++i) {
        std::int32_t* row = grid.counts.data() + static_cast<std::size_t>(i) * w;
        const std::int32_t* prev = row - w;
        std::memcpy(row, prev, w * sizeof(std::int32_t));
        for (int j = step[static_cast<std::size_t>(i)]; j <= n; ++j) row[j] += 1;
    }
    return grid;
}

// The four quadrant numerators N^(1..4) on the grid, each backed by its own
// copula pass so the finite-sample identities between them stay independent
// cross-checks. Count accessors expose the exact integer form.
struct QuadrantNumerators {
    int n = 0;
    CopulaGrid rs;    // C_n(.,.; R,S)
    CopulaGrid rsp;   // C_n(.,.; R,S')
    CopulaGrid rpsp;  // C_n(.,.; R',S')
    CopulaGrid rps;   // C_n(.,.; R',S)

    // Integer counts entering each numerator at grid point (i,j).
    std::int32_t count1(int i, int j) const { return rs.count(i, j); }
    std::int32_t count2(int i, int j) const { return rsp.count(i, n - j); }
    std::int32_t count3(int i, int j) const { return rpsp.count(n - i, n - j); }
    std::int32_t count4(int i, int j) const { return rps.count(n - i, j); }

    double n1(int i, int j) const {
        return rs.value(i, j) - grid_coord(i, n) * grid_coord(j, n);
    }
    double n2(int i, int j) const {
        return -(rsp.value(i, n - j) - grid_coord(i, n) * grid_coord(n - j, n));
    }
    double n3(int i, int j) const {
        return rpsp.value(n - i, n - j) - grid_coord(n - i, n) * grid_coord(n - j, n);
    }
    double n4(int i, int j) const {
        return -(rps.value(n - i, j) - grid_coord(n - i, n) * grid_coord(j, n));
    }
};

inline QuadrantNumerators quadrant_numerators(const RankedSample& ranked) {
    QuadrantNumerators q;
    q.n = ranked.n;
    q.rs = empirical_copula_recursive(ranked, Pairing::RS);
    q.rsp = empirical_copula_recursive(ranked, Pairing::RSp);
    q.rpsp = empirical_copula_recursive(ranked, Pairing::RpSp);
    q.rps = empirical_copula_recursive(ranked, Pairing::RpS);
    return q;
}

namespace detail {

// u_i <= 1/2 exactly when 2i <= n (u_i = (i+0.5)/(n+1)).
inline bool lower_half(int i, int n) { return 2 * i <= n; }

}  // namespace detail

// Symmetrized numerator N* on the grid: quadrant-specific numerator chosen
// by the half-plane of the grid point.
inline std::vector<double> symmetrized_numerator(const QuadrantNumerators& q) {
    const int n = q.n;
    const std::size_t w = static_cast<std::size_t>(n) + 1;
    std::vector<double> out(w * w);
    for (int i = 0; i <= n; ++i) {
        const bool ulo = detail::lower_half(i, n);
        for (int j = 0; j <= n; ++j) {
            const bool vlo = detail::lower_half(j, n);
            double val;
            if (ulo && vlo)       val = q.n1(i, j);
            else if (ulo)         val = q.n2(i, j);
            else if (!vlo)        val = q.n3(i, j);
            else                  val = q.n4(i, j);
            out[static_cast<std::size_t>(i) * w + static_cast<std::size_t>(j)] = val;
        }
    }
    return out;
}

// The symmetrized weighted estimator on the grid. s is the smoothing radius
// in grid cells; s = 0 is the unsmoothed estimator.
struct QGrid {
    int n = 0;
    int s = 0;
    std::vector<double> values;  // row-major, (n+1)^2

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 1) +
                      static_cast<std::size_t>(j)];
    }
};

namespace detail {

// Per-axis weight table, evaluated from the index closer to 0 so that the
// table is symmetric exactly: wtab[i] == wtab[n-i] bit for bit.
inline std::vector<double> axis_weight_table(int n) {
    std::vector<double> wtab(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const int m = i <= n - i ? i : n - i;
        wtab[static_cast<std::size_t>(i)] = axis_weight(grid_coord(m, n));
    }
    return wtab;
}

// Copula counts restricted to rows and columns 0..mid (mid = floor(n/2)).
// The symmetrized estimator reads each of its four tables only inside this
// quarter, so the remaining three quarters are never built.
inline std::vector<std::int32_t> quarter_copula(const std::vector<int>& a,
                                                const std::vector<int>& b,
                                                int n, int mid) {
    std::vector<int> step(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t k = 0; k < a.size(); ++k)
        step[static_cast<std::size_t>(a[k])] = b[k];

    const std::size_t w = static_cast<std::size_t>(mid) + 1;
    std::vector<std::int32_t> counts(w * w, 0);
    for (int i = 1; i <= mid; ++i) {
        std::int32_t* row = counts.data() + static_cast<std::size_t>(i) * w;
        const std::int32_t* prev = row - w;
        std::memcpy(row, prev, w * sizeof(std::int32_t));
        for (int j = step[static_cast<std::size_t>(i)]; j <= mid; ++j) row[j] += 1;
    }
    return counts;
}

}  // namespace detail

inline QGrid q_grid(const RankedSample& ranked) {
    const int n = ranked.n;
    const int mid = n / 2;  // u_i <= 1/2 exactly for i <= mid
    const std::size_t w = static_cast<std::size_t>(n) + 1;
    const std::size_t qw = static_cast<std::size_t>(mid) + 1;

    const std::vector<std::int32_t> rs =
        detail::quarter_copula(ranked.r, ranked.s, n, mid);
    const std::vector<std::int32_t> rsp =
        detail::quarter_copula(ranked.r, ranked.s_prime, n, mid);
    const std::vector<std::int32_t> rpsp =
        detail::quarter_copula(ranked.r_prime, ranked.s_prime, n, mid);
    const std::vector<std::int32_t> rps =
        detail::quarter_copula(ranked.r_prime, ranked.s, n, mid);

    std::vector<double> coord(w);
    std::vector<double> tab(w);  // count -> count/n, one shared division result
    for (int i = 0; i <= n; ++i) {
        coord[static_cast<std::size_t>(i)] = grid_coord(i, n);
        tab[static_cast<std::size_t>(i)] =
            static_cast<double>(i) / static_cast<double>(n);
    }
    const std::vector<double> wtab = detail::axis_weight_table(n);

    QGrid grid;
    grid.n = n;
    grid.s = 0;
    grid.values.resize(w * w);
    for (int i = 0; i <= n; ++i) {
        const bool ulo = detail::lower_half(i, n);
        const int ir = n - i;
        const std::size_t trow = static_cast<std::size_t>(ulo ? i : ir) * qw;
        const double cu = coord[static_cast<std::size_t>(ulo ? i : ir)];
        const double wu = wtab[static_cast<std::size_t>(i)];
        double* out = grid.values.data() + static_cast<std::size_t>(i) * w;
        if (ulo) {
            const std::int32_t* row_rs = rs.data() + trow;
            const std::int32_t* row_rsp = rsp.data() + trow;
            for (int j = 0; j <= mid; ++j) {
                const double nstar = tab[static_cast<std::size_t>(row_rs[j])] -
                                     cu * coord[static_cast<std::size_t>(j)];
                out[j] = nstar * wu * wtab[static_cast<std::size_t>(j)];
            }
            for (int j = mid + 1; j <= n; ++j) {
                const int jr = n - j;
                const double nstar = -(tab[static_cast<std::size_t>(row_rsp[jr])] -
                                       cu * coord[static_cast<std::size_t>(jr)]);
                out[j] = nstar * wu * wtab[static_cast<std::size_t>(j)];
            }
        } else {
            const std::int32_t* row_rps = rps.data() + trow;
            const std::int32_t* row_rpsp = rpsp.data() + trow;
            for (int j = 0; j <= mid; ++j) {
                const double nstar = -(tab[static_cast<std::size_t>(row_rps[j])] -
                                       cu * coord[static_cast<std::size_t>(j)]);
                out[j] = nstar * wu * wtab[static_cast<std::size_t>(j)];
            }
            for (int j = mid + 1; j <= n; ++j) {
                const int jr = n - j;
                const double nstar = tab[static_cast<std::size_t>(row_rpsp[jr])] -
                                     cu * coord[static_cast<std::size_t>(jr)];
                out[j] = nstar * wu * wtab[static_cast<std::size_t>(j)];
            }
        }
    }
    return grid;
}

// Moving-average smoothing with window half-width s. Each output cell is the
// mean of the (2s+1)^2 window around it; window indices beyond the grid are
// clamped to the border, so out-of-range cells reuse the nearest edge value
// and the divisor stays (2s+1)^2 at every cell. Separable: one pass per axis.
inline QGrid smooth_q_grid(const QGrid& grid, int s) {
    if (grid.s != 0) throw DomainError("smooth_q_grid expects an unsmoothed grid");
    if (s < 0) throw DomainError("smoothing radius must be >= 0");
    const int n = grid.n;
    if (2 * s + 1 > n + 1)
        throw SmoothingRadiusTooLarge("smoothing window exceeds the grid");
    if (s == 0) return grid;

    const std::size_t w = static_cast<std::size_t>(n) + 1;
    const auto clamp = [n](int k) { return k < 0 ? 0 : (k > n ? n : k); };

    // Pass 1: window sums along j within each row. Cells with a full
    // in-range window take the vectorizable shifted-add path; cells near the
    // row ends use the scalar clamped loop. Both accumulate the window in
    // ascending index order.
    std::vector<double> rowsum(w * w);
    for (int i = 0; i <= n; ++i) {
        const double* src = grid.values.data() + static_cast<std::size_t>(i) * w;
        double* dst = rowsum.data() + static_cast<std::size_t>(i) * w;
        for (int j = 0; j < s; ++j) {
            double acc = 0.0;
            for (int l = j - s; l <= j + s; ++l) acc += src[clamp(l)];
            dst[j] = acc;
        }
        for (int j = s; j <= n - s; ++j) dst[j] = src[j - s];
        for (int d = -s + 1; d <= s; ++d)
            for (int j = s; j <= n - s; ++j) dst[j] += src[j + d];
        for (int j = n - s + 1; j <= n; ++j) {
            double acc = 0.0;
            for (int l = j - s; l <= j + s; ++l) acc += src[clamp(l)];
            dst[j] = acc;
        }
    }

    // Pass 2: window sums along i as whole-row adds (the row index is
    // clamped, so no per-element branching), then the single division.
    QGrid out;
    out.n = n;
    out.s = s;
    out.values.resize(w * w);
    const double window = static_cast<double>((2 * s + 1) * (2 * s + 1));
    for (int i = 0; i <= n; ++i) {
        double* dst = out.values.data() + static_cast<std::size_t>(i) * w;
        {
            const double* srcrow =
                rowsum.data() + static_cast<std::size_t>(clamp(i - s)) * w;
            for (int j = 0; j <= n; ++j) dst[j] = srcrow[j];
        }
        for (int d = -s + 1; d <= s; ++d) {
            const double* srcrow =
                rowsum.data() + static_cast<std::size_t>(clamp(i + d)) * w;
            for (int j = 0; j <= n; ++j) dst[j] += srcrow[j];
        }
        for (int j = 0; j <= n; ++j) dst[j] /= window;
    }
    return out;
}

// Pointwise Frechet-Hoeffding envelope of the weighted dependence function:
// any q lies between these bounds.
inline std::pair<double, double> frechet_bounds(double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
        throw DomainError("frechet_bounds requires (u,v) in (0,1)^2");
    const double wgt = weight(u, v);
    const double uv = u * v;
    const double lower = wgt * (std::max(u + v - 1.0, 0.0) - uv);
    const double upper = wgt * (std::min(u, v) - uv);
    return {lower, upper};
}

}  // namespace qdep
