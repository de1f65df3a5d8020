#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qdep/errors.hpp"
#include "qdep/parallel.hpp"
#include "qdep/ranks.hpp"
#include "qdep/rng.hpp"
#include "qdep/stats.hpp"

namespace qdep {

// Default master seed of bare CLI invocations.
inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

// How null replicates are drawn. Under independence with continuous margins
// every statistic is a function of the rank permutation alone, so permutation
// pairs give the exact null law without ties; the uniform-sample path exists
// as a cross-check of that distribution-freeness.
enum class NullSampler { PermutationPairs, UniformSamples };

inline std::string to_string(NullSampler s) {
    return s == NullSampler::PermutationPairs ? "permutation" : "uniform";
}

// Monte-Carlo null distribution of all statistics for one (n, config).
// Replicate rows are kept in draw order for persistence; the sorted pools
// answer p-value queries.
struct NullPool {
    int n = 0;
    int mc = 0;
    std::uint64_t seed = 0;
    StatConfig cfg;
    NullSampler sampler = NullSampler::PermutationPairs;

    std::vector<TestStatistics> replicates;
    std::vector<double> l2_sorted;
    std::vector<double> l6_sorted;
    std::vector<double> d0_sorted;
    std::vector<double> d4_sorted;
    std::vector<double> hhg_sorted;
    // Within-pool min-p values M_j = min(p of replicate j's HHG, p of its
    // selected L), each computed against the full pool, sorted ascending.
    std::vector<double> minp_sorted;
};

// Fraction of null values strictly above the observation; high statistics
// map to small p-values. Pool must be sorted ascending.
inline double p_value(double observed, const std::vector<double>& sorted_pool) {
    if (sorted_pool.empty()) throw EmptyPool("empty null pool");
    const auto above =
        sorted_pool.end() - std::upper_bound(sorted_pool.begin(), sorted_pool.end(), observed);
    return static_cast<double>(above) / static_cast<double>(sorted_pool.size());
}

namespace detail {

inline const std::vector<double>& selected_l_pool(const NullPool& pool) {
    if (pool.cfg.r == 2) return pool.l2_sorted;
    if (pool.cfg.r == 6) return pool.l6_sorted;
    throw InvalidParameter("min-p combination supports r = 2 or r = 6");
}

// Sorts per-statistic pools and derives the within-pool min-p distribution.
inline void finalize_pool(NullPool& pool) {
    const std::size_t mc = pool.replicates.size();
    pool.l2_sorted.resize(mc);
    pool.l6_sorted.resize(mc);
    pool.d0_sorted.resize(mc);
    pool.d4_sorted.resize(mc);
    pool.hhg_sorted.resize(mc);
    for (std::size_t m = 0; m < mc; ++m) {
        pool.l2_sorted[m] = pool.replicates[m].l_r2;
        pool.l6_sorted[m] = pool.replicates[m].l_r6;
        pool.d0_sorted[m] = pool.replicates[m].d_s0;
        pool.d4_sorted[m] = pool.replicates[m].d_s4;
        pool.hhg_sorted[m] = pool.replicates[m].hhg;
    }
    std::sort(pool.l2_sorted.begin(), pool.l2_sorted.end());
    std::sort(pool.l6_sorted.begin(), pool.l6_sorted.end());
    std::sort(pool.d0_sorted.begin(), pool.d0_sorted.end());
    std::sort(pool.d4_sorted.begin(), pool.d4_sorted.end());
    std::sort(pool.hhg_sorted.begin(), pool.hhg_sorted.end());

    const std::vector<double>& lsel = selected_l_pool(pool);
    pool.minp_sorted.resize(mc);
    for (std::size_t m = 0; m < mc; ++m) {
        const double pl = p_value(selected_l(pool.replicates[m], pool.cfg), lsel);
        const double ph = p_value(pool.replicates[m].hhg, pool.hhg_sorted);
        pool.minp_sorted[m] = pl < ph ? pl : ph;
    }
    std::sort(pool.minp_sorted.begin(), pool.minp_sorted.end());
}

}  // namespace detail

// Builds the null pool with one derived RNG stream per replicate, so the
// result is identical for every worker count and schedule.
inline NullPool build_null_pool(int n, int mc, std::uint64_t seed,
                                const StatConfig& cfg,
                                NullSampler sampler = NullSampler::PermutationPairs,
                                int workers = 1) {
    if (mc < 100) throw InvalidPoolSize("null pool needs mc >= 100");
    validate_stat_config(cfg);

    NullPool pool;
    pool.n = n;
    pool.mc = mc;
    pool.seed = seed;
    pool.cfg = cfg;
    pool.sampler = sampler;
    pool.replicates.resize(static_cast<std::size_t>(mc));

    parallel_for(static_cast<std::size_t>(mc), workers, [&](std::size_t m) {
        Rng rng = Rng::stream(seed, stream_tag::kNullReplicate, m);
        RankedSample ranked;
        if (sampler == NullSampler::PermutationPairs) {
            std::vector<int> ident(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) ident[static_cast<std::size_t>(i)] = i + 1;
            ranked = ranked_from_permutations(std::move(ident), rng.permutation(n));
        } else {
            Sample s;
            s.x.resize(static_cast<std::size_t>(n));
            s.y.resize(static_cast<std::size_t>(n));
            for (auto& v : s.x) v = rng.uniform();
            for (auto& v : s.y) v = rng.uniform();
            ranked = compute_ranks(s, TiePolicy::Error);
        }
        pool.replicates[m] = compute_statistics(ranked, cfg);
    });

    detail::finalize_pool(pool);
    return pool;
}

// Calibrated min-p combination of the selected L statistic and HHG.
struct MinPResult {
    double p_l = 1.0;    // p-value of the L ingredient
    double p_hhg = 1.0;  // p-value of the HHG ingredient
    double m = 1.0;      // min of the two
    double p_of_m = 1.0; // calibrated p-value of m against the within-pool law
};

inline MinPResult calibrate_min_p(double observed_l, double observed_hhg,
                                  const NullPool& pool) {
    if (pool.replicates.empty()) throw EmptyPool("empty null pool");
    MinPResult out;
    out.p_l = p_value(observed_l, detail::selected_l_pool(pool));
    out.p_hhg = p_value(observed_hhg, pool.hhg_sorted);
    out.m = min_p(out.p_l, out.p_hhg);
    const auto at_most =
        std::upper_bound(pool.minp_sorted.begin(), pool.minp_sorted.end(), out.m) -
        pool.minp_sorted.begin();
    out.p_of_m = static_cast<double>(at_most) / static_cast<double>(pool.mc);
    return out;
}

// =========================================================================
// Pool persistence: a text cache keyed by (n, mc, seed, sampler, config).
// One metadata line, one header line, one row per replicate at full
// precision, so a reloaded pool reproduces every p-value bit for bit.
// =========================================================================

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string pool_key_line(int n, int mc, std::uint64_t seed,
                                 const StatConfig& cfg, NullSampler sampler) {
    std::ostringstream os;
    os << "n=" << n << " mc=" << mc << " seed=" << seed
       << " sampler=" << to_string(sampler) << " r=" << cfg.r
       << " epsilon=" << format_g17(cfg.epsilon) << " kappa=" << format_g17(cfg.kappa)
       << " s=" << cfg.s << " generator=" << kGeneratorId;
    return os.str();
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace detail

inline std::string pool_cache_filename(int n, int mc, std::uint64_t seed,
                                       const StatConfig& cfg, NullSampler sampler) {
    const std::string key = detail::pool_key_line(n, mc, seed, cfg, sampler);
    char digest[20];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(key)));
    std::ostringstream os;
    os << "qdep_pool_n" << n << "_mc" << mc << "_" << digest << ".csv";
    return os.str();
}

inline void save_null_pool(const std::string& path, const NullPool& pool) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write pool cache: " + path);
    out << "# qdep-nullpool v1\n";
    out << "# " << detail::pool_key_line(pool.n, pool.mc, pool.seed, pool.cfg, pool.sampler)
        << "\n";
    out << "l_r2,l_r6,d_s0,d_s4,hhg\n";
    for (const TestStatistics& t : pool.replicates) {
        out << detail::format_g17(t.l_r2) << ',' << detail::format_g17(t.l_r6) << ','
            << detail::format_g17(t.d_s0) << ',' << detail::format_g17(t.d_s4) << ','
            << detail::format_g17(t.hhg) << '\n';
    }
}

// Loads a cached pool and verifies it matches the expected key exactly.
inline NullPool load_null_pool(const std::string& path, int n, int mc,
                               std::uint64_t seed, const StatConfig& cfg,
                               NullSampler sampler) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot read pool cache: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "# qdep-nullpool v1")
        throw MismatchedPool("unrecognized pool cache format: " + path);
    if (!std::getline(in, line) ||
        line != "# " + detail::pool_key_line(n, mc, seed, cfg, sampler))
        throw MismatchedPool("pool cache key does not match the request: " + path);
    if (!std::getline(in, line) || line != "l_r2,l_r6,d_s0,d_s4,hhg")
        throw MismatchedPool("pool cache header does not match: " + path);

    NullPool pool;
    pool.n = n;
    pool.mc = mc;
    pool.seed = seed;
    pool.cfg = cfg;
    pool.sampler = sampler;
    pool.replicates.reserve(static_cast<std::size_t>(mc));
    long line_no = 3;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        TestStatistics t;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &t.l_r2, &t.l_r6, &t.d_s0,
                        &t.d_s4, &t.hhg) != 5)
            throw ParseError("malformed pool cache row", line_no);
        pool.replicates.push_back(t);
    }
    if (static_cast<int>(pool.replicates.size()) != mc)
        throw MismatchedPool("pool cache row count does not match mc: " + path);
    detail::finalize_pool(pool);
    return pool;
}

// Fetches the pool from the cache directory (building and saving on a miss).
// An empty directory disables caching.
inline NullPool obtain_null_pool(int n, int mc, std::uint64_t seed,
                                 const StatConfig& cfg, NullSampler sampler,
                                 int workers, const std::string& cache_dir,
                                 bool* from_cache = nullptr) {
    if (from_cache) *from_cache = false;
    if (cache_dir.empty())
        return build_null_pool(n, mc, seed, cfg, sampler, workers);

    namespace fs = std::filesystem;
    const fs::path path =
        fs::path(cache_dir) / pool_cache_filename(n, mc, seed, cfg, sampler);
    if (fs::exists(path)) {
        if (from_cache) *from_cache = true;
        return load_null_pool(path.string(), n, mc, seed, cfg, sampler);
    }
    NullPool pool = build_null_pool(n, mc, seed, cfg, sampler, workers);
    fs::create_directories(cache_dir);
    save_null_pool(path.string(), pool);
    return pool;
}

// =========================================================================
// One full independence test of a sample.
// =========================================================================

struct RunOptions {
    StatConfig cfg;
    int mc = 10000;
    std::uint64_t seed = kDefaultSeed;
    TiePolicy tie_policy = TiePolicy::Error;
    NullSampler sampler = NullSampler::PermutationPairs;
    int workers = 1;
    std::string pool_cache_dir;  // empty disables the cache
};

struct TestReport {
    int n = 0;
    RunOptions opts;
    TestStatistics stats;
    double p_l2 = 1.0;
    double p_l6 = 1.0;
    double p_d0 = 1.0;
    double p_d4 = 1.0;
    double p_hhg = 1.0;
    MinPResult minp;
    bool pool_from_cache = false;
};

inline TestReport run_test(const Sample& sample, const RunOptions& opts) {
    if (sample.size() < 3) throw SampleTooSmall("independence test needs n >= 3");
    validate_stat_config(opts.cfg);

    TestReport rep;
    rep.n = static_cast<int>(sample.size());
    rep.opts = opts;

    const RankedSample ranked = compute_ranks(sample, opts.tie_policy, opts.seed);
    rep.stats = compute_statistics(ranked, opts.cfg);

    const NullPool pool =
        obtain_null_pool(rep.n, opts.mc, opts.seed, opts.cfg, opts.sampler,
                         opts.workers, opts.pool_cache_dir, &rep.pool_from_cache);
    rep.p_l2 = p_value(rep.stats.l_r2, pool.l2_sorted);
    rep.p_l6 = p_value(rep.stats.l_r6, pool.l6_sorted);
    rep.p_d0 = p_value(rep.stats.d_s0, pool.d0_sorted);
    rep.p_d4 = p_value(rep.stats.d_s4, pool.d4_sorted);
    rep.p_hhg = p_value(rep.stats.hhg, pool.hhg_sorted);
    rep.minp = calibrate_min_p(selected_l(rep.stats, opts.cfg), rep.stats.hhg, pool);
    return rep;
}

}  // namespace qdep
