#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qdep/calibration.hpp"
#include "qdep/errors.hpp"
#include "qdep/models.hpp"
#include "qdep/parallel.hpp"
#include "qdep/stats.hpp"

namespace qdep {

struct PowerStudyConfig {
    std::vector<ModelSpec> models;
    int n = 100;
    double alpha = 0.05;
    int reps = 1000;       // MC repetitions per model
    int pool_mc = 2000;    // null pool size shared by all models
    std::uint64_t seed = kDefaultSeed;
    StatConfig stats;
    int workers = 1;
    std::string pool_cache_dir;
};

inline void validate_power_config(const PowerStudyConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw InvalidParameter("alpha must lie in (0,1)");
    if (cfg.reps < 100) throw InvalidParameter("power study needs reps >= 100");
    if (cfg.pool_mc < 500) throw InvalidParameter("power study needs pool_mc >= 500");
    if (cfg.models.empty()) throw InvalidParameter("power study needs at least one model");
    validate_stat_config(cfg.stats);
}

inline constexpr std::array<const char*, 6> kPowerColumns = {
    "l_r2", "l_r6", "d_s0", "d_s4", "hhg", "min_p"};

struct PowerCell {
    double power = 0.0;
    double se = 0.0;  // binomial standard error sqrt(p(1-p)/reps)
};

struct PowerRow {
    ModelSpec model;
    std::array<PowerCell, 6> cells;
};

struct PowerTable {
    PowerStudyConfig cfg;
    std::vector<PowerRow> rows;
};

// Runs the power study: one shared null pool per n (rank statistics are
// distribution-free under independence, so the pool is valid for every
// model), then per (model, rep) a fresh sample on its own derived RNG
// stream. Rejections are aggregated in replicate order, so the table is
// identical for every worker count.
inline PowerTable run_power_study(
    const PowerStudyConfig& cfg,
    const std::function<void(const PowerRow&)>& on_row = nullptr) {
    validate_power_config(cfg);

    const std::uint64_t pool_seed = derive_stream_key(cfg.seed, stream_tag::kPoolSeed);
    const NullPool pool =
        obtain_null_pool(cfg.n, cfg.pool_mc, pool_seed, cfg.stats,
                         NullSampler::PermutationPairs, cfg.workers,
                         cfg.pool_cache_dir);

    PowerTable table;
    table.cfg = cfg;
    table.rows.reserve(cfg.models.size());

    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        const ModelSpec& model = cfg.models[mi];
        std::vector<std::array<bool, 6>> reject(static_cast<std::size_t>(cfg.reps));

        parallel_for(static_cast<std::size_t>(cfg.reps), cfg.workers, [&](std::size_t k) {
            const std::uint64_t cell_seed =
                derive_stream_key(cfg.seed, stream_tag::kPowerCell, mi, k);
            const Sample s = sample(model, cfg.n, cell_seed);
            const RankedSample ranked = compute_ranks(s, TiePolicy::Error);
            const TestStatistics st = compute_statistics(ranked, cfg.stats);
            const MinPResult mp =
                calibrate_min_p(selected_l(st, cfg.stats), st.hhg, pool);
            reject[k] = {
                p_value(st.l_r2, pool.l2_sorted) <= cfg.alpha,
                p_value(st.l_r6, pool.l6_sorted) <= cfg.alpha,
                p_value(st.d_s0, pool.d0_sorted) <= cfg.alpha,
                p_value(st.d_s4, pool.d4_sorted) <= cfg.alpha,
                p_value(st.hhg, pool.hhg_sorted) <= cfg.alpha,
                mp.p_of_m <= cfg.alpha,
            };
        });

        PowerRow row;
        row.model = model;
        std::array<long, 6> counts{};
        for (const auto& flags : reject)
            for (std::size_t c = 0; c < 6; ++c) counts[c] += flags[c] ? 1 : 0;
        for (std::size_t c = 0; c < 6; ++c) {
            const double p = static_cast<double>(counts[c]) / static_cast<double>(cfg.reps);
            row.cells[c].power = p;
            row.cells[c].se = std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.reps));
        }
        table.rows.push_back(row);
        if (on_row) on_row(row);
    }
    return table;
}

}  // namespace qdep
