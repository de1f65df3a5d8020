// qdep — estimates the quantile dependence function q(u,v) from bivariate
// samples on a rank grid, runs Monte-Carlo calibrated independence tests on
// it, exports dependence heatmaps, simulates benchmark models and runs
// power studies.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdep/qdep.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

std::string env_pool_cache() {
    const char* dir = std::getenv("QDEP_POOL_CACHE");
    return dir ? std::string(dir) : std::string();
}

qdep::TiePolicy parse_tie_policy(const std::string& name) {
    if (name == "error") return qdep::TiePolicy::Error;
    if (name == "random-break") return qdep::TiePolicy::RandomBreak;
    throw CLI::ValidationError("--tie-policy", "must be 'error' or 'random-break'");
}

qdep::NullSampler parse_sampler(const std::string& name) {
    if (name == "permutation") return qdep::NullSampler::PermutationPairs;
    if (name == "uniform") return qdep::NullSampler::UniformSamples;
    throw CLI::ValidationError("--null-sampler", "must be 'permutation' or 'uniform'");
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qdep::FileNotFound("cannot write output file: " + path);
    out << text;
}

struct CommonStatFlags {
    int r = 6;
    double epsilon = 0.01;
    double kappa = 0.025;
    int s = 4;

    void attach(CLI::App* cmd) {
        cmd->add_option("--r", r, "L_r exponent feeding the min-p combination (2 or 6)")
            ->check(CLI::IsMember({2, 6}));
        cmd->add_option("--epsilon", epsilon, "corner trim of the integral statistic");
        cmd->add_option("--kappa", kappa, "margin of the supremum region");
        cmd->add_option("--s", s, "smoothing radius of the smoothed supremum statistic");
    }

    qdep::StatConfig config() const { return {r, epsilon, kappa, s}; }
};

int run(int argc, char** argv) {
    CLI::App app{"quantile dependence estimation and independence testing"};
    app.require_subcommand(1);

    // ---- test ----------------------------------------------------------
    auto* cmd_test = app.add_subcommand(
        "test", "run the calibrated independence tests on a two-column CSV");
    std::string test_input;
    std::string test_out;
    std::string test_tie = "error";
    std::string test_sampler = "permutation";
    std::string test_cache = env_pool_cache();
    int test_mc = 10000;
    int test_workers = 1;
    std::uint64_t test_seed = qdep::kDefaultSeed;
    CommonStatFlags test_stats;
    cmd_test->add_option("input", test_input, "input CSV with two numeric columns")
        ->required();
    cmd_test->add_option("--mc", test_mc, "null pool size")->check(CLI::PositiveNumber);
    cmd_test->add_option("--seed", test_seed, "master seed");
    cmd_test->add_option("--tie-policy", test_tie, "error|random-break");
    cmd_test->add_option("--null-sampler", test_sampler, "permutation|uniform");
    cmd_test->add_option("--workers", test_workers, "worker threads for pool building")
        ->check(CLI::PositiveNumber);
    cmd_test->add_option("--out", test_out, "output JSON path (default stdout)");
    cmd_test->add_option("--pool-cache", test_cache,
                         "null pool cache directory (env QDEP_POOL_CACHE)");
    test_stats.attach(cmd_test);

    // ---- heatmap --------------------------------------------------------
    auto* cmd_heatmap = app.add_subcommand(
        "heatmap", "export the estimated dependence grid as CSV (and PGM)");
    std::string hm_input;
    std::string hm_prefix;
    std::string hm_tie = "error";
    bool hm_pgm = false;
    int hm_s = 4;
    std::uint64_t hm_seed = qdep::kDefaultSeed;
    cmd_heatmap->add_option("input", hm_input, "input CSV with two numeric columns")
        ->required();
    cmd_heatmap->add_option("--out", hm_prefix, "output path prefix")->required();
    cmd_heatmap->add_option("--s", hm_s, "smoothing radius of the smoothed grid")
        ->check(CLI::NonNegativeNumber);
    cmd_heatmap->add_option("--tie-policy", hm_tie, "error|random-break");
    cmd_heatmap->add_option("--seed", hm_seed, "seed for random tie breaking");
    cmd_heatmap->add_flag("--pgm", hm_pgm, "additionally render 8-bit PGM images");

    // ---- simulate -------------------------------------------------------
    auto* cmd_simulate =
        app.add_subcommand("simulate", "draw a sample from a benchmark model");
    std::string sim_model;
    std::string sim_out;
    int sim_n = 100;
    std::uint64_t sim_seed = qdep::kDefaultSeed;
    cmd_simulate->add_option("model", sim_model, "model id (null, sr1..sr5, hr1, hr2, re1..re4, bm1..bm11)")
        ->required();
    cmd_simulate->add_option("--n", sim_n, "sample size")->check(CLI::PositiveNumber);
    cmd_simulate->add_option("--seed", sim_seed, "master seed");
    cmd_simulate->add_option("--out", sim_out, "output CSV path (default stdout)");

    // ---- power ----------------------------------------------------------
    auto* cmd_power =
        app.add_subcommand("power", "empirical power study over benchmark models");
    std::vector<std::string> pw_models;
    std::string pw_out_csv;
    std::string pw_out_json;
    std::string pw_cache = env_pool_cache();
    int pw_n = 100;
    double pw_alpha = 0.05;
    int pw_reps = 1000;
    int pw_pool_mc = 2000;
    int pw_workers = 1;
    std::uint64_t pw_seed = qdep::kDefaultSeed;
    CommonStatFlags pw_stats;
    cmd_power
        ->add_option("--models", pw_models,
                     "model ids, comma separated ('all' = the 22 benchmark models)")
        ->required()
        ->delimiter(',');
    cmd_power->add_option("--n", pw_n, "sample size")->check(CLI::PositiveNumber);
    cmd_power->add_option("--alpha", pw_alpha, "significance level");
    cmd_power->add_option("--reps", pw_reps, "MC repetitions per model");
    cmd_power->add_option("--pool-mc", pw_pool_mc, "null pool size");
    cmd_power->add_option("--seed", pw_seed, "master seed");
    cmd_power->add_option("--workers", pw_workers, "worker threads")
        ->check(CLI::PositiveNumber);
    cmd_power->add_option("--out-csv", pw_out_csv, "power table CSV path (default stdout)");
    cmd_power->add_option("--out-json", pw_out_json, "power table JSON path");
    cmd_power->add_option("--pool-cache", pw_cache,
                          "null pool cache directory (env QDEP_POOL_CACHE)");
    pw_stats.attach(cmd_power);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (cmd_test->parsed()) {
        qdep::RunOptions opts;
        opts.cfg = test_stats.config();
        opts.mc = test_mc;
        opts.seed = test_seed;
        opts.tie_policy = parse_tie_policy(test_tie);
        opts.sampler = parse_sampler(test_sampler);
        opts.workers = test_workers;
        opts.pool_cache_dir = test_cache;

        const qdep::Sample sample = qdep::read_sample_csv(test_input);
        const qdep::TestReport report = qdep::run_test(sample, opts);
        if (report.pool_from_cache)
            std::cerr << "null pool loaded from cache\n";
        write_text(test_out, qdep::report_to_json(report).dump(2) + "\n");
        return 0;
    }

    if (cmd_heatmap->parsed()) {
        const qdep::Sample sample = qdep::read_sample_csv(hm_input);
        if (sample.size() < 3)
            throw qdep::SampleTooSmall("heatmap needs at least 3 observations");
        const qdep::RankedSample ranked =
            qdep::compute_ranks(sample, parse_tie_policy(hm_tie), hm_seed);
        const qdep::QGrid q0 = qdep::q_grid(ranked);

        const auto emit = [&](const qdep::QGrid& grid, int s) {
            const std::string base = hm_prefix + "_s" + std::to_string(s);
            std::ofstream csv(base + ".csv", std::ios::binary);
            if (!csv) throw qdep::FileNotFound("cannot write " + base + ".csv");
            qdep::write_grid_csv(csv, grid);
            if (hm_pgm) {
                std::ofstream pgm(base + ".pgm", std::ios::binary);
                if (!pgm) throw qdep::FileNotFound("cannot write " + base + ".pgm");
                qdep::write_grid_pgm(pgm, grid);
            }
        };
        emit(q0, 0);
        if (hm_s > 0) emit(qdep::smooth_q_grid(q0, hm_s), hm_s);
        return 0;
    }

    if (cmd_simulate->parsed()) {
        const qdep::ModelSpec spec = qdep::model_from_string(sim_model);
        const qdep::Sample sample = qdep::sample(spec, sim_n, sim_seed);
        std::ostringstream os;
        qdep::write_sample_csv(os, sample);
        write_text(sim_out, os.str());
        return 0;
    }

    if (cmd_power->parsed()) {
        qdep::PowerStudyConfig cfg;
        if (pw_models.size() == 1 && pw_models[0] == "all") {
            cfg.models.clear();
            for (const auto& [name, id] : qdep::model_name_table())
                if (id != qdep::ModelId::Null) cfg.models.push_back(qdep::ModelSpec::make(id));
        } else {
            for (const std::string& name : pw_models)
                cfg.models.push_back(qdep::model_from_string(name));
        }
        cfg.n = pw_n;
        cfg.alpha = pw_alpha;
        cfg.reps = pw_reps;
        cfg.pool_mc = pw_pool_mc;
        cfg.seed = pw_seed;
        cfg.stats = pw_stats.config();
        cfg.workers = pw_workers;
        cfg.pool_cache_dir = pw_cache;

        std::unique_ptr<std::ofstream> csv_file;
        std::ostream* csv_out = &std::cout;
        if (!pw_out_csv.empty() && pw_out_csv != "-") {
            csv_file = std::make_unique<std::ofstream>(pw_out_csv, std::ios::binary);
            if (!*csv_file)
                throw qdep::FileNotFound("cannot write output file: " + pw_out_csv);
            csv_out = csv_file.get();
        }
        *csv_out << qdep::power_csv_header() << '\n' << std::flush;

        std::size_t done = 0;
        const qdep::PowerTable table =
            qdep::run_power_study(cfg, [&](const qdep::PowerRow& row) {
                // Flush each finished model so interrupted runs keep rows.
                *csv_out << qdep::power_row_csv(row) << '\n' << std::flush;
                ++done;
                std::cerr << "model " << qdep::to_string(row.model.id) << " done (" << done
                          << "/" << cfg.models.size() << ")\n";
            });

        if (!pw_out_json.empty())
            write_text(pw_out_json, qdep::power_table_to_json(table).dump(2) + "\n");
        return 0;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error&) {
        return kExitUsage;
    } catch (const qdep::FileNotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const qdep::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const qdep::TiesPresent& e) {
        std::cerr << "error: " << e.what()
                  << "\nhint: rerun with --tie-policy=random-break\n";
        return kExitData;
    } catch (const qdep::SampleTooSmall& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const qdep::NonFiniteValue& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const qdep::LengthMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const qdep::UnknownModel& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qdep::InvalidParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qdep::InvalidPoolSize& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qdep::SmoothingRadiusTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qdep::DegenerateRegion& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qdep::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qdep::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
