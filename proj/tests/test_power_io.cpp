#include <catch2/catch.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qdep/io.hpp"
#include "qdep/power.hpp"

using namespace qdep;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

bool same_table(const PowerTable& a, const PowerTable& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (std::size_t c = 0; c < 6; ++c)
            if (a.rows[i].cells[c].power != b.rows[i].cells[c].power ||
                a.rows[i].cells[c].se != b.rows[i].cells[c].se)
                return false;
    return true;
}

PowerStudyConfig small_config() {
    PowerStudyConfig cfg;
    cfg.models = {ModelSpec::make(ModelId::Null), ModelSpec::make(ModelId::SR1)};
    cfg.n = 40;
    cfg.reps = 120;
    cfg.pool_mc = 500;
    cfg.seed = 99;
    return cfg;
}

}  // namespace

TEST_CASE("power study determinism and worker independence", "[power]") {
    PowerStudyConfig cfg = small_config();
    const PowerTable a = run_power_study(cfg);
    const PowerTable b = run_power_study(cfg);
    CHECK(same_table(a, b));

    cfg.workers = 3;
    const PowerTable c = run_power_study(cfg);
    CHECK(same_table(a, c));

    // Null model keeps the level near alpha, a strong alternative rejects
    // much more often.
    const double null_minp = a.rows[0].cells[5].power;
    CHECK(null_minp < 0.18);
    const double sr1_hhg = a.rows[1].cells[4].power;
    CHECK(sr1_hhg > 0.2);  // weak signal at n = 40, but well above the level

    for (const PowerRow& row : a.rows)
        for (const PowerCell& cell : row.cells) {
            CHECK(cell.power >= 0.0);
            CHECK(cell.power <= 1.0);
            CHECK(cell.se ==
                  Approx(std::sqrt(cell.power * (1.0 - cell.power) / cfg.reps)));
        }
}

TEST_CASE("power study reuses cached pools without changing results", "[power]") {
    TempDir dir("qdep_power_cache");
    PowerStudyConfig cfg = small_config();
    cfg.models = {ModelSpec::make(ModelId::Null)};
    cfg.pool_cache_dir = dir.path.string();

    const PowerTable fresh = run_power_study(cfg);   // builds and saves the pool
    const PowerTable cached = run_power_study(cfg);  // loads it
    CHECK(same_table(fresh, cached));

    PowerStudyConfig no_cache = cfg;
    no_cache.pool_cache_dir.clear();
    CHECK(same_table(fresh, run_power_study(no_cache)));
}

TEST_CASE("power study emits rows incrementally", "[power]") {
    PowerStudyConfig cfg = small_config();
    std::vector<std::string> seen;
    run_power_study(cfg, [&](const PowerRow& row) { seen.push_back(to_string(row.model.id)); });
    CHECK(seen == std::vector<std::string>{"null", "sr1"});
}

TEST_CASE("power table JSON round-trips bit-exactly", "[power][io]") {
    const PowerTable table = run_power_study(small_config());
    const nlohmann::json j = power_table_to_json(table);
    const nlohmann::json back = nlohmann::json::parse(j.dump());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (std::size_t c = 0; c < kPowerColumns.size(); ++c) {
            const auto& cell = back["rows"][i]["cells"][kPowerColumns[c]];
            CHECK(cell["power"].get<double>() == table.rows[i].cells[c].power);
            CHECK(cell["se"].get<double>() == table.rows[i].cells[c].se);
        }
    }
    CHECK(back["meta"]["n"] == 40);
    CHECK(back["columns"].size() == 6);
}

TEST_CASE("power csv cells carry power and standard error", "[power][io]") {
    const PowerTable table = run_power_study(small_config());
    CHECK(power_csv_header() == "model,l_r2,l_r6,d_s0,d_s4,hhg,min_p");
    const std::string row = power_row_csv(table.rows[0]);
    CHECK(row.substr(0, 5) == "null,");
    CHECK(std::count(row.begin(), row.end(), ',') == 6);
    CHECK(row.find("±") != std::string::npos);
}

TEST_CASE("power grows with the sample size under a fixed alternative",
          "[power][slow]") {
    PowerStudyConfig cfg;
    cfg.models = {ModelSpec::make(ModelId::BM1)};
    cfg.reps = 400;
    cfg.pool_mc = 1000;
    cfg.seed = 71;

    cfg.n = 30;
    const double p30 = run_power_study(cfg).rows[0].cells[1].power;  // l_r6
    const double se30 = run_power_study(cfg).rows[0].cells[1].se;
    cfg.n = 100;
    const double p100 = run_power_study(cfg).rows[0].cells[1].power;
    const double se100 = run_power_study(cfg).rows[0].cells[1].se;
    CHECK(p100 >= p30 - 2.0 * std::sqrt(se30 * se30 + se100 * se100));
    CHECK(p100 > p30);  // comfortably separated at these sizes
}

TEST_CASE("power config validation", "[power]") {
    PowerStudyConfig cfg = small_config();
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(run_power_study(cfg), InvalidParameter);
    cfg = small_config();
    cfg.reps = 10;
    CHECK_THROWS_AS(run_power_study(cfg), InvalidParameter);
    cfg = small_config();
    cfg.pool_mc = 100;
    CHECK_THROWS_AS(run_power_study(cfg), InvalidParameter);
    cfg = small_config();
    cfg.models.clear();
    CHECK_THROWS_AS(run_power_study(cfg), InvalidParameter);
}

TEST_CASE("sample csv reading", "[io]") {
    TempDir dir("qdep_io_test");

    SECTION("with and without header") {
        const fs::path with_header = dir.path / "a.csv";
        std::ofstream(with_header) << "x,y\n1.5,2.5\n-3e-2,4\n";
        const Sample a = read_sample_csv(with_header.string());
        REQUIRE(a.size() == 2);
        CHECK(a.x[0] == 1.5);
        CHECK(a.y[1] == 4.0);

        const fs::path headerless = dir.path / "b.csv";
        std::ofstream(headerless) << "1.5,2.5\n-3e-2,4\n";
        const Sample b = read_sample_csv(headerless.string());
        CHECK(b.x == a.x);
        CHECK(b.y == a.y);
    }

    SECTION("crlf and blank lines") {
        const fs::path messy = dir.path / "c.csv";
        std::ofstream(messy) << "x,y\r\n\r\n1,2\r\n3,4\r\n\n";
        const Sample s = read_sample_csv(messy.string());
        REQUIRE(s.size() == 2);
        CHECK(s.x[1] == 3.0);
    }

    SECTION("errors carry line numbers") {
        const fs::path threecol = dir.path / "bad3col.csv";
        std::ofstream(threecol) << "x,y\n1,2\n1,2,3\n";
        try {
            read_sample_csv(threecol.string());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 3);
            CHECK(std::string(e.what()).find("3") != std::string::npos);
        }

        const fs::path nonnum = dir.path / "nonnum.csv";
        std::ofstream(nonnum) << "1,2\nfoo,4\n";
        try {
            read_sample_csv(nonnum.string());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
        }

        CHECK_THROWS_AS(read_sample_csv((dir.path / "missing.csv").string()), FileNotFound);
    }

    SECTION("write/read round trip is exact") {
        Sample s;
        Rng rng = Rng::stream(41, 3);
        for (int k = 0; k < 50; ++k) {
            s.x.push_back(rng.normal() * 1e3);
            s.y.push_back(rng.normal() * 1e-3);
        }
        const fs::path file = dir.path / "round.csv";
        {
            std::ofstream out(file);
            write_sample_csv(out, s);
        }
        const Sample back = read_sample_csv(file.string());
        CHECK(back.x == s.x);
        CHECK(back.y == s.y);
    }
}

TEST_CASE("grid export", "[io]") {
    Rng rng = Rng::stream(42, 3);
    const RankedSample ranked =
        ranked_from_permutations(rng.permutation(24), rng.permutation(24));
    const QGrid grid = q_grid(ranked);
    const int n = grid.n;

    std::ostringstream csv;
    write_grid_csv(csv, grid);
    std::istringstream lines(csv.str());
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "i,j,u,v,q,z");
    std::size_t rows = 0;
    double first_q = 0.0, first_z = 0.0;
    while (std::getline(lines, line)) {
        if (rows == 0) {
            int gi = 0, gj = 0;
            double gu = 0.0, gv = 0.0;
            std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf", &gi, &gj, &gu, &gv,
                        &first_q, &first_z);
        }
        ++rows;
    }
    CHECK(rows == static_cast<std::size_t>((n + 1) * (n + 1)));
    CHECK(first_q == grid.at(0, 0));
    CHECK(first_z == std::sqrt(static_cast<double>(n)) * grid.at(0, 0));
}

TEST_CASE("pgm rendering agrees with the csv z column", "[io]") {
    Rng rng = Rng::stream(43, 3);
    const RankedSample ranked =
        ranked_from_permutations(rng.permutation(16), rng.permutation(16));
    const QGrid grid = q_grid(ranked);
    const int n = grid.n;

    std::ostringstream pgm(std::ios::binary);
    write_grid_pgm(pgm, grid);
    const std::string bytes = pgm.str();

    std::istringstream header(bytes);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    header >> magic >> w >> h >> maxval;
    CHECK(magic == "P5");
    CHECK(w == n + 1);
    CHECK(h == n + 1);
    CHECK(maxval == 255);

    const std::size_t pixel_start = static_cast<std::size_t>(header.tellg()) + 1;
    REQUIRE(bytes.size() == pixel_start + static_cast<std::size_t>(w) * h);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const unsigned char px = static_cast<unsigned char>(
                bytes[pixel_start + static_cast<std::size_t>(i) * (n + 1) + j]);
            CHECK(static_cast<int>(px) == pgm_pixel(sqrt_n * grid.at(i, j)));
        }

    CHECK(pgm_pixel(0.0) == 128);
    CHECK(pgm_pixel(6.0) == 255);
    CHECK(pgm_pixel(60.0) == 255);
    CHECK(pgm_pixel(-6.0) == 0);
    CHECK(pgm_pixel(-60.0) == 0);
}

TEST_CASE("null heatmap has thin normal tails", "[io]") {
    // Under independence the z column is approximately standard normal
    // pointwise, so cells with |z| > 3 stay rare.
    Rng rng = Rng::stream(44, 3);
    const int n = 200;
    const RankedSample ranked =
        ranked_from_permutations(rng.permutation(n), rng.permutation(n));
    const QGrid grid = q_grid(ranked);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    std::size_t extreme = 0;
    for (double q : grid.values) extreme += std::fabs(sqrt_n * q) > 3.0 ? 1 : 0;
    CHECK(static_cast<double>(extreme) / static_cast<double>(grid.values.size()) < 0.01);
}

TEST_CASE("null samples rarely reach extreme p-values", "[calibration]") {
    const StatConfig cfg;
    const NullPool pool = build_null_pool(100, 2000, 55, cfg);
    int any_extreme = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = Rng::stream(56, stream_tag::kNullReplicate, seed);
        std::vector<int> ident(100);
        std::iota(ident.begin(), ident.end(), 1);
        const RankedSample ranked =
            ranked_from_permutations(std::move(ident), rng.permutation(100));
        const TestStatistics st = compute_statistics(ranked, cfg);
        const bool extreme = p_value(st.l_r2, pool.l2_sorted) <= 0.001 ||
                             p_value(st.l_r6, pool.l6_sorted) <= 0.001 ||
                             p_value(st.d_s0, pool.d0_sorted) <= 0.001 ||
                             p_value(st.d_s4, pool.d4_sorted) <= 0.001 ||
                             p_value(st.hhg, pool.hhg_sorted) <= 0.001;
        any_extreme += extreme ? 1 : 0;
    }
    // About 0.5% of null samples would trip any of the five statistics.
    CHECK(any_extreme <= 3);
}

TEST_CASE("report json schema", "[io]") {
    const Sample s = sample(ModelSpec::make(ModelId::SR1), 30, 3);
    RunOptions opts;
    opts.mc = 100;
    const TestReport rep = run_test(s, opts);
    const nlohmann::json j = report_to_json(rep);

    for (const char* key : {"meta", "statistics", "p_values", "min_p"})
        CHECK(j.contains(key));
    for (const char* key : {"l_r2", "l_r6", "d_s0", "d_s4", "hhg"}) {
        CHECK(j["statistics"].contains(key));
        CHECK(j["p_values"].contains(key));
    }
    CHECK(j["meta"]["generator"] == kGeneratorId);
    CHECK(j["min_p"]["ingredients"] == nlohmann::json({"hhg", "l_r6"}));
    CHECK(j["min_p"]["value"].get<double>() == rep.minp.m);
    CHECK(j["min_p"]["p_value"].get<double>() == rep.minp.p_of_m);
}
