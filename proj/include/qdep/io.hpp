#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdep/calibration.hpp"
#include "qdep/copula_grid.hpp"
#include "qdep/errors.hpp"
#include "qdep/power.hpp"
#include "qdep/ranks.hpp"

namespace qdep {

namespace detail {

inline bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Reads a two-column numeric CSV (comma separated, '.' decimal point, one
// optional header line). Malformed rows raise ParseError with their line
// number.
inline Sample read_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open input file: " + path);

    Sample sample;
    std::string line;
    long line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = detail::trim(line);
        if (row.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(row);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(detail::trim(field));
        if (!row.empty() && row.back() == ',') fields.push_back("");

        if (fields.size() != 2)
            throw ParseError("expected exactly 2 columns, found " +
                                 std::to_string(fields.size()),
                             line_no);

        double x = 0.0, y = 0.0;
        const bool ok = detail::parse_double(fields[0], x) && detail::parse_double(fields[1], y);
        if (!ok) {
            if (first_content_line) {  // header line
                first_content_line = false;
                continue;
            }
            throw ParseError("non-numeric value in data row", line_no);
        }
        first_content_line = false;
        sample.x.push_back(x);
        sample.y.push_back(y);
    }
    return sample;
}

inline void write_sample_csv(std::ostream& out, const Sample& sample) {
    out << "x,y\n";
    for (std::size_t k = 0; k < sample.size(); ++k)
        out << detail::format_g17(sample.x[k]) << ',' << detail::format_g17(sample.y[k])
            << '\n';
}

// Grid export: one row per grid cell in row-major order, with the
// sqrt(n)-scaled column z for reading cells on the standard normal scale.
inline void write_grid_csv(std::ostream& out, const QGrid& grid) {
    const int n = grid.n;
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    out << "i,j,u,v,q,z\n";
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const double q = grid.at(i, j);
            out << i << ',' << j << ',' << detail::format_g17(grid_coord(i, n)) << ','
                << detail::format_g17(grid_coord(j, n)) << ',' << detail::format_g17(q)
                << ',' << detail::format_g17(sqrt_n * q) << '\n';
        }
    }
}

// Affine map from the z scale to an 8-bit gray level; the scale clips at
// |z| = 6.
inline int pgm_pixel(double z) {
    const double mapped = std::lround(127.5 + 21.25 * z);
    if (mapped < 0.0) return 0;
    if (mapped > 255.0) return 255;
    return static_cast<int>(mapped);
}

// Binary P5 rendering of the z-scaled grid; pixel row = i, column = j.
inline void write_grid_pgm(std::ostream& out, const QGrid& grid) {
    const int n = grid.n;
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    out << "P5\n" << (n + 1) << ' ' << (n + 1) << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j)
            row[static_cast<std::size_t>(j)] =
                static_cast<unsigned char>(pgm_pixel(sqrt_n * grid.at(i, j)));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
}

// =========================================================================
// JSON reports. Keys are emitted in sorted order by the JSON library, so
// identical runs produce identical bytes.
// =========================================================================

inline nlohmann::json config_to_json(const StatConfig& cfg) {
    return {{"r", cfg.r}, {"epsilon", cfg.epsilon}, {"kappa", cfg.kappa}, {"s", cfg.s}};
}

inline StatConfig config_from_json(const nlohmann::json& j) {
    StatConfig cfg;
    cfg.r = j.at("r").get<int>();
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.kappa = j.at("kappa").get<double>();
    cfg.s = j.at("s").get<int>();
    return cfg;
}

inline nlohmann::json report_to_json(const TestReport& rep) {
    nlohmann::json j;
    j["meta"] = {
        {"n", rep.n},
        {"mc", rep.opts.mc},
        {"seed", rep.opts.seed},
        {"tie_policy", rep.opts.tie_policy == TiePolicy::Error ? "error" : "random-break"},
        {"null_sampler", to_string(rep.opts.sampler)},
        {"generator", kGeneratorId},
        {"config", config_to_json(rep.opts.cfg)},
    };
    j["statistics"] = {
        {"l_r2", rep.stats.l_r2}, {"l_r6", rep.stats.l_r6}, {"d_s0", rep.stats.d_s0},
        {"d_s4", rep.stats.d_s4}, {"hhg", rep.stats.hhg},
    };
    j["p_values"] = {
        {"l_r2", rep.p_l2}, {"l_r6", rep.p_l6}, {"d_s0", rep.p_d0},
        {"d_s4", rep.p_d4}, {"hhg", rep.p_hhg},
    };
    j["min_p"] = {
        {"ingredients", {"hhg", rep.opts.cfg.r == 2 ? "l_r2" : "l_r6"}},
        {"value", rep.minp.m},
        {"p_value", rep.minp.p_of_m},
    };
    return j;
}

inline nlohmann::json power_row_to_json(const PowerRow& row) {
    nlohmann::json cells;
    for (std::size_t c = 0; c < kPowerColumns.size(); ++c)
        cells[kPowerColumns[c]] = {{"power", row.cells[c].power},
                                   {"se", row.cells[c].se}};
    return {{"model", to_string(row.model.id)}, {"cells", cells}};
}

inline nlohmann::json power_table_to_json(const PowerTable& table) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : table.cfg.models) models.push_back(to_string(m.id));
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) rows.push_back(power_row_to_json(row));
    nlohmann::json j;
    j["meta"] = {
        {"n", table.cfg.n},
        {"alpha", table.cfg.alpha},
        {"reps", table.cfg.reps},
        {"pool_mc", table.cfg.pool_mc},
        {"seed", table.cfg.seed},
        {"shared_null_pool", true},
        {"generator", kGeneratorId},
        {"config", config_to_json(table.cfg.stats)},
        {"models", models},
    };
    j["columns"] = kPowerColumns;
    j["rows"] = rows;
    return j;
}

inline std::string power_csv_header() {
    std::string h = "model";
    for (const char* c : kPowerColumns) {
        h += ',';
        h += c;
    }
    return h;
}

inline std::string power_row_csv(const PowerRow& row) {
    std::ostringstream os;
    os << to_string(row.model.id);
    char buf[64];
    for (const PowerCell& cell : row.cells) {
        std::snprintf(buf, sizeof(buf), ",%.4f±%.4f", cell.power, cell.se);
        os << buf;
    }
    return os.str();
}

}  // namespace qdep
