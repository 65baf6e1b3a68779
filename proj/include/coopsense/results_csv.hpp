#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "coopsense/errors.hpp"
#include "coopsense/model.hpp"
#include "coopsense/simulator.hpp"

namespace coopsense {

/// One line of the results CSV. For GLR algorithms the gamma column carries the cost c.
struct ResultRow {
    std::string scenario_id;
    std::string algorithm;
    double gamma = 0.0;
    double beta = 0.0;
    std::int64_t trials = 0;
    double edd_mean = 0.0;
    double edd_stderr = 0.0;
    double pfa_hat = 0.0;
    double pfa_lo = 0.0;
    double pfa_hi = 0.0;
    std::int64_t truncated = 0;
    std::uint64_t seed = 0;
    std::string truth = "H1";
    std::string source = "simulation";
    std::vector<std::pair<std::string, std::string>> extras; ///< additional columns, same keys on every row
};

inline const std::vector<std::string>& base_columns()
{
    static const std::vector<std::string> cols{"scenario_id", "algorithm", "gamma",  "beta",   "trials",
                                               "edd_mean",    "edd_stderr", "pfa_hat", "pfa_lo", "pfa_hi",
                                               "truncated",   "seed",      "truth",  "source"};
    return cols;
}

inline ResultRow simulation_row(const ScenarioConfig& cfg, const MonteCarloSummary& s, std::uint64_t seed)
{
    ResultRow r;
    r.scenario_id = cfg.id;
    r.algorithm = std::string(to_string(cfg.algorithm));
    r.gamma = is_glr(cfg.algorithm) ? cfg.glr->cost : cfg.local_threshold;
    r.beta = cfg.fusion_threshold;
    r.trials = s.trials;
    r.edd_mean = s.edd_mean;
    r.edd_stderr = s.edd_stderr;
    r.pfa_hat = s.pfa_hat;
    r.pfa_lo = s.pfa_ci95.first;
    r.pfa_hi = s.pfa_ci95.second;
    r.truncated = s.truncated_count;
    r.seed = seed;
    r.truth = std::string(to_string(cfg.true_hypothesis));
    return r;
}

inline std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

namespace detail {

inline std::vector<std::string> row_cells(const ResultRow& r)
{
    std::vector<std::string> c{r.scenario_id,
                               r.algorithm,
                               format_number(r.gamma),
                               format_number(r.beta),
                               std::to_string(r.trials),
                               format_number(r.edd_mean),
                               format_number(r.edd_stderr),
                               format_number(r.pfa_hat),
                               format_number(r.pfa_lo),
                               format_number(r.pfa_hi),
                               std::to_string(r.truncated),
                               std::to_string(r.seed),
                               r.truth,
                               r.source};
    for (const auto& [_, v] : r.extras) c.push_back(v);
    return c;
}

inline std::vector<std::string> schema_of(const ResultRow& r)
{
    auto cols = base_columns();
    for (const auto& [k, _] : r.extras) cols.push_back(k);
    return cols;
}

} // namespace detail

struct RenderedTable {
    std::string csv;
    std::string text;
};

/// Sorts rows by (scenario, algorithm, truth, gamma, beta, source) and renders them as CSV and as an
/// aligned text table. Output depends only on the row values.
inline RenderedTable emit_table(std::vector<ResultRow> rows)
{
    if (rows.empty()) throw UsageError("emit_table: no rows");
    const auto schema = detail::schema_of(rows.front());
    for (const auto& r : rows)
        if (detail::schema_of(r) != schema) throw UsageError("emit_table: rows do not share one column schema");
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.scenario_id, a.algorithm, a.truth, a.gamma, a.beta, a.source) <
               std::tie(b.scenario_id, b.algorithm, b.truth, b.gamma, b.beta, b.source);
    });

    std::vector<std::vector<std::string>> cells{schema};
    for (const auto& r : rows) cells.push_back(detail::row_cells(r));

    RenderedTable out;
    std::vector<std::size_t> width(schema.size(), 0);
    for (const auto& line : cells)
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            out.csv += (i ? "," : "") + csv_field(line[i]);
            out.text += (i ? "  " : "") + line[i] + std::string(width[i] - line[i].size(), ' ');
        }
        out.csv += '\n';
        while (!out.text.empty() && out.text.back() == ' ') out.text.pop_back();
        out.text += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

} // namespace coopsense
