#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "coopsense/analysis.hpp"
#include "coopsense/calibration.hpp"
#include "coopsense/golden.hpp"
#include "coopsense/results_csv.hpp"
#include "coopsense/scenarios.hpp"
#include "coopsense/simulator.hpp"

namespace coopsense {

/// One scored comparison. `criterion` groups checks for the acceptance report; 0 marks
/// informational cells that never fail.
struct CellCheck {
    int criterion = 0;
    std::string label;
    double expected = 0.0;
    double observed = 0.0;
    bool pass = true;
    std::string detail;
};

struct TableReport {
    int table = 0;
    std::vector<ResultRow> rows;
    std::vector<CellCheck> checks;

    bool all_pass() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    std::string render() const
    {
        std::string out = "table " + std::to_string(table) + " comparison\n";
        char buf[512];
        for (const auto& c : checks) {
            const double rel = c.expected != 0.0 ? (c.observed - c.expected) / c.expected : 0.0;
            std::snprintf(buf, sizeof buf, "  [%s] %-52s expected %-12.6g observed %-12.6g rel %+7.2f%%  %s\n",
                          c.criterion == 0 ? "info" : (c.pass ? "PASS" : "FAIL"), c.label.c_str(), c.expected,
                          c.observed, 100.0 * rel, c.detail.c_str());
            out += buf;
        }
        return out;
    }
};

struct TableBudget {
    std::int64_t trials = 0;        ///< per cell; 0 picks the table's default
    std::int64_t coarse_trials = 0; ///< calibration bracketing; 0 picks trials / 10
    std::uint64_t seed = 42;
    unsigned workers = 1;
    bool long_run = false; ///< include the 5e-5 column of table 1
};

namespace reproduce_detail {

inline std::string fmt(const char* f, double a, double b = 0.0)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

inline CalibrationBudget calibration_budget(const TableBudget& tb, std::int64_t default_trials,
                                            std::vector<double> candidates, ErrorPooling pooling)
{
    CalibrationBudget b;
    b.trials = tb.trials > 0 ? tb.trials : default_trials;
    b.coarse_trials = tb.coarse_trials > 0 ? tb.coarse_trials : std::max<std::int64_t>(1000, b.trials / 10);
    b.seed = tb.seed;
    b.workers = tb.workers;
    b.local_candidates = std::move(candidates);
    b.pooling = pooling;
    return b;
}

inline CellCheck relative(int criterion, std::string label, double expected, double observed, double tol)
{
    const double rel = std::abs(observed - expected) / std::abs(expected);
    return {criterion, std::move(label), expected, observed, rel <= tol, fmt("tol %.0f%%", 100.0 * tol)};
}

inline CellCheck inside_interval(int criterion, std::string label, double expected, const MonteCarloSummary& s)
{
    const bool ok = expected >= s.pfa_ci95.first && expected <= s.pfa_ci95.second;
    return {criterion, std::move(label), expected, s.pfa_hat, ok, fmt("wilson95 [%.5g, %.5g]", s.pfa_ci95.first, s.pfa_ci95.second)};
}

/// a < b with the difference exceeding `k` combined standard errors.
inline CellCheck ordering(int criterion, std::string label, const MonteCarloSummary& a, const MonteCarloSummary& b,
                          double k = 2.0)
{
    const double se = std::sqrt(a.edd_stderr * a.edd_stderr + b.edd_stderr * b.edd_stderr);
    const double gap = b.edd_mean - a.edd_mean;
    return {criterion, std::move(label), b.edd_mean, a.edd_mean, gap > k * se,
            fmt("gap %.4g vs 2se %.4g", gap, k * se)};
}

inline CellCheck truncation(std::string label, const MonteCarloSummary& s)
{
    const double rate = static_cast<double>(s.truncated_count) / static_cast<double>(s.trials);
    return {7, std::move(label), golden::kMaxTruncationRate, rate, rate < golden::kMaxTruncationRate, "truncation rate"};
}

inline ResultRow calibrated_row(ScenarioConfig cfg, const OperatingPoint& p, Hypothesis truth, std::uint64_t seed)
{
    cfg = with_local(cfg, p.local);
    cfg.fusion_threshold = p.beta;
    cfg.true_hypothesis = truth;
    return simulation_row(cfg, truth == Hypothesis::H1 ? *p.h1 : *p.h0, seed);
}

inline std::string col_label(double target) { return fmt("pfa=%g", target); }

inline std::vector<double> sprt_gamma_grid() { return {0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}; }
inline std::vector<double> glr_cost_grid() { return {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 5.0}; }
// Under fading the pooled error rate floors out near 0.05 unless nodes wait longer, so reach lower costs.
inline std::vector<double> fading_glr_cost_grid() { return {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0}; }

} // namespace reproduce_detail

/// Table 1: E_DD under H1 after calibrating beta to each P_FA target (gamma fixed per column).
inline TableReport reproduce_table1(const TableBudget& tb)
{
    using namespace reproduce_detail;
    TableReport rep{1, {}, {}};
    const std::array<Algorithm, 3> algs{Algorithm::DualSPRT, Algorithm::SprtCsprt, Algorithm::DualCSPRT};
    const std::size_t columns = tb.long_run ? 3 : 2;
    for (std::size_t col = 0; col < columns; ++col) {
        const double target = golden::kTable1Targets[col];
        const std::int64_t default_trials = col == 2 ? 2'000'000 : 100'000;
        std::array<std::optional<MonteCarloSummary>, 3> got;
        for (std::size_t a = 0; a < algs.size(); ++a) {
            const auto cfg = scenarios::table1(algs[a]);
            auto b = calibration_budget(tb, default_trials, {golden::kTable1Gamma[col]}, ErrorPooling::TrueHypothesis);
            const auto res = calibrate_thresholds(cfg, target, b);
            const std::string name = std::string(to_string(algs[a])) + " " + col_label(target);
            if (!res.success) {
                const double near = res.nearest ? res.nearest->pfa : std::nan("");
                rep.checks.push_back({1, name + " calibration", target, near, false, res.message});
                continue;
            }
            got[a] = res.best.h1;
            rep.rows.push_back(calibrated_row(cfg, res.best, Hypothesis::H1, tb.seed));
            rep.checks.push_back(inside_interval(1, name + " achieved P_FA", target, *res.best.h1));
            rep.checks.push_back(relative(1, name + " E_DD", golden::kTable1Edd[a][col], res.best.h1->edd_mean,
                                          golden::kTable1RelTol));
            rep.checks.push_back(truncation(name, *res.best.h1));
        }
        if (got[0] && got[1] && got[2]) {
            rep.checks.push_back(ordering(4, "DualCSPRT < SPRT-CSPRT " + col_label(target), *got[2], *got[1]));
            rep.checks.push_back(ordering(4, "SPRT-CSPRT < DualSPRT " + col_label(target), *got[1], *got[0]));
        } else {
            rep.checks.push_back({4, "ordering " + col_label(target), 0, 0, false, "calibration failed"});
        }
    }
    return rep;
}

/// Table 2: no fading, each hypothesis row calibrated to its own error rate.
inline TableReport reproduce_table2(const TableBudget& tb)
{
    using namespace reproduce_detail;
    TableReport rep{2, {}, {}};
    const std::array<Algorithm, 3> algs{Algorithm::SprtCsprt, Algorithm::GlrSprt, Algorithm::GlrCsprt};
    const std::vector<double> targets(golden::kTable2Targets.begin(), golden::kTable2Targets.end());
    for (Hypothesis h : {Hypothesis::H1, Hypothesis::H0}) {
        const auto& ref = h == Hypothesis::H1 ? golden::kTable2EddH1 : golden::kTable2EddH0;
        std::array<std::vector<CalibrationResult>, 3> res;
        for (std::size_t a = 0; a < algs.size(); ++a) {
            const auto cfg = scenarios::table2(algs[a], h);
            auto b = calibration_budget(tb, 40'000, is_glr(algs[a]) ? glr_cost_grid() : sprt_gamma_grid(),
                                        ErrorPooling::TrueHypothesis);
            res[a] = calibrate_targets(cfg, targets, b);
            for (std::size_t t = 0; t < targets.size(); ++t) {
                const std::string name = std::string(to_string(algs[a])) + " " + std::string(to_string(h)) + " " +
                                         col_label(targets[t]);
                const auto& r = res[a][t];
                if (!r.success) {
                    rep.checks.push_back({5, name + " calibration", targets[t], r.nearest ? r.nearest->pfa : std::nan(""),
                                          false, r.message});
                    continue;
                }
                const auto& s = h == Hypothesis::H1 ? *r.best.h1 : *r.best.h0;
                rep.rows.push_back(calibrated_row(cfg, r.best, h, tb.seed));
                rep.checks.push_back({0, name + " E_DD", ref[a][t], s.edd_mean, true, ""});
                rep.checks.push_back(truncation(name, s));
            }
        }
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const std::string suffix = " " + std::string(to_string(h)) + " " + col_label(targets[t]);
            const auto& csprt = res[2][t];
            const auto& sprt = res[1][t];
            if (!csprt.success || !sprt.success) {
                rep.checks.push_back({5, "GLR-CSPRT < GLR-SPRT" + suffix, 0, 0, false, "calibration failed"});
                continue;
            }
            auto pick = [&](const OperatingPoint& p) { return h == Hypothesis::H1 ? *p.h1 : *p.h0; };
            rep.checks.push_back(ordering(5, "GLR-CSPRT < GLR-SPRT" + suffix, pick(csprt.best), pick(sprt.best)));
            if (h == Hypothesis::H1 && t == 0) {
                if (res[0][t].success)
                    rep.checks.push_back(ordering(5, "GLR-CSPRT < SPRT-CSPRT" + suffix, pick(csprt.best), pick(res[0][t].best)));
                else
                    rep.checks.push_back({5, "GLR-CSPRT < SPRT-CSPRT" + suffix, 0, 0, false, "calibration failed"});
            }
        }
    }
    return rep;
}

/// Table 3: slow fading; one operating point per target, calibrated on the mean of both error rates.
inline TableReport reproduce_table3(const TableBudget& tb)
{
    using namespace reproduce_detail;
    TableReport rep{3, {}, {}};
    const std::array<Algorithm, 3> algs{Algorithm::DualSPRT, Algorithm::GlrSprt, Algorithm::GlrCsprt};
    const std::vector<double> targets(golden::kTable3Targets.begin(), golden::kTable3Targets.end());
    std::array<std::vector<CalibrationResult>, 3> res;
    for (std::size_t a = 0; a < algs.size(); ++a) {
        const auto cfg = scenarios::table3(algs[a], Hypothesis::H1);
        auto b = calibration_budget(tb, 40'000, is_glr(algs[a]) ? fading_glr_cost_grid() : sprt_gamma_grid(),
                                    ErrorPooling::MeanOfBoth);
        res[a] = calibrate_targets(cfg, targets, b);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const std::string name = std::string(to_string(algs[a])) + " " + col_label(targets[t]);
            const auto& r = res[a][t];
            if (!r.success) {
                rep.checks.push_back({5, name + " calibration", targets[t], r.nearest ? r.nearest->pfa : std::nan(""),
                                      false, r.message});
                continue;
            }
            for (Hypothesis h : {Hypothesis::H1, Hypothesis::H0}) {
                const auto& s = h == Hypothesis::H1 ? *r.best.h1 : *r.best.h0;
                const auto& ref = h == Hypothesis::H1 ? golden::kTable3EddH1 : golden::kTable3EddH0;
                rep.rows.push_back(calibrated_row(cfg, r.best, h, tb.seed));
                rep.checks.push_back({0, name + " " + std::string(to_string(h)) + " E_DD", ref[a][t], s.edd_mean, true, ""});
                rep.checks.push_back(truncation(name + " " + std::string(to_string(h)), s));
            }
        }
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
        for (Hypothesis h : {Hypothesis::H1, Hypothesis::H0}) {
            const std::string label = "GLR-CSPRT < GLR-SPRT " + std::string(to_string(h)) + " " + col_label(targets[t]);
            if (!res[2][t].success || !res[1][t].success) {
                rep.checks.push_back({5, label, 0, 0, false, "calibration failed"});
                continue;
            }
            auto pick = [&](const OperatingPoint& p) { return h == Hypothesis::H1 ? *p.h1 : *p.h0; };
            rep.checks.push_back(ordering(5, label, pick(res[2][t].best), pick(res[1][t].best)));
        }
    }
    return rep;
}

inline ResultRow analysis_row(const ScenarioConfig& cfg, double pfa, double edd)
{
    ResultRow r;
    r.scenario_id = cfg.id;
    r.algorithm = std::string(to_string(cfg.algorithm));
    r.gamma = cfg.local_threshold;
    r.beta = cfg.fusion_threshold;
    r.edd_mean = edd;
    r.pfa_hat = r.pfa_lo = r.pfa_hi = pfa;
    r.truth = std::string(to_string(cfg.true_hypothesis));
    r.source = "analysis";
    return r;
}

/// Table 4: SPRT-CSPRT at fixed thresholds, simulation against the analytic pipeline.
inline TableReport reproduce_table4(const TableBudget& tb)
{
    using namespace reproduce_detail;
    TableReport rep{4, {}, {}};
    const std::int64_t trials = tb.trials > 0 ? tb.trials : 400'000;
    for (const auto& row : golden::kTable4) {
        const auto cfg = scenarios::table4(row.gamma, row.beta);
        const std::string name = fmt("gamma=%g beta=%g", row.gamma, row.beta);
        const auto sim = simulate(cfg, trials, tb.seed, tb.workers);
        const double pfa_an = pfa_analytic(cfg).pfa;
        const double edd_an = edd_analytic(cfg);
        rep.rows.push_back(simulation_row(cfg, sim, tb.seed));
        rep.rows.push_back(analysis_row(cfg, pfa_an, edd_an));

        rep.checks.push_back(inside_interval(2, name + " simulated P_FA", row.pfa_sim, sim));
        rep.checks.push_back(relative(2, name + " simulated E_DD", row.edd_sim, sim.edd_mean, golden::kTable4EddRelTol));
        rep.checks.push_back(relative(2, name + " analytic P_FA", row.pfa_analysis, pfa_an, golden::kTable4AnalysisRelTol));
        rep.checks.push_back(relative(2, name + " analytic E_DD", row.edd_analysis, edd_an, golden::kTable4AnalysisRelTol));
        rep.checks.push_back(truncation(name, sim));

        auto gap_check = [&](const std::string& what, double ref_an, double ref_sim, double an, double s) {
            const double allowed = std::abs(ref_an - ref_sim) / ref_sim + golden::kTable4GapSlack;
            const double ours = std::abs(an - s) / s;
            rep.checks.push_back({3, name + " " + what + " analysis-vs-simulation gap", allowed, ours, ours <= allowed,
                                  "observed gap must not exceed expected"});
        };
        gap_check("P_FA", row.pfa_analysis, row.pfa_sim, pfa_an, sim.pfa_hat);
        gap_check("E_DD", row.edd_analysis, row.edd_sim, edd_an, sim.edd_mean);
    }
    return rep;
}

inline TableReport reproduce_table(int table, const TableBudget& tb)
{
    switch (table) {
    case 1: return reproduce_table1(tb);
    case 2: return reproduce_table2(tb);
    case 3: return reproduce_table3(tb);
    case 4: return reproduce_table4(tb);
    default: throw UsageError("reproduce-table: table must be 1, 2, 3 or 4");
    }
}

} // namespace coopsense
