#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "coopsense/analysis.hpp"
#include "coopsense/calibration.hpp"
#include "coopsense/config_io.hpp"
#include "coopsense/reproduce.hpp"
#include "coopsense/results_csv.hpp"
#include "coopsense/simulator.hpp"

namespace coopsense {

enum class JobMode { Simulate, Analyze, Calibrate, ReproduceTable, Compare };

struct JobSpec {
    JobMode mode = JobMode::Simulate;
    int table = 0;               ///< ReproduceTable only
    std::string scenario_path;
    std::optional<std::int64_t> trials; ///< unset selects the mode's default
    unsigned workers = 1;
    std::uint64_t master_seed = 42;
    std::string output_path;     ///< CSV destination; empty prints to the console only
    std::optional<double> target_pfa;
    bool long_run = false;
};

struct JobOutcome {
    int exit_code = 0;
    std::string console;
    std::vector<ResultRow> rows;
};

namespace job_detail {

inline ScenarioFile need_scenario(const JobSpec& spec)
{
    if (spec.scenario_path.empty()) throw UsageError("this command needs --scenario");
    return load_scenario(spec.scenario_path);
}

inline std::int64_t trials_or(const JobSpec& spec, std::int64_t fallback)
{
    if (!spec.trials) return fallback;
    if (*spec.trials < 1) throw UsageError("--trials must be >= 1");
    return *spec.trials;
}

inline void finish(JobOutcome& out, const JobSpec& spec)
{
    if (out.rows.empty()) return;
    const auto table = emit_table(out.rows);
    out.console += table.text;
    if (!spec.output_path.empty()) write_file(spec.output_path, table.csv);
}

} // namespace job_detail

/// Runs one CLI job. Configuration and usage problems surface as exceptions; a completed job that
/// missed its goal (failed calibration, out-of-tolerance table cell) returns exit code 1.
inline JobOutcome run_job(const JobSpec& spec)
{
    using namespace job_detail;
    JobOutcome out;
    switch (spec.mode) {
    case JobMode::Simulate: {
        const auto sf = need_scenario(spec);
        const std::int64_t n = trials_or(spec, 10'000);
        const auto s = simulate(sf.scenario, n, spec.master_seed, spec.workers);
        out.rows.push_back(simulation_row(sf.scenario, s, spec.master_seed));
        break;
    }
    case JobMode::Analyze: {
        const auto sf = need_scenario(spec);
        out.rows.push_back(analysis_row(sf.scenario, pfa_analytic(sf.scenario).pfa, edd_analytic(sf.scenario)));
        break;
    }
    case JobMode::Compare: {
        const auto sf = need_scenario(spec);
        const auto s = simulate(sf.scenario, trials_or(spec, 100'000), spec.master_seed, spec.workers);
        const double pfa = pfa_analytic(sf.scenario).pfa;
        const double edd = edd_analytic(sf.scenario);
        out.rows.push_back(simulation_row(sf.scenario, s, spec.master_seed));
        out.rows.push_back(analysis_row(sf.scenario, pfa, edd));
        char buf[256];
        std::snprintf(buf, sizeof buf, "relative gap analysis vs simulation: P_FA %+.2f%%  E_DD %+.2f%%\n",
                      s.pfa_hat > 0 ? 100.0 * (pfa - s.pfa_hat) / s.pfa_hat : 0.0,
                      100.0 * (edd - s.edd_mean) / s.edd_mean);
        out.console += buf;
        break;
    }
    case JobMode::Calibrate: {
        const auto sf = need_scenario(spec);
        if (!spec.target_pfa) throw UsageError("calibrate needs --target-pfa");
        CalibrationBudget b;
        b.trials = trials_or(spec, 100'000);
        b.coarse_trials = std::max<std::int64_t>(1000, b.trials / 10);
        b.seed = spec.master_seed;
        b.workers = spec.workers;
        b.local_candidates = {local_parameter(sf.scenario)};
        if (sf.calibration) {
            if (!sf.calibration->local_candidates.empty()) b.local_candidates = sf.calibration->local_candidates;
            b.pooling = sf.calibration->pooling;
            b.beta_lo = sf.calibration->beta_lo;
            b.beta_hi = sf.calibration->beta_hi;
        }
        const auto r = calibrate_thresholds(sf.scenario, *spec.target_pfa, b);
        char buf[256];
        if (!r.success) {
            out.exit_code = 1;
            out.console += "calibration failed: " + r.message + "\n";
            if (r.nearest) {
                std::snprintf(buf, sizeof buf, "nearest achieved: local=%g beta=%g error rate=%g (E_DD %g)\n",
                              r.nearest->local, r.nearest->beta, r.nearest->pfa, r.nearest->objective_edd);
                out.console += buf;
            }
            return out;
        }
        std::snprintf(buf, sizeof buf, "calibrated: local=%g beta=%g error rate=%g (E_DD %g)\n", r.best.local,
                      r.best.beta, r.best.pfa, r.best.objective_edd);
        out.console += buf;
        for (Hypothesis h : {Hypothesis::H1, Hypothesis::H0}) {
            const auto& m = h == Hypothesis::H1 ? r.best.h1 : r.best.h0;
            if (m) out.rows.push_back(reproduce_detail::calibrated_row(sf.scenario, r.best, h, spec.master_seed));
        }
        break;
    }
    case JobMode::ReproduceTable: {
        TableBudget tb;
        tb.trials = spec.trials ? trials_or(spec, 0) : 0;
        tb.seed = spec.master_seed;
        tb.workers = spec.workers;
        tb.long_run = spec.long_run;
        if (spec.table < 1 || spec.table > 4) throw UsageError("reproduce-table: table must be 1, 2, 3 or 4");
        const auto rep = reproduce_table(spec.table, tb);
        out.rows = rep.rows;
        out.console += rep.render();
        if (!spec.output_path.empty()) write_file(spec.output_path + ".report.txt", rep.render());
        out.exit_code = rep.all_pass() ? 0 : 1;
        break;
    }
    }
    finish(out, spec);
    return out;
}

} // namespace coopsense
