#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "coopsense/jobs.hpp"

namespace {

constexpr const char* kEnvPrefix = "COOPSENSE_";

std::string env(const char* name) { return std::string(kEnvPrefix) + name; }

} // namespace

int main(int argc, char** argv)
{
    using namespace coopsense;
    CLI::App app{"Cooperative sequential spectrum sensing: simulation, analysis and table reproduction"};
    app.require_subcommand(1);
    app.fallthrough();

    JobSpec spec;
    std::optional<std::int64_t> trials;
    std::optional<unsigned> workers;
    std::optional<double> target;
    app.add_option("--scenario", spec.scenario_path, "Scenario file (JSON)")->envname(env("SCENARIO"));
    app.add_option("--trials", trials, "Monte Carlo trials (per cell for reproduce-table)")->envname(env("TRIALS"));
    app.add_option("--seed", spec.master_seed, "Master seed")->envname(env("SEED"));
    app.add_option("--workers", workers, "Worker threads (default: available parallelism)")->envname(env("WORKERS"));
    app.add_option("--out", spec.output_path, "CSV output path")->envname(env("OUT"));
    app.add_option("--target-pfa", target, "Target error probability for calibrate")->envname(env("TARGET_PFA"));

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of E_DD and P_FA for one scenario");
    auto* ana = app.add_subcommand("analyze", "Closed-form P_FA and E_DD (SPRT-CSPRT scenarios)");
    auto* cal = app.add_subcommand("calibrate", "Find thresholds meeting --target-pfa with minimal E_DD");
    auto* rep = app.add_subcommand("reproduce-table", "Reproduce one of the reference tables and score it");
    rep->add_option("table", spec.table, "Table number")->required()->check(CLI::Range(1, 4));
    rep->add_flag("--long", spec.long_run, "Include the long-running 5e-5 column of table 1")->envname(env("LONG"));
    auto* cmp = app.add_subcommand("compare", "Simulation and analysis side by side for one scenario");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (*sim) spec.mode = JobMode::Simulate;
    if (*ana) spec.mode = JobMode::Analyze;
    if (*cal) spec.mode = JobMode::Calibrate;
    if (*rep) spec.mode = JobMode::ReproduceTable;
    if (*cmp) spec.mode = JobMode::Compare;
    spec.trials = trials;
    spec.target_pfa = target;
    spec.workers = workers ? *workers : default_workers();

    try {
        const auto outcome = run_job(spec);
        std::cout << outcome.console << std::flush;
        return outcome.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}
