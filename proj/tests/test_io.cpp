#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "coopsense/config_io.hpp"
#include "coopsense/jobs.hpp"
#include "coopsense/results_csv.hpp"
#include "coopsense/scenarios.hpp"

using namespace coopsense;

namespace {

std::string read_all(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string scenario_dir() { return std::string(COOPSENSE_SOURCE_DIR) + "/scenarios/"; }

std::string error_of(const std::string& text)
{
    try {
        parse_scenario(text, "t.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("scenario JSON round trip")
{
    auto cfg = scenarios::table3(Algorithm::GlrCsprt, Hypothesis::H0);
    cfg.glr->boundary.correction = {{0.01, 0.5}, {1.0, 0.0}};
    CalibrationSpec cal{{0.1, 0.2}, ErrorPooling::MeanOfBoth, 0.1, 50.0};
    const auto back = scenario_from_json(scenario_to_json(cfg, cal));
    CHECK(scenario_to_json(back.scenario, back.calibration) == scenario_to_json(cfg, cal));
    CHECK(back.scenario.true_hypothesis == Hypothesis::H0);
    CHECK(back.scenario.fading.has_value());
    CHECK(back.calibration->pooling == ErrorPooling::MeanOfBoth);
}

TEST_CASE("shipped scenario files load")
{
    for (const auto& entry : std::filesystem::directory_iterator(scenario_dir())) {
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_scenario(entry.path().string()));
    }
    const auto t4 = load_scenario(scenario_dir() + "table4_row1.json").scenario;
    CHECK(t4.local_threshold == 15.0);
    CHECK(t4.fusion_threshold == 30.0);
    CHECK(t4.nodes.size() == 5);
}

TEST_CASE("scenario diagnostics")
{
    CHECK(error_of("{\n  \"id\": \"x\",\n  \"nodes\": [\n}") .find("t.json:4:1") != std::string::npos);
    CHECK(error_of(R"({"nodes":[{"post_change_mean":1}], "fusion_threshhold": 3})").find("fusion_threshhold") !=
          std::string::npos);
    CHECK(error_of(R"({"nodes":[{"post_change_mean":"big"}]})").find("nodes[0].post_change_mean") !=
          std::string::npos);
    CHECK(error_of(R"({"nodes":[{"noise_std":-1}]})").find("nodes[0].noise_std") != std::string::npos);
    CHECK(error_of(R"({"nodes":[{}], "algorithm":"CUSUM"})").find("algorithm") != std::string::npos);
    CHECK(error_of(R"({"nodes":[{}], "fusion":{"drift_convention":"odd"}})").find("fusion.drift_convention") !=
          std::string::npos);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("emit_table ordering and determinism")
{
    ResultRow a;
    a.scenario_id = "s";
    a.algorithm = "SPRT-CSPRT";
    a.beta = 30.0;
    ResultRow b = a;
    b.beta = 20.0;
    ResultRow c = a;
    c.algorithm = "DualSPRT";
    const auto one = emit_table({a});
    CHECK(std::count(one.csv.begin(), one.csv.end(), '\n') == 2);
    CHECK(one.csv.rfind("scenario_id,algorithm,gamma,beta,trials,edd_mean,edd_stderr,pfa_hat,pfa_lo,pfa_hi,truncated,seed,", 0) == 0);

    const auto t1 = emit_table({a, b, c});
    const auto t2 = emit_table({c, a, b});
    CHECK(t1.csv == t2.csv);
    CHECK(t1.text == t2.text);
    std::istringstream lines(t1.csv);
    std::string header, l1, l2, l3;
    std::getline(lines, header);
    std::getline(lines, l1);
    std::getline(lines, l2);
    std::getline(lines, l3);
    CHECK(l1.find("DualSPRT") != std::string::npos);
    CHECK(l2.find(",20,") != std::string::npos);
    CHECK(l3.find(",30,") != std::string::npos);

    ResultRow odd = a;
    odd.extras = {{"note", "x"}};
    CHECK_THROWS_AS(emit_table({a, odd}), UsageError);
    CHECK_THROWS_AS(emit_table({}), UsageError);
    CHECK(csv_field("a,b") == "\"a,b\"");
}

TEST_CASE("jobs: validation errors")
{
    JobSpec spec;
    spec.mode = JobMode::Simulate;
    spec.scenario_path = scenario_dir() + "table4_row1.json";
    spec.trials = 0;
    CHECK_THROWS_AS(run_job(spec), UsageError);
    spec.trials.reset();
    spec.scenario_path.clear();
    CHECK_THROWS_AS(run_job(spec), UsageError);
    spec.scenario_path = std::string(COOPSENSE_SOURCE_DIR) + "/tests/data/bad_field.json";
    CHECK_THROWS_AS(run_job(spec), ConfigError);

    JobSpec cal;
    cal.mode = JobMode::Calibrate;
    cal.scenario_path = scenario_dir() + "table4_row1.json";
    CHECK_THROWS_AS(run_job(cal), UsageError);

    JobSpec rep;
    rep.mode = JobMode::ReproduceTable;
    rep.table = 5;
    CHECK_THROWS_AS(run_job(rep), UsageError);
}

TEST_CASE("jobs: simulate and analyze write CSV without touching the scenario")
{
    const std::string scen = scenario_dir() + "table4_row1.json";
    const std::string before = read_all(scen);
    const auto out = (std::filesystem::temp_directory_path() / "coopsense_io_test.csv").string();

    JobSpec spec;
    spec.mode = JobMode::Analyze;
    spec.scenario_path = scen;
    spec.output_path = out;
    const auto a = run_job(spec);
    CHECK(a.exit_code == 0);
    REQUIRE(a.rows.size() == 1);
    CHECK(a.rows[0].source == "analysis");
    CHECK(a.rows[0].edd_mean == doctest::Approx(31.7624).epsilon(1e-4));
    CHECK(read_all(out).find(",analysis") != std::string::npos);

    spec.mode = JobMode::Simulate;
    spec.trials = 500;
    spec.workers = 4;
    const auto s1 = run_job(spec);
    const std::string csv1 = read_all(out);
    spec.workers = 1;
    const auto s2 = run_job(spec);
    CHECK(read_all(out) == csv1);
    CHECK(s1.rows[0].trials == 500);
    CHECK(read_all(scen) == before);
    std::filesystem::remove(out);
}

TEST_CASE("jobs: calibrate reports success and failure")
{
    const auto path = (std::filesystem::temp_directory_path() / "coopsense_cal.json").string();
    auto cfg = scenarios::table1(Algorithm::SprtCsprt);
    cfg.local_threshold = 7.5;
    {
        std::ofstream f(path);
        f << scenario_to_json(cfg, CalibrationSpec{{7.5}, ErrorPooling::TrueHypothesis, 0.05, 200.0}).dump(2);
    }
    JobSpec spec;
    spec.mode = JobMode::Calibrate;
    spec.scenario_path = path;
    spec.trials = 5'000;
    spec.target_pfa = 0.1;
    const auto ok = run_job(spec);
    CHECK(ok.exit_code == 0);
    CHECK(ok.rows.size() == 1);

    {
        std::ofstream f(path);
        f << scenario_to_json(cfg, CalibrationSpec{{7.5}, ErrorPooling::TrueHypothesis, 0.05, 3.0}).dump(2);
    }
    spec.target_pfa = 1e-4;
    const auto bad = run_job(spec);
    CHECK(bad.exit_code == 1);
    CHECK(bad.console.find("nearest achieved") != std::string::npos);
    std::filesystem::remove(path);
}
