#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "coopsense/results_csv.hpp"
#include "coopsense/scenarios.hpp"
#include "coopsense/simulator.hpp"

using namespace coopsense;

TEST_CASE("noiseless single node crosses on a deterministic ramp")
{
    ScenarioConfig c;
    c.nodes = {{1.0, 1.0, 0.0}};
    c.local_threshold = 5.0;
    c.fusion_threshold = 1e6;
    c.max_horizon = 50;
    c.algorithm = Algorithm::SprtCsprt;
    const auto r = run_trial(c, {1, 0}, TrialOverrides{0.0});
    REQUIRE(r.local_crossing_times.size() == 1);
    CHECK(r.local_crossing_times[0] == 10);
    CHECK(r.truncated);
    CHECK(r.stop_time == 50);
}

TEST_CASE("estimate_metrics counting")
{
    std::vector<TrialResult> rs(1000);
    for (auto& r : rs) r.stop_time = 7, r.decision = r.truth = Hypothesis::H1;
    auto s = estimate_metrics(rs);
    CHECK(s.edd_mean == 7.0);
    CHECK(s.pfa_hat == 0.0);
    CHECK(s.edd_stderr == 0.0);
    rs[3].decision = Hypothesis::H0;
    s = estimate_metrics(rs);
    CHECK(s.pfa_hat == doctest::Approx(0.001));
    CHECK(s.pfa_ci95.first < 0.001);
    CHECK(s.pfa_ci95.second > 0.001);
    CHECK_THROWS_AS(estimate_metrics(std::vector<TrialResult>{}), UsageError);
    rs[4].truth = Hypothesis::H0;
    CHECK_THROWS_AS(estimate_metrics(rs), UsageError);
}

TEST_CASE("wilson interval basics")
{
    const auto ci = wilson_interval(10, 100);
    CHECK(ci.first < 0.1);
    CHECK(ci.second > 0.1);
    CHECK(wilson_interval(0, 50).first == 0.0);
    CHECK(wilson_interval(50, 50).second == doctest::Approx(1.0));
}

TEST_CASE("trial replay is deterministic")
{
    const auto cfg = scenarios::table1(Algorithm::DualCSPRT);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto a = run_trial(cfg, {9, t});
        const auto b = run_trial(cfg, {9, t});
        CHECK(a.stop_time == b.stop_time);
        CHECK(a.decision == b.decision);
        CHECK(a.local_crossing_times == b.local_crossing_times);
    }
}

TEST_CASE("parallel execution reproduces serial results for every worker count")
{
    for (Algorithm alg : kAllAlgorithms) {
        auto cfg = scenarios::table2(alg, Hypothesis::H1);
        cfg.fusion_threshold = 8.0;
        cfg.local_threshold = 1.0;
        if (cfg.glr) cfg.glr->cost = 0.2;
        const auto serial = run_trials(cfg, 400, 5, 1);
        for (unsigned w : {2u, 4u, 16u}) {
            const auto par = run_trials(cfg, 400, 5, w);
            REQUIRE(par.size() == serial.size());
            for (std::size_t i = 0; i < par.size(); ++i) {
                CHECK(par[i].stop_time == serial[i].stop_time);
                CHECK(par[i].decision == serial[i].decision);
            }
        }
    }
}

TEST_CASE("threshold sweep agrees with individual trials")
{
    for (Algorithm alg : kAllAlgorithms) {
        auto cfg = scenarios::table2(alg, Hypothesis::H0);
        cfg.local_threshold = 0.5;
        if (cfg.glr) cfg.glr->cost = 0.3;
        const std::vector<double> betas{0.5, 2.0, 4.0, 9.0, 20.0};
        const auto sweep = sweep_fusion_thresholds(cfg, betas, 300, 31, 3);
        for (std::size_t j = 0; j < betas.size(); ++j) {
            cfg.fusion_threshold = betas[j];
            MetricsAccumulator acc;
            for (const auto& r : run_trials(cfg, 300, 31)) acc.add(r);
            CHECK(acc.sum_n == sweep.metrics[j].sum_n);
            CHECK(acc.errors == sweep.metrics[j].errors);
            CHECK(acc.truncated == sweep.metrics[j].truncated);
        }
    }
    auto cfg = scenarios::table1(Algorithm::SprtCsprt);
    CHECK_THROWS_AS(sweep_fusion_thresholds(cfg, {3.0, 1.0}, 10, 1), UsageError);
    CHECK_THROWS_AS(sweep_fusion_thresholds(cfg, {1.0}, 0, 1), UsageError);
}

TEST_CASE("error rate does not increase with beta under common random numbers")
{
    auto cfg = scenarios::table4(15.0, 30.0);
    const std::vector<double> betas{26.0, 30.0};
    const auto sweep = sweep_fusion_thresholds(cfg, betas, 20'000, 8, 1);
    CHECK(sweep.metrics[1].errors <= sweep.metrics[0].errors);
}

TEST_CASE("simulation CSV is bit-identical across 1, 4 and 16 workers")
{
    std::vector<std::string> csv;
    for (unsigned w : {1u, 4u, 16u}) {
        std::vector<ResultRow> rows;
        for (Algorithm alg : {Algorithm::DualSPRT, Algorithm::SprtCsprt, Algorithm::GlrCsprt}) {
            auto cfg = scenarios::table3(alg, Hypothesis::H1);
            cfg.local_threshold = 0.5;
            cfg.fusion_threshold = 6.0;
            if (cfg.glr) cfg.glr->cost = 0.1;
            rows.push_back(simulation_row(cfg, simulate(cfg, 3000, 1234, w), 1234));
        }
        csv.push_back(emit_table(rows).csv);
    }
    CHECK(csv[0] == csv[1]);
    CHECK(csv[0] == csv[2]);
}

TEST_CASE("fading draws")
{
    RandomStream rng(77);
    std::vector<double> v;
    for (int i = 0; i < 200'000; ++i) {
        const auto d = draw_fading(FadingConfig{1.0, true}, 5, rng);
        v.insert(v.end(), d.begin(), d.end());
    }
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    CHECK(std::abs(v[v.size() / 2] - std::log(2.0)) / std::log(2.0) < 0.005);
    CHECK(exponential_median(FadingConfig{1.0, true}) == doctest::Approx(std::log(2.0)));

    double s = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) s += draw_fading(FadingConfig{2.0, true}, 1, rng)[0];
    CHECK(std::abs(s / n - 0.5) / 0.5 < 0.01);
    CHECK_THROWS_AS(draw_fading(FadingConfig{1.0, false}, 1, rng), UsageError);
}

TEST_CASE("fading is fixed within a trial and varies across trials")
{
    const auto cfg = scenarios::table3(Algorithm::GlrCsprt, Hypothesis::H1);
    NetworkPath a(cfg, {5, 0});
    const std::vector<double> first(a.post_change_means().begin(), a.post_change_means().end());
    for (int k = 0; k < 20; ++k) a.step();
    CHECK(std::equal(first.begin(), first.end(), a.post_change_means().begin()));
    NetworkPath b(cfg, {5, 1});
    CHECK_FALSE(std::equal(first.begin(), first.end(), b.post_change_means().begin()));
}

TEST_CASE("observation noise override scales node noise")
{
    auto cfg = scenarios::table4(15.0, 1e9);
    cfg.max_horizon = 200;
    const auto r = run_trial(cfg, {1, 0}, TrialOverrides{0.0});
    // Noise-free nodes with unit variance cross at 2*gamma/theta^2 slots.
    CHECK(r.local_crossing_times[0] == 30);
    CHECK(r.local_crossing_times[4] == 120);
}
