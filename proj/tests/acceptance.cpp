// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "coopsense/coopsense.hpp"

using namespace coopsense;

namespace {

struct Verdict {
    std::vector<CellCheck> checks;

    void add(CellCheck c) { checks.push_back(std::move(c)); }
    bool pass() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const CellCheck& c) { return c.pass; });
    }
    std::size_t passed() const
    {
        return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const CellCheck& c) { return c.pass; }));
    }
};

CellCheck check(int criterion, std::string label, double expected, double observed, bool pass, std::string detail = "")
{
    return {criterion, std::move(label), expected, observed, pass, std::move(detail)};
}

CellCheck relative_check(int criterion, std::string label, double expected, double observed, double tol)
{
    const double rel = std::abs(observed - expected) / std::abs(expected);
    char buf[64];
    std::snprintf(buf, sizeof buf, "tolerance %.1f%%", 100.0 * tol);
    return check(criterion, std::move(label), expected, observed, rel <= tol, buf);
}

// Criterion 6: closed-form pieces against Monte Carlo oracles.
void oracle_checks(Verdict& v, unsigned workers)
{
    {
        const IncrementLaw law{-0.5, 4.0};
        const double beta = 30.0;
        const double analytic = renewal_first_passage_mean(law, beta, beta / 1000);
        const std::int64_t paths = 20'000;
        std::vector<double> sums(workers, 0.0);
        parallel_trials(paths, workers, [&](std::int64_t i, unsigned w) {
            RandomStream rng(RandomnessContract{11, static_cast<std::uint64_t>(i)}, StreamRole::FusionNoise);
            double walk = 0.0;
            std::int64_t n = 0;
            while (walk < beta) {
                walk = std::max(0.0, walk + rng.normal(law.mean, 2.0));
                ++n;
            }
            sums[w] += static_cast<double>(n);
        });
        double total = 0.0;
        for (double s : sums) total += s;
        v.add(relative_check(6, "renewal L(0) vs reflected-walk Monte Carlo", total / paths, analytic, 0.03));
    }
    {
        const NodeParams node{1.0, 1.0, 0.0};
        const double gamma = 100.0;
        const std::int64_t trials = 100'000;
        std::vector<double> sums(workers, 0.0);
        parallel_trials(trials, workers, [&](std::int64_t i, unsigned w) {
            SprtState s;
            RandomStream rng(RandomnessContract{12, static_cast<std::uint64_t>(i)}, StreamRole::Node);
            while (s.crossed == Crossing::None) s = sprt_step(s, rng.normal(1.0, 1.0), node, gamma);
            sums[w] += static_cast<double>(*s.crossing_time);
        });
        double total = 0.0;
        for (double s : sums) total += s;
        v.add(relative_check(6, "Gaussian passage mean vs SPRT crossing, gamma=100", total / trials,
                             local_passage_law(node, gamma).mean, 0.03));
    }
    {
        const auto laws = local_passage_laws(scenarios::table4(15.0, 30.0));
        const auto analytic = order_stat_epoch_means(laws);
        const int draws = 1'000'000;
        std::vector<double> sums(laws.size(), 0.0), x(laws.size());
        RandomStream rng(13);
        for (int d = 0; d < draws; ++d) {
            for (std::size_t l = 0; l < laws.size(); ++l)
                x[l] = rng.normal(laws[l].mean, std::sqrt(laws[l].variance));
            std::sort(x.begin(), x.end());
            for (std::size_t l = 0; l < laws.size(); ++l) sums[l] += x[l];
        }
        for (std::size_t i = 0; i < laws.size(); ++i)
            v.add(relative_check(6, "order statistic E[t_" + std::to_string(i + 1) + "] vs Monte Carlo",
                                 sums[i] / draws, analytic[i], 0.01));
    }
    {
        const std::vector<LocalPassageLaw> two{{0.0, 1.0}, {0.0, 1.0}};
        v.add(relative_check(6, "E[min of two standard normals]", -0.5642, order_stat_epoch_means(two)[0], 0.005));
    }
}

// Criterion 7: structural invariants on random inputs.
void invariant_checks(Verdict& v)
{
    {
        bool ok = true;
        RandomStream rng(21);
        const Bias bias{0.3, -0.2};
        for (int p = 0; p < 10'000 && ok; ++p) {
            FusionState s;
            for (int k = 0; k < 200 && !s.stopped(); ++k) {
                s = fusion_csprt_apply(s, rng.normal(0.0, 3.0), 1e9, bias);
                ok = ok && s.pos_sum >= 0.0 && s.neg_sum <= 0.0;
            }
            CsprtPair c;
            for (int k = 0; k < 200; ++k) {
                c = csprt_apply_increment(c, rng.normal(0.0, 2.0), 1e9);
                ok = ok && c.upper >= 0.0 && c.lower <= 0.0;
            }
        }
        v.add(check(7, "clamp invariants F1 >= 0, F0 <= 0", 1, ok, ok, "10^4 random paths, fusion and node pairs"));
    }
    {
        bool ok = true;
        const QuantizerConfig q;
        for (double gamma : {0.5, 7.5, 15.0}) {
            double prev = quantize_sprt_output(-60.0, q, gamma);
            for (double w = -60.0; w <= 60.0; w += 0.01) {
                const double cur = quantize_sprt_output(w, q, gamma);
                ok = ok && cur >= prev;
                prev = cur;
            }
        }
        v.add(check(7, "quantizer monotonicity", 1, ok, ok, "W <= W' implies level(W) <= level(W')"));
    }
    {
        bool ok = true;
        double max_diff = 0.0;
        RandomStream rng(22);
        GlrConfig g;
        g.theta1 = 0.75;
        g.clamp_lo = 0.0;
        g.clamp_hi = 2.0;
        g.cost = 1e-6;
        const double var = 1.5;
        for (int p = 0; p < 1000; ++p) {
            GlrState s;
            std::vector<double> xs;
            const double mean = rng.normal(0.5, 3.0);
            for (int k = 0; k < 200; ++k) {
                const double x = rng.normal(mean, std::sqrt(var));
                xs.push_back(x);
                s = glr_step(s, x, g, var);
                ok = ok && s.theta_hat >= g.clamp_lo && s.theta_hat <= g.clamp_hi;
                if (k % 17 == 0 || k == 199) {
                    double n0 = 0.0, n1 = 0.0;
                    for (double xi : xs) {
                        n0 += ((xi - g.theta0) * (xi - g.theta0) - (xi - s.theta_hat) * (xi - s.theta_hat)) / (2.0 * var);
                        n1 += ((xi - g.theta1) * (xi - g.theta1) - (xi - s.theta_hat) * (xi - s.theta_hat)) / (2.0 * var);
                    }
                    max_diff = std::max(max_diff, std::abs(std::max(n0, n1) - s.statistic));
                }
            }
        }
        v.add(check(7, "GLR theta-hat stays inside [a1, a2]", 1, ok, ok, "10^3 random paths"));
        v.add(check(7, "GLR closed form vs naive sum, max abs diff", 1e-9, max_diff, max_diff < 1e-9));
    }
    {
        const auto cfg = scenarios::table1(Algorithm::SprtCsprt);
        std::vector<std::string> csv;
        for (unsigned w : {1u, 4u, 16u})
            csv.push_back(emit_table({simulation_row(cfg, simulate(cfg, 3000, 99, w), 99)}).csv);
        const bool same = csv[0] == csv[1] && csv[0] == csv[2];
        v.add(check(7, "bit-identical CSV under 1, 4 and 16 workers", 1, same, same));
    }
}

const char* kTitles[] = {
    "",
    "Table I reproduction",
    "Table IV simulation and analysis",
    "analysis vs simulation gap",
    "Table I ordering",
    "GLR orderings (Tables II and III)",
    "oracle equivalences",
    "invariant suites",
};

} // namespace

int main()
{
    const unsigned workers = default_workers();
    std::map<int, Verdict> verdicts;
    const auto t0 = std::chrono::steady_clock::now();

    for (int table = 1; table <= 4; ++table) {
        TableBudget tb;
        tb.workers = workers;
        const auto started = std::chrono::steady_clock::now();
        const auto report = reproduce_table(table, tb);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::printf("%s  (%.1f s)\n\n", report.render().c_str(), secs);
        for (const auto& c : report.checks)
            if (c.criterion > 0) verdicts[c.criterion].add(c);
    }
    oracle_checks(verdicts[6], workers);
    invariant_checks(verdicts[7]);

    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance summary (%.1f s)\n", total);
    bool all = true;
    for (int k = 1; k <= 7; ++k) {
        const auto& v = verdicts[k];
        const bool ok = !v.checks.empty() && v.pass();
        all = all && ok;
        std::printf("criterion %d: %s  %s (%zu/%zu checks)\n", k, ok ? "PASS" : "FAIL", kTitles[k], v.passed(),
                    v.checks.size());
        for (const auto& c : v.checks)
            if (!c.pass)
                std::printf("    failed: %s expected %.6g observed %.6g %s\n", c.label.c_str(), c.expected, c.observed,
                            c.detail.c_str());
    }
    return all ? 0 : 1;
}
