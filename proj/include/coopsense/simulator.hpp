#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "coopsense/fusion.hpp"
#include "coopsense/local_detectors.hpp"
#include "coopsense/model.hpp"

namespace coopsense {

/// Test hooks that change the physics of a trial without touching the scenario.
struct TrialOverrides {
    double observation_noise_scale = 1.0; ///< multiplies every node's observation noise
};

struct TrialResult {
    std::int64_t stop_time = 0;
    Hypothesis decision = Hypothesis::H0;
    Hypothesis truth = Hypothesis::H1;
    bool truncated = false;
    bool simultaneous_crossing = false;
    std::vector<std::optional<std::int64_t>> local_crossing_times;
};

/// Per-node post-change means for one trial under slow fading: i.i.d. Exp(rate), fixed for the trial.
inline std::vector<double> draw_fading(const FadingConfig& fading, std::size_t node_count, RandomStream& rng)
{
    if (!fading.per_trial) throw UsageError("draw_fading: only per-trial (slow) fading is supported");
    std::vector<double> out(node_count);
    for (auto& v : out) v = rng.exponential(fading.rate);
    return out;
}

inline double exponential_median(const FadingConfig& fading) noexcept { return std::log(2.0) / fading.rate; }

/// Advances the whole sensing network one slot at a time and reports what the fusion center
/// receives. Independent of the fusion thresholds, so one path can be scored against many of them.
class NetworkPath {
public:
    NetworkPath(const ScenarioConfig& cfg, const RandomnessContract& rc, const TrialOverrides& ov = {})
        : cfg_(cfg), noise_scale_(ov.observation_noise_scale), fusion_rng_(rc, StreamRole::FusionNoise),
          fusion_std_(std::sqrt(cfg.fusion.noise_variance))
    {
        const std::size_t n = cfg.nodes.size();
        node_rng_.reserve(n);
        for (std::size_t l = 0; l < n; ++l) node_rng_.emplace_back(rc, StreamRole::Node, l);
        mean_.resize(n);
        for (std::size_t l = 0; l < n; ++l) mean_[l] = cfg.nodes[l].post_change_mean;
        if (cfg.fading) {
            RandomStream fr(rc, StreamRole::Fading);
            mean_ = draw_fading(*cfg.fading, n, fr);
        }
        switch (cfg.algorithm) {
        case Algorithm::DualSPRT:
        case Algorithm::SprtCsprt: sprt_.assign(n, {}); break;
        case Algorithm::DualCSPRT: csprt_.assign(n, {}); break;
        case Algorithm::GlrSprt:
        case Algorithm::GlrCsprt: glr_.assign(n, {}); break;
        }
    }

    /// Y_k of the next slot.
    double step()
    {
        ++time_;
        const Hypothesis truth = cfg_.true_hypothesis;
        const double gamma = cfg_.local_threshold;
        double sum = 0.0;
        for (std::size_t l = 0; l < cfg_.nodes.size(); ++l) {
            const NodeParams& node = cfg_.nodes[l];
            const double mean = truth == Hypothesis::H1 ? mean_[l] : 0.0;
            const double x = mean + noise_scale_ * node.noise_std * node_rng_[l].standard_normal();
            const double var = node.noise_std * node.noise_std;
            switch (cfg_.algorithm) {
            case Algorithm::DualSPRT:
                sprt_[l] = sprt_apply_increment(sprt_[l], gaussian_llr(x, node.post_change_mean, var), gamma);
                sum += binary_sprt_output(sprt_[l].statistic, cfg_.binary_level, gamma);
                break;
            case Algorithm::SprtCsprt:
                sprt_[l] = sprt_apply_increment(sprt_[l], gaussian_llr(x, node.post_change_mean, var), gamma);
                sum += quantize_sprt_output(sprt_[l].statistic, cfg_.quantizer, gamma);
                break;
            case Algorithm::DualCSPRT:
                csprt_[l] = csprt_apply_increment(csprt_[l], gaussian_llr(x, node.post_change_mean, var), gamma);
                sum += quantize_csprt_output(csprt_[l], cfg_.quantizer, gamma);
                break;
            case Algorithm::GlrSprt:
            case Algorithm::GlrCsprt: {
                const GlrConfig& g = *cfg_.glr;
                glr_[l] = glr_step(glr_[l], x, g, var);
                if (glr_[l].stopped) {
                    const Hypothesis dir = glr_decide(glr_[l], g);
                    if (cfg_.algorithm == Algorithm::GlrCsprt) {
                        sum += glr_quantize(glr_[l].statistic, time_, dir, g, cfg_.quantizer);
                    } else if (glr_band(glr_[l].statistic, time_, g) > 0) {
                        sum += dir == Hypothesis::H1 ? cfg_.binary_level : -cfg_.binary_level;
                    }
                }
                break;
            }
            }
        }
        return sum + fusion_std_ * fusion_rng_.standard_normal();
    }

    std::int64_t time() const noexcept { return time_; }
    std::span<const double> post_change_means() const noexcept { return mean_; }

    std::vector<std::optional<std::int64_t>> local_crossing_times() const
    {
        std::vector<std::optional<std::int64_t>> out;
        for (const auto& s : sprt_) out.push_back(s.crossing_time);
        for (const auto& s : csprt_) out.push_back(s.crossing_time);
        for (const auto& s : glr_) out.push_back(s.stop_time);
        return out;
    }

private:
    const ScenarioConfig& cfg_;
    double noise_scale_;
    std::vector<RandomStream> node_rng_;
    RandomStream fusion_rng_;
    double fusion_std_;
    std::vector<double> mean_;
    std::vector<SprtState> sprt_;
    std::vector<CsprtPair> csprt_;
    std::vector<GlrState> glr_;
    std::int64_t time_ = 0;
};

/// Runs one trial to the fusion decision or to max_horizon.
inline TrialResult run_trial(const ScenarioConfig& cfg, const RandomnessContract& rc, const TrialOverrides& ov = {})
{
    NetworkPath path(cfg, rc, ov);
    FusionState fs;
    const bool csprt = uses_csprt_fusion(cfg.algorithm);
    while (!fs.stopped() && fs.time < cfg.max_horizon) {
        const double y = path.step();
        fs = csprt ? fusion_csprt_step(fs, y, cfg.fusion, cfg.fusion_threshold, cfg.bias)
                   : fusion_sprt_step(fs, y, cfg.fusion, cfg.fusion_threshold);
    }
    TrialResult r;
    r.truth = cfg.true_hypothesis;
    r.local_crossing_times = path.local_crossing_times();
    if (fs.stopped()) {
        r.stop_time = *fs.stop_time;
        r.decision = *fs.decision;
        r.simultaneous_crossing = fs.simultaneous_crossing;
    } else {
        r.stop_time = cfg.max_horizon;
        r.decision = forced_decision(fs, csprt);
        r.truncated = true;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Metrics

struct MonteCarloSummary {
    std::int64_t trials = 0;
    double edd_mean = 0.0;
    double edd_stderr = 0.0;
    double pfa_hat = 0.0;
    std::pair<double, double> pfa_ci95{0.0, 1.0};
    std::int64_t truncated_count = 0;
    std::int64_t simultaneous_count = 0;
};

inline std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t n, double z = 1.959963984540054)
{
    if (n <= 0) throw UsageError("wilson_interval: n must be positive");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    if (successes == 0) return {0.0, std::min(1.0, centre + half)};
    if (successes == n) return {std::max(0.0, centre - half), 1.0};
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Integer tallies, so merging per-worker accumulators is exact and order-free.
struct MetricsAccumulator {
    std::int64_t trials = 0;
    std::int64_t errors = 0;
    std::int64_t sum_n = 0;
    std::int64_t sum_n2 = 0;
    std::int64_t truncated = 0;
    std::int64_t simultaneous = 0;

    void add(std::int64_t stop_time, bool error, bool was_truncated, bool was_simultaneous) noexcept
    {
        ++trials;
        errors += error ? 1 : 0;
        sum_n += stop_time;
        sum_n2 += stop_time * stop_time;
        truncated += was_truncated ? 1 : 0;
        simultaneous += was_simultaneous ? 1 : 0;
    }

    void add(const TrialResult& r) noexcept
    {
        add(r.stop_time, r.decision != r.truth, r.truncated, r.simultaneous_crossing);
    }

    MetricsAccumulator& merge(const MetricsAccumulator& o) noexcept
    {
        trials += o.trials;
        errors += o.errors;
        sum_n += o.sum_n;
        sum_n2 += o.sum_n2;
        truncated += o.truncated;
        simultaneous += o.simultaneous;
        return *this;
    }

    MonteCarloSummary summary() const
    {
        if (trials <= 0) throw UsageError("no trials to summarize");
        MonteCarloSummary s;
        const double n = static_cast<double>(trials);
        s.trials = trials;
        s.edd_mean = static_cast<double>(sum_n) / n;
        const double var = trials > 1 ? (static_cast<double>(sum_n2) - n * s.edd_mean * s.edd_mean) / (n - 1.0) : 0.0;
        s.edd_stderr = std::sqrt(std::max(0.0, var) / n);
        s.pfa_hat = static_cast<double>(errors) / n;
        s.pfa_ci95 = wilson_interval(errors, trials);
        s.truncated_count = truncated;
        s.simultaneous_count = simultaneous;
        return s;
    }
};

/// Summary of trials that share one true hypothesis. E_DD averages every trial's stop time,
/// wrong decisions included; truncated trials count at max_horizon.
inline MonteCarloSummary estimate_metrics(std::span<const TrialResult> results)
{
    if (results.empty()) throw UsageError("estimate_metrics: no trials");
    MetricsAccumulator acc;
    for (const auto& r : results) {
        if (r.truth != results.front().truth)
            throw UsageError("estimate_metrics: trials mix true hypotheses; summarize each separately");
        acc.add(r);
    }
    return acc.summary();
}

// ---------------------------------------------------------------------------
// Parallel execution

inline unsigned default_workers() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

/// Calls fn(trial_index, worker) for trial_index in [0, n). Trial i always goes to worker i % workers,
/// but results must not depend on that: every trial seeds itself from its own index.
template <class Fn>
void parallel_trials(std::int64_t n, unsigned workers, Fn&& fn)
{
    workers = std::max(1u, workers);
    if (workers == 1 || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) fn(i, 0u);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::int64_t i = w; i < n; i += workers) fn(i, w);
        });
}

inline std::vector<TrialResult> run_trials(const ScenarioConfig& cfg, std::int64_t trials, std::uint64_t seed,
                                           unsigned workers = 1)
{
    std::vector<TrialResult> out(static_cast<std::size_t>(std::max<std::int64_t>(trials, 0)));
    parallel_trials(trials, workers, [&](std::int64_t i, unsigned) {
        out[static_cast<std::size_t>(i)] = run_trial(cfg, {seed, static_cast<std::uint64_t>(i)});
    });
    return out;
}

/// Summary without keeping per-trial results.
inline MonteCarloSummary simulate(const ScenarioConfig& cfg, std::int64_t trials, std::uint64_t seed,
                                  unsigned workers = 1)
{
    if (trials < 1) throw UsageError("simulate: trials must be >= 1");
    std::vector<MetricsAccumulator> parts(std::max(1u, workers));
    parallel_trials(trials, workers, [&](std::int64_t i, unsigned w) {
        parts[w].add(run_trial(cfg, {seed, static_cast<std::uint64_t>(i)}));
    });
    MetricsAccumulator total;
    for (const auto& p : parts) total.merge(p);
    return total.summary();
}

// ---------------------------------------------------------------------------
// Threshold sweep: the network path does not depend on beta, so one simulated path scores
// every candidate fusion threshold at once (common random numbers by construction).

struct SweepOutcome {
    std::vector<double> betas;
    std::vector<MetricsAccumulator> metrics; ///< one per beta
};

inline void sweep_trial(const ScenarioConfig& cfg, const RandomnessContract& rc, std::span<const double> betas,
                        std::span<MetricsAccumulator> out)
{
    NetworkPath path(cfg, rc);
    const bool csprt = uses_csprt_fusion(cfg.algorithm);
    const Hypothesis truth = cfg.true_hypothesis;
    double f = 0.0, fpos = 0.0, fneg = 0.0;
    std::size_t next = 0;
    std::int64_t k = 0;
    while (next < betas.size() && k < cfg.max_horizon) {
        const double s = fusion_llr_increment(path.step(), cfg.fusion);
        ++k;
        if (csprt) {
            fpos = std::max(0.0, fpos + s + cfg.bias.d1);
            fneg = std::min(0.0, fneg + s + cfg.bias.d0);
            while (next < betas.size() && (fpos >= betas[next] || fneg <= -betas[next])) {
                const double b = betas[next];
                const bool up = fpos >= b, down = fneg <= -b;
                Hypothesis d = up ? Hypothesis::H1 : Hypothesis::H0;
                if (up && down) d = (fpos - b) >= (-b - fneg) ? Hypothesis::H1 : Hypothesis::H0;
                out[next].add(k, d != truth, false, up && down);
                ++next;
            }
        } else {
            f += s;
            while (next < betas.size() && (f >= betas[next] || f <= -betas[next])) {
                const Hypothesis d = f >= betas[next] ? Hypothesis::H1 : Hypothesis::H0;
                out[next].add(k, d != truth, false, false);
                ++next;
            }
        }
    }
    for (; next < betas.size(); ++next) {
        FusionState fs;
        fs.sprt_sum = f;
        fs.pos_sum = fpos;
        fs.neg_sum = fneg;
        out[next].add(cfg.max_horizon, forced_decision(fs, csprt) != truth, true, false);
    }
}

/// Scores `trials` paths against every beta in `betas` (sorted ascending, positive).
inline SweepOutcome sweep_fusion_thresholds(const ScenarioConfig& cfg, std::vector<double> betas,
                                            std::int64_t trials, std::uint64_t seed, unsigned workers = 1)
{
    if (trials < 1) throw UsageError("sweep: trials must be >= 1");
    if (betas.empty()) throw UsageError("sweep: no thresholds");
    if (!std::is_sorted(betas.begin(), betas.end()) || !(betas.front() > 0.0))
        throw UsageError("sweep: thresholds must be positive and ascending");
    workers = std::max(1u, workers);
    std::vector<std::vector<MetricsAccumulator>> parts(workers, std::vector<MetricsAccumulator>(betas.size()));
    parallel_trials(trials, workers, [&](std::int64_t i, unsigned w) {
        sweep_trial(cfg, {seed, static_cast<std::uint64_t>(i)}, betas, parts[w]);
    });
    SweepOutcome out{std::move(betas), std::vector<MetricsAccumulator>(parts.front().size())};
    for (const auto& p : parts)
        for (std::size_t j = 0; j < p.size(); ++j) out.metrics[j].merge(p[j]);
    return out;
}

} // namespace coopsense
