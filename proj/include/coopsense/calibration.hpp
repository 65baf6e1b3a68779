#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "coopsense/simulator.hpp"

namespace coopsense {

/// Which error rate the calibration targets.
enum class ErrorPooling {
    TrueHypothesis, ///< P(wrong | cfg.true_hypothesis)
    MeanOfBoth,     ///< average of P(wrong | H0) and P(wrong | H1)
};

inline std::vector<double> geometric_grid(double lo, double hi, std::size_t points)
{
    if (!(lo > 0.0) || !(hi > lo) || points < 2) throw UsageError("geometric_grid: need 0 < lo < hi and >= 2 points");
    std::vector<double> g(points);
    const double r = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(r * static_cast<double>(i));
    g.back() = hi;
    return g;
}

struct CalibrationBudget {
    std::vector<double> local_candidates;   ///< gamma values, or GLR costs c for GLR algorithms
    double beta_lo = 0.05;
    double beta_hi = 200.0;
    std::size_t coarse_points = 120;
    std::size_t fine_points = 160;
    std::int64_t coarse_trials = 10'000;
    std::int64_t trials = 100'000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    ErrorPooling pooling = ErrorPooling::TrueHypothesis;
};

/// Metrics of one (local, beta) operating point.
struct OperatingPoint {
    double local = 0.0;
    double beta = 0.0;
    double pfa = 0.0;                 ///< pooled per the budget
    std::pair<double, double> pfa_ci95{0.0, 1.0};
    double objective_edd = 0.0;       ///< E_DD under the truth, or mean over both hypotheses
    std::optional<MonteCarloSummary> h1;
    std::optional<MonteCarloSummary> h0;
};

struct CalibrationResult {
    bool success = false;
    OperatingPoint best;                   ///< valid only when success
    std::optional<OperatingPoint> nearest; ///< closest achieved error rate, for failure reports
    std::vector<OperatingPoint> candidates;
    std::string message;
};

inline ScenarioConfig with_local(ScenarioConfig cfg, double local)
{
    if (is_glr(cfg.algorithm)) {
        if (!cfg.glr) throw ConfigError("GLR algorithm without glr section");
        cfg.glr->cost = local;
    } else {
        cfg.local_threshold = local;
    }
    return cfg;
}

inline double local_parameter(const ScenarioConfig& cfg) { return is_glr(cfg.algorithm) ? cfg.glr->cost : cfg.local_threshold; }

namespace detail {

struct SweepPair {
    std::optional<SweepOutcome> h1;
    std::optional<SweepOutcome> h0;
};

inline SweepPair sweep_pooled(ScenarioConfig cfg, const std::vector<double>& betas, std::int64_t trials,
                              const CalibrationBudget& b)
{
    SweepPair out;
    auto run = [&](Hypothesis h, std::uint64_t salt) {
        cfg.true_hypothesis = h;
        return sweep_fusion_thresholds(cfg, betas, trials, mix64(b.seed ^ salt), b.workers);
    };
    // Distinct but fixed seeds per hypothesis; every beta and every candidate sees the same paths.
    const bool both = b.pooling == ErrorPooling::MeanOfBoth;
    if (both || cfg.true_hypothesis == Hypothesis::H1) out.h1 = run(Hypothesis::H1, 0x4831);
    if (both || cfg.true_hypothesis == Hypothesis::H0) out.h0 = run(Hypothesis::H0, 0x4830);
    return out;
}

inline OperatingPoint point_at(const SweepPair& s, std::size_t j, double local)
{
    OperatingPoint p;
    p.local = local;
    MetricsAccumulator err;
    if (s.h1) {
        p.h1 = s.h1->metrics[j].summary();
        p.beta = s.h1->betas[j];
        err.merge(s.h1->metrics[j]);
    }
    if (s.h0) {
        p.h0 = s.h0->metrics[j].summary();
        p.beta = s.h0->betas[j];
        err.merge(s.h0->metrics[j]);
    }
    // Both hypotheses run the same number of trials, so the merged tally is the mean of the two rates.
    const auto pooled = err.summary();
    p.pfa = pooled.pfa_hat;
    p.pfa_ci95 = pooled.pfa_ci95;
    p.objective_edd = p.h1 && p.h0 ? 0.5 * (p.h1->edd_mean + p.h0->edd_mean) : (p.h1 ? p.h1 : p.h0)->edd_mean;
    return p;
}

/// Index of the smallest beta whose error rate is at or below target, if any.
inline std::optional<std::size_t> first_below(const SweepPair& s, std::size_t count, double target, double local)
{
    for (std::size_t j = 0; j < count; ++j)
        if (point_at(s, j, local).pfa <= target) return j;
    return std::nullopt;
}

/// Thresholds whose coarse error rate is confidently above (lo) and confidently below (hi) the target.
inline std::pair<double, double> robust_bracket(const SweepPair& s, const std::vector<double>& grid, double target,
                                                double local)
{
    double lo = grid.front() * 0.5, hi = grid.back();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto p = point_at(s, j, local);
        if (p.pfa_ci95.first > target) lo = grid[j];
        if (p.pfa_ci95.second < target) {
            hi = grid[j];
            break;
        }
    }
    return {lo, std::max(hi, lo * 1.01)};
}

} // namespace detail

/// Full-budget search for the smallest beta meeting the target within [lo, hi]. Every sweep reuses the
/// same paths, so the error rate is one fixed step function of beta and nested refinement is exact.
inline std::optional<OperatingPoint> refine_beta(const ScenarioConfig& c, double target, double lo, double hi,
                                                 const CalibrationBudget& b)
{
    const double local = local_parameter(c);
    for (int widen = 0; widen < 8; ++widen) {
        const auto grid = geometric_grid(lo, hi, b.fine_points);
        const auto sw = detail::sweep_pooled(c, grid, b.trials, b);
        const auto hit = detail::first_below(sw, grid.size(), target, local);
        if (!hit) {
            if (hi >= b.beta_hi) return std::nullopt;
            lo = hi;
            hi = std::min(hi * 2.0, b.beta_hi);
            continue;
        }
        if (*hit == 0 && lo > b.beta_lo * 0.1) {
            hi = lo * 1.01;
            lo *= 0.5;
            continue;
        }
        auto p = detail::point_at(sw, *hit, local);
        double a = *hit > 0 ? grid[*hit - 1] : lo, z = grid[*hit];
        for (int depth = 0; depth < 3; ++depth) {
            if (target >= p.pfa_ci95.first && target <= p.pfa_ci95.second) break;
            const auto inner = geometric_grid(a, z, b.fine_points);
            const auto isw = detail::sweep_pooled(c, inner, b.trials, b);
            const auto ihit = detail::first_below(isw, inner.size(), target, local);
            if (!ihit || *ihit == 0) break;
            p = detail::point_at(isw, *ihit, local);
            a = inner[*ihit - 1];
            z = inner[*ihit];
        }
        return p;
    }
    return std::nullopt;
}

/// Calibrates several targets at once. For each local candidate a coarse beta sweep (shared by all
/// targets) brackets each target error rate, then refine_beta picks the smallest beta meeting it. Among candidates whose Wilson interval contains the
/// target, the one with the smallest E_DD wins.
inline std::vector<CalibrationResult> calibrate_targets(const ScenarioConfig& cfg, const std::vector<double>& targets,
                                                        const CalibrationBudget& b)
{
    for (double t : targets)
        if (!(t > 0.0 && t <= 0.5)) throw UsageError("calibrate: target P_FA must lie in (0, 0.5]");
    if (b.local_candidates.empty()) throw UsageError("calibrate: no local threshold candidates");
    if (b.trials < 1 || b.coarse_trials < 1) throw UsageError("calibrate: trial budgets must be >= 1");
    validate(cfg);
    const auto coarse = geometric_grid(b.beta_lo, b.beta_hi, b.coarse_points);
    std::vector<CalibrationResult> res(targets.size());
    std::vector<double> nearest_gap(targets.size(), std::numeric_limits<double>::infinity());
    auto consider_nearest = [&](std::size_t t, const OperatingPoint& p) {
        const double gap = std::abs(p.pfa - targets[t]);
        if (gap < nearest_gap[t]) {
            nearest_gap[t] = gap;
            res[t].nearest = p;
        }
    };

    for (double local : b.local_candidates) {
        const ScenarioConfig c = with_local(cfg, local);
        const auto cs = detail::sweep_pooled(c, coarse, b.coarse_trials, b);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            for (std::size_t j = 0; j < coarse.size(); ++j) consider_nearest(t, detail::point_at(cs, j, local));
            if (!detail::first_below(cs, coarse.size(), targets[t], local)) continue;
            const auto [lo, hi] = detail::robust_bracket(cs, coarse, targets[t], local);
            const auto p = refine_beta(c, targets[t], lo, hi, b);
            if (!p) continue;
            consider_nearest(t, *p);
            if (p->pfa <= targets[t] && targets[t] >= p->pfa_ci95.first && targets[t] <= p->pfa_ci95.second)
                res[t].candidates.push_back(*p);
        }
    }
    for (auto& r : res) {
        if (r.candidates.empty()) {
            r.message = "no candidate reached the target error rate within the budget";
            continue;
        }
        r.best = *std::min_element(r.candidates.begin(), r.candidates.end(),
                                   [](const auto& a, const auto& z) { return a.objective_edd < z.objective_edd; });
        r.success = true;
    }
    return res;
}

inline CalibrationResult calibrate_thresholds(const ScenarioConfig& cfg, double target_pfa, const CalibrationBudget& b)
{
    return calibrate_targets(cfg, {target_pfa}, b).front();
}

} // namespace coopsense
