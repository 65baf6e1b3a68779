#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

#include "coopsense/model.hpp"

namespace coopsense {

enum class Crossing { None, Upper, Lower };

/// Running SPRT statistic W_k of one node. The statistic keeps evolving after the first
/// crossing; `crossed` and `crossing_time` record only the first one.
struct SprtState {
    double statistic = 0.0;
    std::int64_t time = 0;
    Crossing crossed = Crossing::None;
    std::optional<std::int64_t> crossing_time;
};

inline SprtState sprt_apply_increment(SprtState s, double llr, double gamma) noexcept
{
    s.statistic += llr;
    s.time += 1;
    if (s.crossed == Crossing::None) {
        if (s.statistic >= gamma) {
            s.crossed = Crossing::Upper;
            s.crossing_time = s.time;
        } else if (s.statistic <= -gamma) {
            s.crossed = Crossing::Lower;
            s.crossing_time = s.time;
        }
    }
    return s;
}

inline SprtState sprt_step(const SprtState& s, double x, const NodeParams& node, double gamma)
{
    return sprt_apply_increment(s, gaussian_llr(x, node.post_change_mean, node.noise_std * node.noise_std), gamma);
}

/// Four-level output for a statistic past +-gamma; 0 while inside (-gamma, gamma).
/// Buckets are [gamma + 2(j-1)*delta, gamma + 2j*delta), the last one unbounded.
inline double quantize_sprt_output(double w, const QuantizerConfig& q, double gamma) noexcept
{
    if (w >= gamma) {
        for (int j = 1; j <= 3; ++j)
            if (w < gamma + 2.0 * j * q.delta_up) return q.upper_levels[j - 1];
        return q.upper_levels[3];
    }
    if (w <= -gamma) {
        for (int j = 1; j <= 3; ++j)
            if (w > -gamma - 2.0 * j * q.delta_down) return q.lower_levels[j - 1];
        return q.lower_levels[3];
    }
    return 0.0;
}

inline double quantize_sprt_output(const SprtState& s, const QuantizerConfig& q, double gamma) noexcept
{
    return quantize_sprt_output(s.statistic, q, gamma);
}

/// Binary DualSPRT output: +level above gamma, -level below -gamma.
inline double binary_sprt_output(double w, double level, double gamma) noexcept
{
    if (w >= gamma) return level;
    if (w <= -gamma) return -level;
    return 0.0;
}

/// Clamped statistic pair run at a node under DualCSPRT: upper >= 0, lower <= 0.
struct CsprtPair {
    double upper = 0.0;
    double lower = 0.0;
    std::int64_t time = 0;
    Crossing crossed = Crossing::None;
    std::optional<std::int64_t> crossing_time;
};

inline CsprtPair csprt_apply_increment(CsprtPair p, double llr, double gamma) noexcept
{
    p.upper = std::max(0.0, p.upper + llr);
    p.lower = std::min(0.0, p.lower + llr);
    p.time += 1;
    if (p.crossed == Crossing::None) {
        if (p.upper >= gamma) {
            p.crossed = Crossing::Upper;
            p.crossing_time = p.time;
        } else if (p.lower <= -gamma) {
            p.crossed = Crossing::Lower;
            p.crossing_time = p.time;
        }
    }
    return p;
}

inline CsprtPair csprt_local_step(const CsprtPair& p, double x, const NodeParams& node, double gamma)
{
    return csprt_apply_increment(p, gaussian_llr(x, node.post_change_mean, node.noise_std * node.noise_std), gamma);
}

/// Quantized output of a clamped pair. If both sides are past threshold, the larger overshoot wins.
inline double quantize_csprt_output(const CsprtPair& p, const QuantizerConfig& q, double gamma) noexcept
{
    const bool up = p.upper >= gamma;
    const bool down = p.lower <= -gamma;
    if (up && down) {
        return (p.upper - gamma) >= (-gamma - p.lower) ? quantize_sprt_output(p.upper, q, gamma)
                                                        : quantize_sprt_output(p.lower, q, gamma);
    }
    if (up) return quantize_sprt_output(p.upper, q, gamma);
    if (down) return quantize_sprt_output(p.lower, q, gamma);
    return 0.0;
}

// ---------------------------------------------------------------------------
// GLR test for an unknown post-change mean

/// g(t). Throws std::domain_error for t <= 0.
inline double glr_boundary(double t, const GlrBoundary& b = {})
{
    if (!(t > 0.0)) throw std::domain_error("glr_boundary: t must be > 0");
    double g = std::log(1.0 / t);
    const auto& c = b.correction;
    if (!c.empty()) {
        if (t <= c.front().first) {
            g += c.front().second;
        } else if (t >= c.back().first) {
            g += c.back().second;
        } else {
            auto hi = std::upper_bound(c.begin(), c.end(), t,
                                       [](double v, const auto& e) { return v < e.first; });
            auto lo = hi - 1;
            const double w = (std::log(t) - std::log(lo->first)) / (std::log(hi->first) - std::log(lo->first));
            g += lo->second + w * (hi->second - lo->second);
        }
    }
    return g;
}

struct GlrState {
    std::int64_t time = 0;
    double running_sum = 0.0;
    double statistic = 0.0;
    bool stopped = false;
    double theta_hat = 0.0;
    std::optional<std::int64_t> stop_time;
};

/// Gaussian closed form of sum_k log f_a(X_k)/f_b(X_k) given n and S_n.
inline double gaussian_glr_sum(std::int64_t n, double sum, double a, double b, double sigma_sq) noexcept
{
    const double nn = static_cast<double>(n);
    return nn * (a - b) * (sum / nn - 0.5 * (a + b)) / sigma_sq;
}

/// Adds one observation. Stopping is sticky: after the first boundary crossing the statistic
/// keeps updating so the node can keep re-quantizing, and `stop_time` stays fixed.
inline GlrState glr_step(GlrState s, double x, const GlrConfig& cfg, double sigma_sq)
{
    s.time += 1;
    s.running_sum += x;
    const double mean = s.running_sum / static_cast<double>(s.time);
    s.theta_hat = std::max(cfg.clamp_lo, std::min(mean, cfg.clamp_hi));
    const double vs0 = gaussian_glr_sum(s.time, s.running_sum, s.theta_hat, cfg.theta0, sigma_sq);
    const double vs1 = gaussian_glr_sum(s.time, s.running_sum, s.theta_hat, cfg.theta1, sigma_sq);
    s.statistic = std::max(vs0, vs1);
    if (!s.stopped && s.statistic >= glr_boundary(cfg.cost * static_cast<double>(s.time), cfg.boundary)) {
        s.stopped = true;
        s.stop_time = s.time;
    }
    return s;
}

/// Mean at which the KL numbers to theta0 and theta1 coincide (midpoint for equal-variance Gaussians).
inline double glr_indifference_mean(const GlrConfig& cfg) noexcept { return 0.5 * (cfg.theta0 + cfg.theta1); }

inline Hypothesis glr_decide(const GlrState& s, const GlrConfig& cfg)
{
    if (!s.stopped) throw UsageError("glr_decide: the test has not stopped");
    return s.theta_hat >= glr_indifference_mean(cfg) ? Hypothesis::H1 : Hypothesis::H0;
}

/// Band index 0..4 of statistic w at slot k: 0 below g(kc), then [g(kc), g(3Δkc)), [g(3Δkc), g(2Δkc)),
/// [g(2Δkc), g(Δkc)), [g(Δkc), inf). Empty bands (Δ = 1/3) resolve ties to the lower index.
inline int glr_band(double w, std::int64_t k, const GlrConfig& cfg)
{
    const double kc = static_cast<double>(k) * cfg.cost;
    auto edge = [&](double t) {
        return t > 0.0 ? glr_boundary(t, cfg.boundary) : std::numeric_limits<double>::infinity();
    };
    const double edges[4] = {edge(kc), edge(3.0 * cfg.delta * kc), edge(2.0 * cfg.delta * kc), edge(cfg.delta * kc)};
    if (w < edges[0]) return 0;
    for (int j = 1; j <= 3; ++j) {
        if (w < edges[j]) return j;
        if (w == edges[j] && edges[j] == edges[j - 1]) return j;
    }
    return 4;
}

/// Emitted level at slot k for a node whose current decision direction is `direction`.
inline double glr_quantize(double w, std::int64_t k, Hypothesis direction, const GlrConfig& cfg,
                           const QuantizerConfig& q)
{
    const int band = glr_band(w, k, cfg);
    if (band == 0) return 0.0;
    return direction == Hypothesis::H1 ? q.upper_levels[band - 1] : q.lower_levels[band - 1];
}

inline double glr_quantize(const GlrState& s, const GlrConfig& cfg, const QuantizerConfig& q)
{
    return glr_quantize(s.statistic, s.time, glr_decide(s, cfg), cfg, q);
}

} // namespace coopsense
