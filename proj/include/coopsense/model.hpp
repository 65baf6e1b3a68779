#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coopsense/errors.hpp"
#include "coopsense/random.hpp"

namespace coopsense {

enum class Hypothesis { H0, H1 };

inline std::string_view to_string(Hypothesis h) noexcept { return h == Hypothesis::H1 ? "H1" : "H0"; }

inline Hypothesis parse_hypothesis(std::string_view s)
{
    if (s == "H0") return Hypothesis::H0;
    if (s == "H1") return Hypothesis::H1;
    throw ConfigError("unknown hypothesis '" + std::string(s) + "' (expected H0 or H1)");
}

/// Local observation statistics of one sensing node.
struct NodeParams {
    double post_change_mean = 1.0; ///< mean of X under H1; also the mean the local LLR is designed for
    double noise_std = 1.0;
    double channel_gain_db = 0.0; ///< informational only
};

enum class DriftConvention {
    PaperLiteral, ///< increment 2*mu*y
    ExactLLR,     ///< increment 2*mu*y / sigma^2
};

/// Receiver noise at the fusion center and the design means +-mu.
struct FusionChannelParams {
    double noise_variance = 1.0;
    double design_mean = 1.0;
    DriftConvention drift_convention = DriftConvention::PaperLiteral;
};

enum class Algorithm { DualSPRT, SprtCsprt, DualCSPRT, GlrSprt, GlrCsprt };

inline constexpr std::array<Algorithm, 5> kAllAlgorithms = {
    Algorithm::DualSPRT, Algorithm::SprtCsprt, Algorithm::DualCSPRT, Algorithm::GlrSprt, Algorithm::GlrCsprt};

inline std::string_view to_string(Algorithm a) noexcept
{
    switch (a) {
    case Algorithm::DualSPRT: return "DualSPRT";
    case Algorithm::SprtCsprt: return "SPRT-CSPRT";
    case Algorithm::DualCSPRT: return "DualCSPRT";
    case Algorithm::GlrSprt: return "GLR-SPRT";
    case Algorithm::GlrCsprt: return "GLR-CSPRT";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s)
{
    for (Algorithm a : kAllAlgorithms)
        if (to_string(a) == s) return a;
    throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

inline bool is_glr(Algorithm a) noexcept { return a == Algorithm::GlrSprt || a == Algorithm::GlrCsprt; }

/// Fusion center runs the clamped pair rather than a single sum.
inline bool uses_csprt_fusion(Algorithm a) noexcept { return a != Algorithm::DualSPRT && a != Algorithm::GlrSprt; }

/// Four-level soft quantizer applied once a local statistic is past its threshold.
struct QuantizerConfig {
    std::array<double, 4> upper_levels{1.0, 2.0, 3.0, 4.0};
    std::array<double, 4> lower_levels{-1.0, -2.0, -3.0, -4.0};
    double delta_up = 0.5;
    double delta_down = 0.5;
};

enum class BoundaryKind { LogInverse };

inline std::string_view to_string(BoundaryKind) noexcept { return "log_inverse"; }

inline BoundaryKind parse_boundary(std::string_view s)
{
    if (s == "log_inverse") return BoundaryKind::LogInverse;
    throw ConfigError("unknown GLR boundary '" + std::string(s) + "'");
}

/// Decreasing stopping boundary g(t) for the GLR test. The base form is log(1/t); an optional
/// additive correction, tabulated against t and linearly interpolated in log t, refines it.
struct GlrBoundary {
    BoundaryKind kind = BoundaryKind::LogInverse;
    std::vector<std::pair<double, double>> correction; ///< (t, additive term), t ascending
};

struct GlrConfig {
    double theta0 = 0.0;
    double theta1 = 0.5;
    double cost = 0.01;
    double clamp_lo = 0.0; ///< a1
    double clamp_hi = 2.0; ///< a2
    double delta = 0.25;
    GlrBoundary boundary;
};

/// Slow fading: each node's post-change mean is drawn once per trial from Exp(rate).
struct FadingConfig {
    double rate = 1.0;
    bool per_trial = true;
};

struct Bias {
    double d1 = 0.0;
    double d0 = 0.0;
};

struct ScenarioConfig {
    std::string id = "scenario";
    std::vector<NodeParams> nodes;
    FusionChannelParams fusion;
    Algorithm algorithm = Algorithm::SprtCsprt;
    double local_threshold = 1.0;  ///< gamma; for GLR variants unused (the boundary uses cost)
    double fusion_threshold = 1.0; ///< beta
    QuantizerConfig quantizer;
    double binary_level = 1.0; ///< b1 = -b0 emitted by DualSPRT nodes
    Bias bias;
    std::optional<GlrConfig> glr;
    std::optional<FadingConfig> fading;
    Hypothesis true_hypothesis = Hypothesis::H1;
    std::int64_t max_horizon = 10000;
};

/// Throws ConfigError naming the offending field.
inline void validate(const ScenarioConfig& cfg)
{
    auto fail = [](const std::string& field, const std::string& what) {
        throw ConfigError("invalid field '" + field + "': " + what);
    };
    if (cfg.nodes.empty()) fail("nodes", "at least one node is required");
    for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
        const auto& n = cfg.nodes[i];
        const std::string p = "nodes[" + std::to_string(i) + "].";
        if (!(n.noise_std > 0.0) || !std::isfinite(n.noise_std)) fail(p + "noise_std", "must be > 0");
        if (!std::isfinite(n.post_change_mean)) fail(p + "post_change_mean", "must be finite");
    }
    if (!(cfg.fusion.noise_variance > 0.0)) fail("fusion.noise_variance", "must be > 0");
    if (!(cfg.fusion.design_mean > 0.0)) fail("fusion.design_mean", "must be > 0");
    if (!(cfg.fusion_threshold > 0.0)) fail("fusion_threshold", "must be > 0");
    if (!is_glr(cfg.algorithm) && !(cfg.local_threshold > 0.0)) fail("local_threshold", "must be > 0");
    if (cfg.max_horizon < 1) fail("max_horizon", "must be >= 1");
    const auto& q = cfg.quantizer;
    for (std::size_t j = 1; j < 4; ++j) {
        if (!(q.upper_levels[j] > q.upper_levels[j - 1])) fail("quantizer.upper_levels", "must be strictly ascending");
        if (!(q.lower_levels[j] < q.lower_levels[j - 1])) fail("quantizer.lower_levels", "must be strictly descending");
    }
    if (!(q.delta_up > 0.0)) fail("quantizer.delta_up", "must be > 0");
    if (!(q.delta_down > 0.0)) fail("quantizer.delta_down", "must be > 0");
    if (is_glr(cfg.algorithm)) {
        if (!cfg.glr) fail("glr", "required for GLR algorithms");
        const auto& g = *cfg.glr;
        if (!(g.theta1 > g.theta0)) fail("glr.theta1", "must exceed theta0");
        if (!(g.cost > 0.0)) fail("glr.cost", "must be > 0");
        if (!(g.clamp_lo <= g.clamp_hi)) fail("glr.clamp", "a1 must not exceed a2");
        if (!(g.delta >= 0.0 && 3.0 * g.delta <= 1.0)) fail("glr.delta", "must satisfy 0 <= 3*delta <= 1");
        for (std::size_t j = 1; j < g.boundary.correction.size(); ++j)
            if (!(g.boundary.correction[j].first > g.boundary.correction[j - 1].first))
                fail("glr.boundary.correction", "t must be strictly ascending");
        for (const auto& [t, _] : g.boundary.correction)
            if (!(t > 0.0)) fail("glr.boundary.correction", "t must be > 0");
    }
    if (cfg.fading) {
        if (!(cfg.fading->rate > 0.0)) fail("fading.rate", "must be > 0");
        if (!cfg.fading->per_trial) fail("fading.per_trial", "only slow (per-trial) fading is supported");
    }
}

/// Exact log-likelihood ratio of N(theta, sigma_sq) against N(0, sigma_sq) at x.
inline double gaussian_llr(double x, double theta, double sigma_sq)
{
    if (!(sigma_sq > 0.0)) throw ConfigError("gaussian_llr: sigma_sq must be > 0");
    return theta * x / sigma_sq - theta * theta / (2.0 * sigma_sq);
}

inline double fusion_llr_increment(double y, const FusionChannelParams& fusion) noexcept
{
    const double s = 2.0 * fusion.design_mean * y;
    return fusion.drift_convention == DriftConvention::ExactLLR ? s / fusion.noise_variance : s;
}

/// X ~ N(0, sigma^2) under H0, N(effective_mean, sigma^2) under H1.
inline double sample_observation(Hypothesis hyp, const NodeParams& node, double effective_mean, RandomStream& rng)
{
    const double mean = hyp == Hypothesis::H1 ? effective_mean : 0.0;
    return rng.normal(mean, node.noise_std);
}

} // namespace coopsense
