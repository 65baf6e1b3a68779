#pragma once

#include <array>
#include <cmath>
#include <string>

#include "coopsense/model.hpp"

namespace coopsense::scenarios {

inline constexpr std::array<double, 5> kPostChangeMeans{1.0, 0.84, 0.75, 0.63, 0.5};
inline constexpr std::array<double, 5> kChannelGainsDb{0.0, -1.5, -2.5, -4.0, -6.0};

/// Five nodes with unit observation noise, levels +-{1,2,3,4}, mu = 1, no bias.
inline ScenarioConfig five_node_network(Algorithm algorithm, double fusion_noise_variance)
{
    ScenarioConfig c;
    for (std::size_t l = 0; l < kPostChangeMeans.size(); ++l)
        c.nodes.push_back({kPostChangeMeans[l], 1.0, kChannelGainsDb[l]});
    c.fusion.noise_variance = fusion_noise_variance;
    c.fusion.design_mean = 1.0;
    c.algorithm = algorithm;
    c.id = std::string(to_string(algorithm));
    return c;
}

inline ScenarioConfig table1(Algorithm algorithm)
{
    auto c = five_node_network(algorithm, 5.0);
    c.id = "table1";
    return c;
}

inline GlrConfig table2_glr()
{
    GlrConfig g;
    g.theta0 = 0.0;
    g.theta1 = 0.75;
    g.clamp_lo = 0.0;
    g.clamp_hi = 2.0;
    g.delta = 0.25;
    return g;
}

inline ScenarioConfig table2(Algorithm algorithm, Hypothesis truth)
{
    auto c = five_node_network(algorithm, 1.0);
    c.id = "table2";
    c.true_hypothesis = truth;
    if (is_glr(algorithm)) c.glr = table2_glr();
    return c;
}

/// Slow fading: every node's post-change mean is Exp(1) per trial. Non-GLR nodes are designed for the
/// median ln 2, as is the GLR alternative theta1.
inline ScenarioConfig table3(Algorithm algorithm, Hypothesis truth)
{
    auto c = five_node_network(algorithm, 1.0);
    c.id = "table3";
    c.true_hypothesis = truth;
    c.fading = FadingConfig{1.0, true};
    for (auto& n : c.nodes) n.post_change_mean = std::log(2.0);
    if (is_glr(algorithm)) {
        c.glr = table2_glr();
        c.glr->theta1 = std::log(2.0);
    }
    return c;
}

inline ScenarioConfig table4(double gamma, double beta)
{
    auto c = five_node_network(Algorithm::SprtCsprt, 1.0);
    c.id = "table4";
    c.local_threshold = gamma;
    c.fusion_threshold = beta;
    return c;
}

} // namespace coopsense::scenarios
