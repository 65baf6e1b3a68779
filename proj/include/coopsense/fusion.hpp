#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "coopsense/model.hpp"

namespace coopsense {

/// One slot at the fusion center: the superposed node transmissions plus receiver noise.
struct SlotAggregate {
    double y = 0.0;
    std::vector<std::pair<std::size_t, double>> contributors; ///< nodes with a nonzero emission
};

/// y = sum(emissions) + Z, Z ~ N(0, noise_variance). A zero variance gives the noiseless sum.
inline SlotAggregate mac_aggregate(std::span<const double> emissions, const FusionChannelParams& fusion,
                                   RandomStream& rng)
{
    SlotAggregate out;
    double sum = 0.0;
    for (std::size_t i = 0; i < emissions.size(); ++i) {
        sum += emissions[i];
        if (emissions[i] != 0.0) out.contributors.emplace_back(i, emissions[i]);
    }
    out.y = sum + std::sqrt(fusion.noise_variance) * rng.standard_normal();
    return out;
}

struct FusionState {
    double sprt_sum = 0.0; ///< F_k
    double pos_sum = 0.0;  ///< F^1_k >= 0
    double neg_sum = 0.0;  ///< F^0_k <= 0
    std::int64_t time = 0;
    std::optional<Hypothesis> decision;
    std::optional<std::int64_t> stop_time;
    bool simultaneous_crossing = false;

    bool stopped() const noexcept { return decision.has_value(); }
};

inline FusionState fusion_sprt_apply(FusionState s, double increment, double beta)
{
    if (s.stopped()) throw UsageError("fusion SPRT stepped after its decision");
    s.sprt_sum += increment;
    s.time += 1;
    if (s.sprt_sum >= beta) {
        s.decision = Hypothesis::H1;
        s.stop_time = s.time;
    } else if (s.sprt_sum <= -beta) {
        s.decision = Hypothesis::H0;
        s.stop_time = s.time;
    }
    return s;
}

inline FusionState fusion_sprt_step(const FusionState& s, double y, const FusionChannelParams& fusion, double beta)
{
    return fusion_sprt_apply(s, fusion_llr_increment(y, fusion), beta);
}

/// Clamped pair update. If both thresholds are met in one slot the larger overshoot decides
/// (ties go to H1) and the slot is flagged.
inline FusionState fusion_csprt_apply(FusionState s, double increment, double beta, const Bias& bias)
{
    if (s.stopped()) throw UsageError("fusion CSPRT stepped after its decision");
    s.pos_sum = std::max(0.0, s.pos_sum + increment + bias.d1);
    s.neg_sum = std::min(0.0, s.neg_sum + increment + bias.d0);
    s.time += 1;
    const bool up = s.pos_sum >= beta;
    const bool down = s.neg_sum <= -beta;
    if (up && down) {
        s.simultaneous_crossing = true;
        s.decision = (s.pos_sum - beta) >= (-beta - s.neg_sum) ? Hypothesis::H1 : Hypothesis::H0;
        s.stop_time = s.time;
    } else if (up) {
        s.decision = Hypothesis::H1;
        s.stop_time = s.time;
    } else if (down) {
        s.decision = Hypothesis::H0;
        s.stop_time = s.time;
    }
    return s;
}

inline FusionState fusion_csprt_step(const FusionState& s, double y, const FusionChannelParams& fusion, double beta,
                                     const Bias& bias)
{
    return fusion_csprt_apply(s, fusion_llr_increment(y, fusion), beta, bias);
}

/// Decision for a trial cut off at the horizon: the side whose statistic is further out.
inline Hypothesis forced_decision(const FusionState& s, bool csprt) noexcept
{
    if (csprt) return s.pos_sum >= -s.neg_sum ? Hypothesis::H1 : Hypothesis::H0;
    return s.sprt_sum >= 0.0 ? Hypothesis::H1 : Hypothesis::H0;
}

} // namespace coopsense
