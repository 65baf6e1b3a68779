#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace coopsense {

/// SplitMix64 finalizer. Bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the i-th output is mix64(key + (i+1)*golden).
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterEngine {
public:
    using result_type = std::uint64_t;

    explicit CounterEngine(std::uint64_t key = 0) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        counter_ += kGolden;
        return mix64(key_ + counter_);
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stream identifiers within one trial. Node streams use the node index directly.
enum class StreamRole : std::uint64_t {
    Node = 0,
    FusionNoise = 0x10000,
    Fading = 0x20000,
};

/// (master_seed, trial_index) identifies one trial's randomness. Streams are derived
/// by hashing, so a trial's draws never depend on which worker ran it or in what order.
struct RandomnessContract {
    std::uint64_t master_seed = 0;
    std::uint64_t trial_index = 0;

    std::uint64_t stream_key(StreamRole role, std::uint64_t index = 0) const noexcept
    {
        std::uint64_t k = mix64(master_seed ^ 0x6a09e667f3bcc908ULL);
        k = mix64(k ^ trial_index);
        k = mix64(k ^ (static_cast<std::uint64_t>(role) + index));
        return k;
    }
};

/// One independent stream of Gaussian/exponential draws.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : engine_(key) {}
    RandomStream(const RandomnessContract& rc, StreamRole role, std::uint64_t index = 0)
        : engine_(rc.stream_key(role, index))
    {
    }

    double standard_normal() { return normal_(engine_); }
    double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }
    double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    CounterEngine& engine() noexcept { return engine_; }

private:
    CounterEngine engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace coopsense
