#pragma once

// Counter-based random streams. Every draw in a run is a pure function of
// (seed, stream coordinates, draw index), so evaluation order never matters.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace pixelswarm {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a list of coordinates into one 64-bit stream key.
constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

/// Stream tags keep draws for different purposes in the same tick disjoint.
enum class StreamTag : std::uint64_t {
    LocalDecision = 1,
    OracleVerdict = 2,
    Bandit = 3,
    ArmEstimate = 4,
    Bench = 5,
};

/// UniformRandomBitGenerator over a keyed counter. Cheap to construct, so a
/// fresh one is made for every (agent, tick) pair.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b = 0,
               std::uint64_t c = 0) noexcept
        : key_(stream_key({seed, static_cast<std::uint64_t>(tag), a, b, c})) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
    }

    /// Uniform double in [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Beta(a, b) via the ratio of two gamma variates.
template <class Urbg>
double sample_beta(Urbg& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    if (x + y <= 0.0) return a / (a + b);
    return x / (x + y);
}

}  // namespace pixelswarm
