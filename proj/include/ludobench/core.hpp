#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ludobench {

// ---------------------------------------------------------------------------
// SplitMix64. Every stochastic decision in the engine is drawn from this
// generator so that runs are bit-reproducible across platforms.
// ---------------------------------------------------------------------------

struct RngState {
    std::uint64_t state = 0;
    friend bool operator==(const RngState&, const RngState&) = default;
};

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::pair<RngState, std::uint64_t> rng_next(RngState s) noexcept {
    const std::uint64_t next = s.state + kGoldenGamma;
    std::uint64_t z = next;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return {RngState{next}, z ^ (z >> 31)};
}

/// Uniform in [0, 1) from the top 53 bits.
constexpr std::pair<RngState, double> rng_unit(RngState s) noexcept {
    auto [next, bits] = rng_next(s);
    return {next, static_cast<double>(bits >> 11) * 0x1.0p-53};
}

/// Seed of the independent stream for `index` (episode, task salt, ...):
/// one SplitMix64 step applied to seed XOR index.
constexpr RngState derive_stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return RngState{rng_next(RngState{seed ^ index}).second};
}

/// Single-owner convenience wrapper that threads the state through the pure
/// functions above.
class Rng {
public:
    constexpr explicit Rng(RngState s = {}) noexcept : state_(s) {}
    constexpr explicit Rng(std::uint64_t seed) noexcept : state_{seed} {}

    constexpr std::uint64_t next_u64() noexcept {
        auto [s, v] = rng_next(state_);
        state_ = s;
        return v;
    }
    constexpr double unit() noexcept {
        auto [s, v] = rng_unit(state_);
        state_ = s;
        return v;
    }
    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * unit(); }
    bool bernoulli(double p) noexcept { return unit() < p; }
    /// Box-Muller; consumes two uniforms per call.
    double normal(double mean = 0.0, double sd = 1.0) noexcept;

    template <class T>
    void shuffle(std::vector<T>& v) noexcept {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    constexpr RngState state() const noexcept { return state_; }

private:
    RngState state_;
};

// ---------------------------------------------------------------------------
// Discrete distributions
// ---------------------------------------------------------------------------

struct Outcome {
    double value = 0.0;
    double probability = 0.0;
};

inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Finite outcome set with probabilities summing to one. Construction
/// validates; a constructed value always satisfies the invariants.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<Outcome> outcomes);

    static DiscreteDistribution point_mass(double value);

    std::span<const Outcome> outcomes() const noexcept { return outcomes_; }
    std::size_t size() const noexcept { return outcomes_.size(); }
    const Outcome& operator[](std::size_t i) const noexcept { return outcomes_[i]; }

    double mean() const noexcept;
    double min_value() const noexcept;
    double max_value() const noexcept;
    bool has_negative_outcome() const noexcept;

private:
    std::vector<Outcome> outcomes_;
};

/// Throws ValidationError naming the violated invariant.
void validate_outcomes(std::span<const Outcome> outcomes);

/// Inverse-CDF sampling in declared order. Never returns a zero-probability index.
std::pair<RngState, std::size_t> sample_discrete(const DiscreteDistribution& dist, RngState s);

}  // namespace ludobench
