#include "ludobench/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ludobench/error.hpp"

namespace ludobench {

std::size_t Rng::below(std::size_t n) noexcept {
    // Lemire's multiply-shift; bias is below 2^-64 * n and irrelevant here.
    const auto wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::size_t>(wide >> 64);
}

double Rng::normal(double mean, double sd) noexcept {
    double u1 = unit();
    const double u2 = unit();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
}

void validate_outcomes(std::span<const Outcome> outcomes) {
    if (outcomes.empty()) {
        throw ValidationError("distribution has no outcomes");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (!std::isfinite(o.value)) {
            throw ValidationError("outcome " + std::to_string(i) + " has non-finite value");
        }
        if (!(o.probability >= 0.0) || o.probability > 1.0) {
            throw ValidationError("outcome " + std::to_string(i) + " probability outside [0,1]");
        }
        total += o.probability;
    }
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
        throw ValidationError("probabilities sum to " + std::to_string(total) + ", expected 1");
    }
}

DiscreteDistribution::DiscreteDistribution(std::vector<Outcome> outcomes)
    : outcomes_(std::move(outcomes)) {
    validate_outcomes(outcomes_);
}

DiscreteDistribution DiscreteDistribution::point_mass(double value) {
    return DiscreteDistribution({{value, 1.0}});
}

double DiscreteDistribution::mean() const noexcept {
    double m = 0.0;
    for (const auto& o : outcomes_) m += o.probability * o.value;
    return m;
}

double DiscreteDistribution::min_value() const noexcept {
    return std::ranges::min(outcomes_, {}, &Outcome::value).value;
}

double DiscreteDistribution::max_value() const noexcept {
    return std::ranges::max(outcomes_, {}, &Outcome::value).value;
}

bool DiscreteDistribution::has_negative_outcome() const noexcept {
    return std::ranges::any_of(outcomes_, [](const Outcome& o) { return o.value < 0.0 && o.probability > 0.0; });
}

std::pair<RngState, std::size_t> sample_discrete(const DiscreteDistribution& dist, RngState s) {
    auto [next, u] = rng_unit(s);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const double p = dist[i].probability;
        if (p <= 0.0) continue;
        last_positive = i;
        cumulative += p;
        if (u < cumulative) return {next, i};
    }
    // Round-off left u above the accumulated mass.
    return {next, last_positive};
}

}  // namespace ludobench
