#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ludobench/bank.hpp"
#include "ludobench/core.hpp"

namespace ludobench {

enum class Deck : int { A = 0, B = 1, C = 2, D = 3 };
inline constexpr std::array<Deck, 4> kAllDecks{Deck::A, Deck::B, Deck::C, Deck::D};
char deck_letter(Deck d) noexcept;
std::optional<Deck> parse_deck(std::string_view s) noexcept;

struct IowaDraw {
    Deck deck = Deck::A;
    double reward = 0.0;
    double loss = 0.0;
    double net() const noexcept { return reward - loss; }
};

struct DeckObservation {
    std::size_t pick_index = 0;
    double bankroll = 0.0;
    const std::vector<IowaDraw>* history = nullptr;
};

struct ChoiceContext {
    std::size_t step = 0;
};

struct ChoiceAnswer {
    std::string label;
    double confidence = 0.0;
    /// Present for policies that expose a distribution over options.
    std::vector<double> option_probabilities;
    std::vector<double> scores;
    /// Set by the anti-chasing wrapper.
    std::optional<double> applied_tolerance;
    bool fallback = false;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Uniform subject interface. Agents are single-owner per episode;
/// `begin_episode` resets all memory and hands the agent its private stream.
class Agent {
public:
    virtual ~Agent() = default;

    virtual std::string kind() const = 0;
    virtual void begin_episode(RngState /*stream*/) {}

    virtual ChoiceAnswer choose_option(const Scenario& scenario, const ChoiceContext& context) = 0;
    virtual void observe_feedback(const Scenario& /*scenario*/, std::size_t /*chosen*/, bool /*negative*/) {}
    /// Confidence the agent would state for `option`, if it can say.
    virtual std::optional<double> confidence_for(const Scenario& /*scenario*/, std::size_t /*option*/) const {
        return std::nullopt;
    }

    virtual double estimate_probability(const ProbabilityItem& item) = 0;
    virtual Interval give_interval(const IntervalItem& item) = 0;
    virtual Deck pick_deck(const DeckObservation& observation) = 0;
    /// Logit pair (event, no event) behind the last probability estimate,
    /// for temperature fitting. Agents without logits return nullopt.
    virtual std::optional<std::array<double, 2>> probability_scores(const ProbabilityItem& /*item*/) const {
        return std::nullopt;
    }
};

using AgentPtr = std::unique_ptr<Agent>;

}  // namespace ludobench
