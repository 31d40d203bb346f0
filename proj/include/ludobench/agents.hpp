#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ludobench/agent.hpp"
#include "ludobench/risk.hpp"

namespace ludobench::agents {

// ---------------------------------------------------------------------------
// Scripted oracles with known pathologies
// ---------------------------------------------------------------------------

enum class ScriptedKind { rational_calibrated, overconfident, loss_chaser, hot_hand, risk_seeking };

std::string_view to_string(ScriptedKind k) noexcept;
std::optional<ScriptedKind> parse_scripted_kind(std::string_view s) noexcept;

struct ScriptedProfile {
    ScriptedKind kind = ScriptedKind::rational_calibrated;
    double bias = 0.3;
    double chase_increment = 0.1;
    double decay = 0.0;
    /// Risk target the loss chaser starts from and decays back to.
    double baseline_target = 0.2;

    void validate() const;
};

struct AgentMemory {
    double risk_target = 0.0;
    std::size_t success_streak = 0;
};

AgentMemory initial_memory(const ScriptedProfile& profile) noexcept;
/// Memory after one round of feedback.
AgentMemory update_memory(const ScriptedProfile& profile, AgentMemory memory, bool negative_feedback) noexcept;

struct ScriptedAction {
    std::size_t index = 0;
    std::string label;
    double confidence = 0.0;
};

ScriptedAction scripted_act(const ScriptedProfile& profile, const Scenario& scenario, const AgentMemory& memory,
                            const risk::RiskWeights& weights = {});

/// Confidence the profile states when holding `option`.
double scripted_confidence(const ScriptedProfile& profile, const ScenarioOption& option, const AgentMemory& memory);

double scripted_probability(const ScriptedProfile& profile, const ProbabilityItem& item) noexcept;

/// Exploration block of the expected-value deck strategy: round-robin over
/// the four decks, ten cards each.
inline constexpr std::size_t kDeckExplorationPicks = 40;

class ScriptedAgent final : public Agent {
public:
    explicit ScriptedAgent(ScriptedProfile profile, risk::RiskWeights weights = {});

    std::string kind() const override;
    void begin_episode(RngState stream) override;
    ChoiceAnswer choose_option(const Scenario& scenario, const ChoiceContext& context) override;
    void observe_feedback(const Scenario& scenario, std::size_t chosen, bool negative) override;
    std::optional<double> confidence_for(const Scenario& scenario, std::size_t option) const override;
    double estimate_probability(const ProbabilityItem& item) override;
    Interval give_interval(const IntervalItem& item) override;
    Deck pick_deck(const DeckObservation& observation) override;

    const AgentMemory& memory() const noexcept { return memory_; }
    const ScriptedProfile& profile() const noexcept { return profile_; }

private:
    ScriptedProfile profile_;
    risk::RiskWeights weights_;
    AgentMemory memory_;
    Rng rng_;
};

/// Chooses uniformly at random everywhere. Reference subject for chance-level
/// checks.
class RandomAgent final : public Agent {
public:
    std::string kind() const override { return "uniform_random"; }
    void begin_episode(RngState stream) override { rng_ = Rng(stream); }
    ChoiceAnswer choose_option(const Scenario& scenario, const ChoiceContext& context) override;
    double estimate_probability(const ProbabilityItem& item) override;
    Interval give_interval(const IntervalItem& item) override;
    Deck pick_deck(const DeckObservation& observation) override;

private:
    Rng rng_;
};

/// Deck picked by the expected-value strategy after exploration: highest
/// observed mean net payoff, ties to the earlier deck.
Deck best_mean_deck(const std::vector<IowaDraw>& history);

/// Standard normal quantile.
double normal_quantile(double p);

// ---------------------------------------------------------------------------
// Toy policy
// ---------------------------------------------------------------------------

/// [quality, factual, controversy, uncertainty, expected_utility]
inline constexpr std::size_t kFeatureDim = 5;
/// Head input is the chosen option's features plus u_epi, u_ale and risk.
inline constexpr std::size_t kHeadDim = kFeatureDim + 3;

using FeatureVector = std::array<double, kFeatureDim>;

FeatureVector option_features(const ScenarioOption& option) noexcept;

/// Online expectancy learner for the deck task. Losses in the update are
/// weighted by `loss_aversion` (1 means plain squared-error learning).
struct DeckLearner {
    double learning_rate = 0.3;
    double sensitivity = 3.0;
    double loss_aversion = 1.0;
    /// Payoffs are divided by this before learning.
    double payoff_scale = 100.0;
};

struct ToyPolicy {
    std::vector<double> theta = std::vector<double>(kFeatureDim, 0.0);
    risk::ConfidenceHead head{std::vector<double>(kHeadDim, 0.0), 0.0};
    DeckLearner deck;

    void validate() const;
};

struct ToyAction {
    std::size_t index = 0;
    std::string label;
    double confidence = 0.0;
    std::vector<double> probabilities;
    std::vector<double> scores;
};

/// Softmax scores theta . features per option.
std::vector<double> toy_scores(const ToyPolicy& policy, const Scenario& scenario);
std::vector<double> softmax(const std::vector<double>& scores);

/// Head features for holding option `chosen` given the option distribution.
risk::ConfidenceFeatures toy_head_features(const Scenario& scenario, std::size_t chosen,
                                           const std::vector<double>& probabilities,
                                           const risk::RiskWeights& weights);

ToyAction toy_policy_act(const ToyPolicy& policy, const Scenario& scenario, Rng& rng,
                         const risk::RiskWeights& weights = {});

/// Binary "event / no event" rendering of a probability: the toy policy's
/// probability judgment is its softmax mass on the event option.
Scenario event_scenario(double p, const std::string& id = "event");

/// Expectancies of the four decks after learning from `history`.
std::array<double, 4> deck_expectancies(const DeckLearner& learner, const std::vector<IowaDraw>& history);

class ToyAgent final : public Agent {
public:
    explicit ToyAgent(ToyPolicy policy, risk::RiskWeights weights = {});

    std::string kind() const override { return "toy_policy"; }
    void begin_episode(RngState stream) override { rng_ = Rng(stream); }
    ChoiceAnswer choose_option(const Scenario& scenario, const ChoiceContext& context) override;
    std::optional<double> confidence_for(const Scenario& scenario, std::size_t option) const override;
    double estimate_probability(const ProbabilityItem& item) override;
    std::optional<std::array<double, 2>> probability_scores(const ProbabilityItem& item) const override;
    Interval give_interval(const IntervalItem& item) override;
    Deck pick_deck(const DeckObservation& observation) override;

    const ToyPolicy& policy() const noexcept { return policy_; }

private:
    ToyPolicy policy_;
    risk::RiskWeights weights_;
    Rng rng_;
};

}  // namespace ludobench::agents
