#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ludobench/agent.hpp"
#include "ludobench/agents.hpp"
#include "ludobench/bank.hpp"
#include "ludobench/risk.hpp"

namespace ludobench::training {

struct TrainingConfig {
    double lambda_scale = 1.0;
    double kappa = 2.25;
    double lambda1 = 1.0;  // loss-averse term
    double lambda2 = 0.5;  // probability calibration
    double lambda3 = 0.5;  // risk regularizer
    double risk_threshold = 0.6;
    double learning_rate = 0.05;
    std::size_t epochs = 500;
    std::uint64_t seed = 0;

    /// Throws ConfigError. kappa <= 1 is allowed (only a warning).
    void validate() const;
};

/// Which RARG components are active. Each flag maps onto the objective:
/// loss_aversion -> lambda1 and the deck learner's loss weight,
/// risk_calibration -> lambda3 and the calibrated head target,
/// probability_training -> lambda2, anti_chasing -> evaluation wrapper.
struct AblationFlags {
    bool loss_aversion = true;
    bool risk_calibration = true;
    bool anti_chasing = true;
    bool probability_training = true;

    static AblationFlags all_on() { return {}; }
    static AblationFlags all_off() { return {false, false, false, false}; }
};

/// Config with the lambdas of disabled components zeroed.
TrainingConfig effective_config(const TrainingConfig& config, const AblationFlags& flags);

double loss_averse_loss(double base_loss, bool correct, const TrainingConfig& config);
/// KL(p_true || p_model) in nats.
double prob_calibration_loss(const DiscreteDistribution& p_true, const DiscreteDistribution& p_model);
double risk_regularizer(double risk, double threshold);
double total_loss(double lm_loss, double la_loss, double cal_loss, double risk_reg, const TrainingConfig& config);

/// One forced-choice training item. For event items `optimal` is the realized
/// outcome (event or no event), not the more likely one.
struct TrainingExample {
    Scenario scenario;
    std::optional<std::size_t> optimal;
    /// Event items also carry a probability target for the calibration term.
    bool is_event = false;
};

/// Bank scenarios, gamble pairs, then probability items rendered as event scenarios.
std::vector<TrainingExample> training_examples(const Bank& bank);

struct LossParts {
    double lm = 0.0;
    double la = 0.0;
    double cal = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

/// Mean objective over the examples; fills `grad` (size 5) with d total / d theta
/// when non-null.
LossParts objective(std::span<const double> theta, std::span<const TrainingExample> examples,
                    const TrainingConfig& config, const risk::RiskWeights& weights, std::vector<double>* grad);

/// Binary cross-entropy of the confidence head, weighted by the policy's
/// option probabilities, over the bank scenarios. Target per option is its
/// p_correct when `calibrated`, else 1 for the quality-optimal option.
/// `grad` (size 9: weights then bias) is filled when non-null.
double head_loss(const agents::ToyPolicy& policy, std::span<const TrainingExample> examples, bool calibrated,
                 const risk::RiskWeights& weights, std::vector<double>* grad);

struct TrainingResult {
    agents::ToyPolicy policy;
    std::vector<double> loss_history;
};

inline constexpr double kDivergenceLoss = 1e6;

/// Plain gradient descent on the objective (theta) and the head loss (head).
agents::ToyPolicy initial_policy(std::uint64_t seed);
TrainingResult train_toy_policy(const Bank& bank, const TrainingConfig& config, const AblationFlags& flags,
                                const risk::RiskWeights& weights = {});

/// Max relative error between analytic and central-difference gradients
/// over theta (total objective) and the head parameters (head loss).
double finite_diff_check(const agents::ToyPolicy& policy, std::span<const TrainingExample> examples,
                         const TrainingConfig& config, bool calibrated_head, double epsilon,
                         const risk::RiskWeights& weights = {});

// ---------------------------------------------------------------------------
// Anti-chasing selection
// ---------------------------------------------------------------------------

struct AntiChasingConfig {
    double base_tolerance = 0.5;
    double chase_sensitivity = 1.0;
    std::size_t window_tau = 5;

    void validate() const;
};

struct ErrorHistory {
    std::vector<std::size_t> entries;
    std::size_t current_step = 0;

    void validate() const;
    /// Share of the recorded errors that fall in the last tau steps.
    double recent_fraction(std::size_t tau) const;
};

struct AntiChasingChoice {
    std::size_t index = 0;
    double applied_tolerance = 0.0;
    bool fallback = false;
};

double applied_tolerance(const ErrorHistory& history, const AntiChasingConfig& config);
AntiChasingChoice anti_chasing_select(std::span<const ScenarioOption> candidates, const ErrorHistory& history,
                                      const AntiChasingConfig& config, const risk::RiskWeights& weights = {});

/// Wraps an agent with the anti-chasing filter. The inner agent still sees
/// every scenario and all feedback; the stated confidence is the inner
/// agent's confidence for the option actually returned when it can say.
class AntiChasingAgent final : public Agent {
public:
    AntiChasingAgent(AgentPtr inner, AntiChasingConfig config, risk::RiskWeights weights = {});

    std::string kind() const override;
    void begin_episode(RngState stream) override;
    ChoiceAnswer choose_option(const Scenario& scenario, const ChoiceContext& context) override;
    void observe_feedback(const Scenario& scenario, std::size_t chosen, bool negative) override;
    std::optional<double> confidence_for(const Scenario& scenario, std::size_t option) const override;
    double estimate_probability(const ProbabilityItem& item) override;
    Interval give_interval(const IntervalItem& item) override;
    Deck pick_deck(const DeckObservation& observation) override;
    std::optional<std::array<double, 2>> probability_scores(const ProbabilityItem& item) const override;

    const ErrorHistory& history() const noexcept { return history_; }

private:
    AgentPtr inner_;
    AntiChasingConfig config_;
    risk::RiskWeights weights_;
    ErrorHistory history_;
};

}  // namespace ludobench::training
