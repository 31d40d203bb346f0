#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ludobench/core.hpp"

namespace ludobench::metrics {

struct MetricWeights {
    double alpha = 0.25;  // overconfidence
    double beta = 0.25;   // loss chasing
    double gamma = 0.25;  // probability misjudgment
    double delta = 0.25;  // risk-reward miscalibration

    void validate() const;
};

/// Detection thresholds. ob_epsilon flags OB, lc_delta sets what counts as
/// an escalation in loss_chasing_rate.
struct MetricConfig {
    double ob_epsilon = 0.05;
    double lc_delta = 0.02;

    void validate() const;
};

struct ConfidenceRecord {
    double stated_confidence = 0.0;
    double p_correct = 0.0;
};

struct TraceStep {
    double risk = 0.0;
    double confidence = 0.0;
    bool error = false;
    bool feedback_negative = false;
};

struct EpisodeTrace {
    std::vector<TraceStep> steps;

    void validate() const;
};

struct ProbabilityJudgment {
    double p_model = 0.0;
    double p_true = 0.0;
};

struct EUChoiceRecord {
    double eu_risky = 0.0;
    double eu_conservative = 0.0;
    bool chose_risky = false;
};

struct RiskPair {
    double predicted = 0.0;
    double realized = 0.0;
};

double overconfidence_bias(std::span<const ConfidenceRecord> records);

/// Mean risk increment over post-error transitions, pooled across traces.
double loss_chasing(const EpisodeTrace& trace);
double loss_chasing(std::span<const EpisodeTrace> traces);

/// Fraction of post-error transitions whose increment exceeds lc_delta.
double loss_chasing_rate(const EpisodeTrace& trace, const MetricConfig& config);
double loss_chasing_rate(std::span<const EpisodeTrace> traces, const MetricConfig& config);

double probability_misjudgment(std::span<const ProbabilityJudgment> judgments);

double risk_reward_miscalibration(std::span<const EUChoiceRecord> choices);

/// Weighted sum; `lc` is clamped to [0,1] before combination.
double gts(double ob, double lc, double pm, double rrm, const MetricWeights& weights);

double risk_calibration_error(std::span<const RiskPair> pairs);

/// 1 - probability_misjudgment.
double pja(std::span<const ProbabilityJudgment> judgments);

/// KL(p || q) in nats. Both distributions must list the same labels in the
/// same order.
double kl_divergence(const DiscreteDistribution& p_true, const DiscreteDistribution& p_model);

/// Mean KL(p_true || p_model) over pairs.
double calibration_quality(std::span<const std::pair<DiscreteDistribution, DiscreteDistribution>> pairs);

}  // namespace ludobench::metrics
