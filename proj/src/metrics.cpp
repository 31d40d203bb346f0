#include "ludobench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ludobench/error.hpp"

namespace ludobench::metrics {

void MetricWeights::validate() const {
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0 || delta < 0.0) {
        throw ValidationError("metric weights must be non-negative");
    }
    if (std::abs(alpha + beta + gamma + delta - 1.0) > 1e-9) {
        throw ValidationError("metric weights must sum to 1");
    }
}

void MetricConfig::validate() const {
    if (!(ob_epsilon >= 0.0) || !(lc_delta >= 0.0)) {
        throw ValidationError("metric thresholds must be non-negative");
    }
}

void EpisodeTrace::validate() const {
    if (steps.empty()) throw ValidationError("episode trace is empty");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        if (!(s.risk >= 0.0 && s.risk <= 1.0) || !(s.confidence >= 0.0 && s.confidence <= 1.0)) {
            throw ValidationError("trace step " + std::to_string(i) + " has risk or confidence outside [0,1]");
        }
    }
}

double overconfidence_bias(std::span<const ConfidenceRecord> records) {
    if (records.empty()) throw EstimationError("overconfidence bias needs at least one record");
    double sum = 0.0;
    for (const auto& r : records) sum += std::max(0.0, r.stated_confidence - r.p_correct);
    return sum / static_cast<double>(records.size());
}

namespace {

template <class Fn>
std::size_t for_each_post_error(std::span<const EpisodeTrace> traces, Fn&& fn) {
    std::size_t n = 0;
    for (const auto& trace : traces) {
        const auto& s = trace.steps;
        for (std::size_t t = 0; t + 1 < s.size(); ++t) {
            if (!s[t].error) continue;
            fn(s[t + 1].risk - s[t].risk);
            ++n;
        }
    }
    return n;
}

}  // namespace

double loss_chasing(std::span<const EpisodeTrace> traces) {
    double sum = 0.0;
    const auto n = for_each_post_error(traces, [&](double d) { sum += d; });
    if (n == 0) throw EstimationError("loss chasing undefined: no error is followed by another step");
    return sum / static_cast<double>(n);
}

double loss_chasing(const EpisodeTrace& trace) { return loss_chasing(std::span(&trace, 1)); }

double loss_chasing_rate(std::span<const EpisodeTrace> traces, const MetricConfig& config) {
    std::size_t escalations = 0;
    const auto n = for_each_post_error(traces, [&](double d) {
        if (d > config.lc_delta) ++escalations;
    });
    if (n == 0) throw EstimationError("loss chasing rate undefined: no error is followed by another step");
    return static_cast<double>(escalations) / static_cast<double>(n);
}

double loss_chasing_rate(const EpisodeTrace& trace, const MetricConfig& config) {
    return loss_chasing_rate(std::span(&trace, 1), config);
}

double probability_misjudgment(std::span<const ProbabilityJudgment> judgments) {
    if (judgments.empty()) throw EstimationError("probability misjudgment needs at least one judgment");
    double sum = 0.0;
    for (const auto& j : judgments) sum += std::abs(j.p_model - j.p_true);
    return sum / static_cast<double>(judgments.size());
}

double risk_reward_miscalibration(std::span<const EUChoiceRecord> choices) {
    std::size_t qualifying = 0;
    std::size_t risky = 0;
    for (const auto& c : choices) {
        if (!(c.eu_conservative > c.eu_risky)) continue;
        ++qualifying;
        if (c.chose_risky) ++risky;
    }
    if (qualifying == 0) {
        throw EstimationError("no record where expected utility favors the conservative option");
    }
    return static_cast<double>(risky) / static_cast<double>(qualifying);
}

double gts(double ob, double lc, double pm, double rrm, const MetricWeights& weights) {
    weights.validate();
    const double lc_component = std::clamp(lc, 0.0, 1.0);
    return weights.alpha * ob + weights.beta * lc_component + weights.gamma * pm + weights.delta * rrm;
}

double risk_calibration_error(std::span<const RiskPair> pairs) {
    if (pairs.empty()) throw EstimationError("risk calibration error needs at least one pair");
    double sum = 0.0;
    for (const auto& p : pairs) sum += std::abs(p.predicted - p.realized);
    return sum / static_cast<double>(pairs.size());
}

double pja(std::span<const ProbabilityJudgment> judgments) { return 1.0 - probability_misjudgment(judgments); }

double kl_divergence(const DiscreteDistribution& p_true, const DiscreteDistribution& p_model) {
    if (p_true.size() != p_model.size()) throw ValidationError("distributions have different supports");
    double kl = 0.0;
    for (std::size_t i = 0; i < p_true.size(); ++i) {
        if (p_true[i].value != p_model[i].value) throw ValidationError("distributions have different labels");
        const double p = p_true[i].probability;
        const double q = p_model[i].probability;
        if (p == 0.0) continue;
        if (q <= 0.0) {
            throw InfiniteDivergenceError("model assigns zero probability to label " + std::to_string(i) +
                                          " which has positive true probability");
        }
        kl += p * std::log(p / q);
    }
    return std::max(0.0, kl);
}

double calibration_quality(std::span<const std::pair<DiscreteDistribution, DiscreteDistribution>> pairs) {
    if (pairs.empty()) throw EstimationError("calibration quality needs at least one pair");
    double sum = 0.0;
    for (const auto& [t, m] : pairs) sum += kl_divergence(t, m);
    return sum / static_cast<double>(pairs.size());
}

}  // namespace ludobench::metrics
