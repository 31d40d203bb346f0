#include "ludobench/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ludobench/error.hpp"

namespace ludobench::risk {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ParameterError("confidence level alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

void check_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0,1]");
}

}  // namespace

void RiskWeights::validate() const {
    if (w_factual < 0.0 || w_controversy < 0.0 || w_uncertainty < 0.0) {
        throw ValidationError("risk weights must be non-negative");
    }
    if (std::abs(w_factual + w_controversy + w_uncertainty - 1.0) > 1e-9) {
        throw ValidationError("risk weights must sum to 1");
    }
}

void RiskComponents::validate() const {
    check_unit(factual, "factual");
    check_unit(controversy, "controversy");
    check_unit(uncertainty, "uncertainty");
}

double value_at_risk(const DiscreteDistribution& losses, double alpha) {
    check_alpha(alpha);
    std::vector<Outcome> sorted(losses.outcomes().begin(), losses.outcomes().end());
    std::ranges::stable_sort(sorted, {}, &Outcome::value);
    double cdf = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cdf += sorted[i].probability;
        // Ties must be fully accumulated before the value can qualify.
        if (i + 1 < sorted.size() && sorted[i + 1].value == sorted[i].value) continue;
        if (sorted[i].probability > 0.0 && cdf >= alpha - kQuantileSlack) return sorted[i].value;
    }
    // Only reachable through round-off in the mass; the largest supported loss.
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        if (it->probability > 0.0) return it->value;
    }
    return sorted.back().value;
}

double conditional_var(const DiscreteDistribution& losses, double alpha) {
    const double var = value_at_risk(losses, alpha);
    double excess = 0.0;
    for (const auto& o : losses.outcomes()) {
        if (o.value > var) excess += o.probability * (o.value - var);
    }
    return var + excess / (1.0 - alpha);
}

double risk_measure(const DiscreteDistribution& losses, double alpha, double lambda) {
    if (!(lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
    return value_at_risk(losses, alpha) + lambda * conditional_var(losses, alpha);
}

double composite_risk(const RiskComponents& components, const RiskWeights& weights) {
    weights.validate();
    components.validate();
    const double r = weights.w_factual * components.factual + weights.w_controversy * components.controversy +
                     weights.w_uncertainty * components.uncertainty;
    return std::clamp(r, 0.0, 1.0);
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> head_input(const ConfidenceFeatures& features) {
    std::vector<double> x = features.hidden;
    x.push_back(features.u_epistemic);
    x.push_back(features.u_aleatoric);
    x.push_back(features.risk);
    return x;
}

double risk_calibrated_confidence(const ConfidenceFeatures& features, const ConfidenceHead& head) {
    if (head.weights.size() != features.hidden.size() + 3) {
        throw ValidationError("confidence head expects " + std::to_string(head.weights.size()) +
                              " inputs, features provide " + std::to_string(features.hidden.size() + 3));
    }
    const auto x = head_input(features);
    return sigmoid(std::inner_product(x.begin(), x.end(), head.weights.begin(), head.bias));
}

}  // namespace ludobench::risk
