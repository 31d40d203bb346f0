#include "ludobench/prospect.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ludobench/error.hpp"
#include "ludobench/optimize.hpp"

namespace ludobench::prospect {

void ProspectParams::validate() const {
    if (!(alpha_gain > 0.0 && alpha_gain <= 1.0)) throw ParameterError("alpha_gain must lie in (0,1]");
    if (!(beta_loss > 0.0 && beta_loss <= 1.0)) throw ParameterError("beta_loss must lie in (0,1]");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("kappa must be positive");
    if (!(gamma_weight > kMinGamma && gamma_weight <= kMaxGamma)) {
        throw ParameterError("gamma_weight must lie in (0.28, 2]");
    }
}

double decision_weight(double p, double gamma) {
    if (!(gamma > kMinGamma && gamma <= kMaxGamma)) {
        throw ParameterError("decision weight curvature " + std::to_string(gamma) + " outside (0.28, 2]");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("probability outside [0,1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    const double a = std::pow(p, gamma);
    const double b = std::pow(1.0 - p, gamma);
    return a / std::pow(a + b, 1.0 / gamma);
}

double value_function(double x, const ProspectParams& params) {
    if (x >= 0.0) return std::pow(x, params.alpha_gain);
    return -params.kappa * std::pow(-x, params.beta_loss);
}

double prospect_value(const DiscreteDistribution& prospect, const ProspectParams& params) {
    double v = 0.0;
    for (const auto& o : prospect.outcomes()) {
        v += decision_weight(o.probability, params.gamma_weight) * value_function(o.value, params);
    }
    return v;
}

double choice_prob(double value_a, double value_b, double temperature) {
    if (!(temperature > 0.0)) throw ParameterError("choice temperature must be positive");
    return 1.0 / (1.0 + std::exp(-(value_a - value_b) / temperature));
}

double choice_log_likelihood(std::span<const ChoiceRecordPT> records, const ProspectParams& params,
                             double temperature) {
    double ll = 0.0;
    for (const auto& r : records) {
        const double diff = (prospect_value(r.risky, params) - prospect_value(r.conservative, params)) / temperature;
        // log sigmoid(+-diff), written to stay finite for large |diff|.
        const double s = r.chose_risky ? diff : -diff;
        ll += s >= 0.0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
    }
    return ll;
}

double fit_loss_aversion(std::span<const ChoiceRecordPT> records, const ProspectParams& fixed,
                         double temperature) {
    if (records.size() < kMinFitRecords) {
        throw EstimationError("loss aversion needs at least 50 choice records, got " +
                              std::to_string(records.size()));
    }
    const bool any_loss = std::ranges::any_of(records, [](const ChoiceRecordPT& r) {
        return r.risky.has_negative_outcome() || r.conservative.has_negative_outcome();
    });
    if (!any_loss) throw EstimationError("no record involves a loss; kappa is unidentifiable");
    if (!(temperature > 0.0)) throw ParameterError("choice temperature must be positive");

    ProspectParams p = fixed;
    p.kappa = 1.0;
    p.validate();
    auto neg_ll = [&](double kappa) {
        p.kappa = kappa;
        return -choice_log_likelihood(records, p, temperature);
    };
    return golden_section_minimize(neg_ll, kKappaLow, kKappaHigh, 1e-3);
}

}  // namespace ludobench::prospect
