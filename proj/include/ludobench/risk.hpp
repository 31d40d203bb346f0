#pragma once

#include <span>
#include <vector>

#include "ludobench/core.hpp"

namespace ludobench::risk {

/// Weights of the factual / controversy / uncertainty composite. Sum to one.
struct RiskWeights {
    double w_factual = 0.5;
    double w_controversy = 0.25;
    double w_uncertainty = 0.25;

    void validate() const;
};

struct RiskComponents {
    double factual = 0.0;
    double controversy = 0.0;
    double uncertainty = 0.0;

    void validate() const;
};

struct ConfidenceFeatures {
    std::vector<double> hidden;
    double u_epistemic = 0.0;
    double u_aleatoric = 0.0;
    double risk = 0.0;
};

/// Logistic head over [hidden..., u_epi, u_ale, risk].
struct ConfidenceHead {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Cumulative-probability slack when comparing F(l) against alpha, so that
/// decimal literals such as {0.3, 0.6, 0.1} hit the 0.9 quantile exactly.
inline constexpr double kQuantileSlack = 1e-12;

/// Lower alpha-quantile of the loss distribution.
double value_at_risk(const DiscreteDistribution& losses, double alpha);

/// Rockafellar-Uryasev: VaR + E[(L - VaR)^+] / (1 - alpha).
double conditional_var(const DiscreteDistribution& losses, double alpha);

/// VaR + lambda * CVaR.
double risk_measure(const DiscreteDistribution& losses, double alpha = 0.95, double lambda = 0.5);

double composite_risk(const RiskComponents& components, const RiskWeights& weights);

double sigmoid(double x) noexcept;

/// Concatenates hidden ++ [u_epi, u_ale, risk] and applies the head.
double risk_calibrated_confidence(const ConfidenceFeatures& features, const ConfidenceHead& head);

/// Flattened head input; exposed for training.
std::vector<double> head_input(const ConfidenceFeatures& features);

}  // namespace ludobench::risk
