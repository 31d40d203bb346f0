#pragma once

#include <span>

#include "ludobench/core.hpp"

namespace ludobench::prospect {

/// Power value function plus one-parameter probability weighting. Defaults
/// are the canonical human estimates.
struct ProspectParams {
    double alpha_gain = 0.88;
    double beta_loss = 0.88;
    double kappa = 2.25;
    double gamma_weight = 0.61;

    /// Throws ParameterError when a field leaves its range.
    void validate() const;
};

/// Below this curvature the weighting function stops being monotone.
inline constexpr double kMinGamma = 0.28;
inline constexpr double kMaxGamma = 2.0;

struct ChoiceRecordPT {
    DiscreteDistribution risky;
    DiscreteDistribution conservative;
    bool chose_risky = false;
};

/// w(p) = p^g / (p^g + (1-p)^g)^(1/g).
double decision_weight(double p, double gamma);

double value_function(double x, const ProspectParams& params);

/// Sum of w(p_i) v(x_i) in declared order.
double prospect_value(const DiscreteDistribution& prospect, const ProspectParams& params);

/// Logistic choice rule: P(choose a).
double choice_prob(double value_a, double value_b, double temperature);

/// Log-likelihood of the observed choices for the parameters given.
double choice_log_likelihood(std::span<const ChoiceRecordPT> records, const ProspectParams& params,
                             double temperature);

inline constexpr double kKappaLow = 1.0;
inline constexpr double kKappaHigh = 5.0;
inline constexpr std::size_t kMinFitRecords = 50;

/// Maximum-likelihood loss-aversion coefficient on [1, 5] by golden-section
/// search (tolerance 1e-3). Only kappa is fit; `fixed.kappa` is ignored.
double fit_loss_aversion(std::span<const ChoiceRecordPT> records, const ProspectParams& fixed,
                         double temperature = 1.0);

}  // namespace ludobench::prospect
