#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ludobench/metrics.hpp"

namespace ludobench::analysis {

struct WeightVector {
    std::vector<double> weights;
    std::vector<bool> mask;
};

/// Shannon entropy (nats) of the weights renormalized over the mask.
double subset_entropy(const WeightVector& wv);

struct LabeledVectors {
    std::vector<std::vector<double>> vectors;
    /// true = high-risk
    std::vector<bool> labels;
};

/// Unit vector along mean(high) - mean(low).
std::vector<double> risk_direction(const LabeledVectors& data);
double risk_projection(std::span<const double> vector, std::span<const double> direction);

/// (mean_a - mean_b)^2 / (var_a + var_b), population variances. Returns
/// +infinity when both variances vanish and the means differ.
double fisher_ratio(std::span<const double> group_a, std::span<const double> group_b);

struct DynamicsFit {
    double slope_on_error = 0.0;
    double intercept = 0.0;
    double residual_std = 0.0;
};

inline constexpr std::size_t kMinDynamicsLength = 10;

/// OLS of confidence(t+1) - confidence(t) on the error indicator at t.
DynamicsFit confidence_dynamics_fit(const metrics::EpisodeTrace& trace);

struct ScoredObservation {
    std::vector<double> scores;
    std::size_t observed = 0;
};

inline constexpr std::size_t kMinTemperatureObservations = 50;
inline constexpr double kTemperatureLow = 0.05;
inline constexpr double kTemperatureHigh = 20.0;

/// Mean negative log-likelihood of the observed labels under softmax(scores / T).
double temperature_nll(std::span<const ScoredObservation> data, double temperature);
/// Golden-section minimizer of temperature_nll on [0.05, 20], tolerance 1e-3.
double fit_temperature(std::span<const ScoredObservation> data);

}  // namespace ludobench::analysis
