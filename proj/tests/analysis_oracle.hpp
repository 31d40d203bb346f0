#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ludobench/analysis.hpp"
#include "ludobench/core.hpp"
#include "ludobench/metrics.hpp"

namespace lbtest {

/// Confidence trace where each step after an error moves by `slope` plus
/// Gaussian noise, and by noise alone otherwise.
inline ludobench::metrics::EpisodeTrace planted_dynamics_trace(double slope, double sigma, int length,
                                                               std::uint64_t seed) {
    ludobench::Rng rng(seed);
    ludobench::metrics::EpisodeTrace t;
    double c = 0.5;
    for (int i = 0; i < length; ++i) {
        const bool err = rng.unit() < 0.4;
        t.steps.push_back({0.3, c, err, err});
        c += (err ? slope : 0.0) + rng.normal(0.0, sigma);
    }
    return t;
}

/// Four-way scores with labels drawn from softmax(scores / temperature).
inline std::vector<ludobench::analysis::ScoredObservation> softmax_samples(int n, double temperature,
                                                                           std::uint64_t seed) {
    ludobench::Rng rng(seed);
    std::vector<ludobench::analysis::ScoredObservation> out;
    for (int i = 0; i < n; ++i) {
        std::vector<double> s(4);
        for (auto& x : s) x = rng.normal(0.0, 1.5);
        double z = 0.0;
        for (double x : s) z += std::exp(x / temperature);
        double u = rng.unit() * z;
        std::size_t k = 0;
        while (k + 1 < s.size() && (u -= std::exp(s[k] / temperature)) > 0.0) ++k;
        out.push_back({s, k});
    }
    return out;
}

inline std::vector<ludobench::analysis::ScoredObservation> scaled(
    std::vector<ludobench::analysis::ScoredObservation> data, double factor) {
    for (auto& o : data) {
        for (auto& x : o.scores) x *= factor;
    }
    return data;
}

}  // namespace lbtest
