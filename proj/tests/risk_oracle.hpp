#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "ludobench/core.hpp"

namespace lbtest {

/// Enumeration oracle: sort the support, walk the CDF for VaR, and take the
/// minimum of the Rockafellar-Uryasev objective over every support point
/// for CVaR (the objective is piecewise linear with kinks only there).
inline std::pair<double, double> brute_var_cvar(const std::vector<ludobench::Outcome>& outcomes, double alpha) {
    auto sorted = outcomes;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.value < b.value; });
    double var = sorted.back().value;
    double cdf = 0.0;
    for (const auto& o : sorted) {
        cdf += o.probability;
        if (cdf >= alpha - 1e-12) {
            var = o.value;
            break;
        }
    }
    double cvar = std::numeric_limits<double>::infinity();
    for (const auto& t : sorted) {
        double tail = 0.0;
        for (const auto& o : sorted) tail += o.probability * std::max(0.0, o.value - t.value);
        cvar = std::min(cvar, t.value + tail / (1.0 - alpha));
    }
    return {var, cvar};
}

/// Random loss distribution with 1..6 distinct outcomes.
inline std::vector<ludobench::Outcome> random_losses(ludobench::Rng& rng) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<ludobench::Outcome> out;
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) total += (x = rng.uniform(0.05, 1.0));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double value = 0.0;
        bool fresh = false;
        while (!fresh) {
            value = std::round(rng.uniform(-50.0, 100.0) * 4.0) / 4.0;
            fresh = std::none_of(out.begin(), out.end(), [&](auto& o) { return o.value == value; });
        }
        const double p = i + 1 == n ? 1.0 - acc : w[i] / total;
        acc += p;
        out.push_back({value, p});
    }
    return out;
}

}  // namespace lbtest
