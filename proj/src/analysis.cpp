#include "ludobench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ludobench/error.hpp"
#include "ludobench/optimize.hpp"

namespace ludobench::analysis {

double subset_entropy(const WeightVector& wv) {
    if (wv.weights.size() != wv.mask.size()) throw ValidationError("subset_entropy: mask length mismatch");
    double mass = 0.0;
    for (std::size_t i = 0; i < wv.weights.size(); ++i) {
        if (wv.weights[i] < 0.0) throw ValidationError("subset_entropy: negative weight");
        if (wv.mask[i]) mass += wv.weights[i];
    }
    if (!(mass > 0.0)) throw EstimationError("subset_entropy: no positive mass inside the subset");
    double h = 0.0;
    for (std::size_t i = 0; i < wv.weights.size(); ++i) {
        if (!wv.mask[i] || wv.weights[i] == 0.0) continue;
        const double p = wv.weights[i] / mass;
        h -= p * std::log(p);
    }
    return h;
}

std::vector<double> risk_direction(const LabeledVectors& data) {
    if (data.vectors.size() != data.labels.size()) throw ValidationError("risk_direction: label count mismatch");
    if (data.vectors.empty() || data.vectors.front().empty()) throw ValidationError("risk_direction: no data");
    const std::size_t dim = data.vectors.front().size();
    std::vector<double> hi(dim, 0.0);
    std::vector<double> lo(dim, 0.0);
    std::size_t n_hi = 0;
    std::size_t n_lo = 0;
    for (std::size_t i = 0; i < data.vectors.size(); ++i) {
        const auto& v = data.vectors[i];
        if (v.size() != dim) throw ValidationError("risk_direction: vectors differ in dimension");
        auto& acc = data.labels[i] ? hi : lo;
        (data.labels[i] ? n_hi : n_lo) += 1;
        for (std::size_t k = 0; k < dim; ++k) acc[k] += v[k];
    }
    if (n_hi == 0 || n_lo == 0) throw ValidationError("risk_direction: both classes must be non-empty");
    std::vector<double> d(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        d[k] = hi[k] / static_cast<double>(n_hi) - lo[k] / static_cast<double>(n_lo);
    }
    const double norm = std::sqrt(std::inner_product(d.begin(), d.end(), d.begin(), 0.0));
    if (!(norm > 0.0)) throw DegenerateDirectionError("risk_direction: class means coincide");
    for (auto& x : d) x /= norm;
    return d;
}

double risk_projection(std::span<const double> vector, std::span<const double> direction) {
    if (vector.size() != direction.size()) throw ValidationError("risk_projection: dimension mismatch");
    return std::inner_product(vector.begin(), vector.end(), direction.begin(), 0.0);
}

namespace {

std::pair<double, double> mean_var(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double v = 0.0;
    for (double xi : x) v += (xi - m) * (xi - m);
    return {m, v / n};
}

}  // namespace

double fisher_ratio(std::span<const double> group_a, std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2) throw EstimationError("fisher_ratio: each group needs 2 samples");
    const auto [ma, va] = mean_var(group_a);
    const auto [mb, vb] = mean_var(group_b);
    const double gap = (ma - mb) * (ma - mb);
    if (gap == 0.0) return 0.0;
    if (va + vb == 0.0) return std::numeric_limits<double>::infinity();
    return gap / (va + vb);
}

DynamicsFit confidence_dynamics_fit(const metrics::EpisodeTrace& trace) {
    const auto& s = trace.steps;
    if (s.size() < kMinDynamicsLength) throw EstimationError("confidence_dynamics_fit: trace shorter than 10");
    const std::size_t n = s.size() - 1;
    std::size_t n_err = 0;
    double sum_err = 0.0;
    double sum_ok = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double dc = s[t + 1].confidence - s[t].confidence;
        if (s[t].error) {
            ++n_err;
            sum_err += dc;
        } else {
            sum_ok += dc;
        }
    }
    const std::size_t n_ok = n - n_err;
    if (n_err < 2 || n_ok < 2) throw EstimationError("confidence_dynamics_fit: needs 2 error and 2 non-error steps");
    // With a single binary regressor OLS reduces to the two group means.
    DynamicsFit fit;
    fit.intercept = sum_ok / static_cast<double>(n_ok);
    fit.slope_on_error = sum_err / static_cast<double>(n_err) - fit.intercept;
    double rss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double dc = s[t + 1].confidence - s[t].confidence;
        const double r = dc - fit.intercept - (s[t].error ? fit.slope_on_error : 0.0);
        rss += r * r;
    }
    fit.residual_std = std::sqrt(rss / static_cast<double>(n - 2));
    return fit;
}

double temperature_nll(std::span<const ScoredObservation> data, double temperature) {
    double nll = 0.0;
    for (const auto& obs : data) {
        const double m = *std::ranges::max_element(obs.scores) / temperature;
        double z = 0.0;
        for (double s : obs.scores) z += std::exp(s / temperature - m);
        nll -= obs.scores[obs.observed] / temperature - m - std::log(z);
    }
    return nll / static_cast<double>(data.size());
}

double fit_temperature(std::span<const ScoredObservation> data) {
    if (data.size() < kMinTemperatureObservations) throw EstimationError("fit_temperature: fewer than 50 observations");
    for (const auto& obs : data) {
        if (obs.scores.size() < 2) throw EstimationError("fit_temperature: observations need 2 labels");
        if (obs.observed >= obs.scores.size()) throw ValidationError("fit_temperature: observed label out of range");
    }
    return golden_section_minimize([&](double t) { return temperature_nll(data, t); }, kTemperatureLow,
                                   kTemperatureHigh, 1e-3);
}

}  // namespace ludobench::analysis
