#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "analysis_oracle.hpp"
#include "ludobench/analysis.hpp"
#include "ludobench/error.hpp"

using namespace ludobench;
using namespace ludobench::analysis;

TEST_CASE("subset entropy") {
    CHECK(subset_entropy({{0.0, 3.0, 0.0}, {true, true, true}}) == 0.0);
    CHECK(std::abs(subset_entropy({{1, 1, 1, 1}, {true, true, true, true}}) - std::log(4.0)) <= 1e-12);
    CHECK(subset_entropy({{2, 2, 0, 0}, {true, true, false, false}}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(subset_entropy({{5, 5, 9, 1}, {true, true, false, false}}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(subset_entropy({{0, 0}, {true, true}}), Error);
}

TEST_CASE("risk direction and projection") {
    LabeledVectors one{{{1.0}, {0.0}}, {true, false}};
    const auto d = risk_direction(one);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == doctest::Approx(1.0));
    LabeledVectors same{{{1.0, 2.0}, {1.0, 2.0}}, {true, false}};
    CHECK_THROWS_AS(risk_direction(same), DegenerateDirectionError);
    const std::vector<double> v{3.0, 4.0};
    const std::vector<double> u{0.6, 0.8};
    CHECK(risk_projection(v, u) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(risk_projection(std::vector<double>{-0.8, 0.6}, u) == doctest::Approx(0.0));
    CHECK(risk_projection(u, u) == doctest::Approx(1.0));
}

TEST_CASE("risk direction recovers the planted axis") {
    Rng rng(5);
    LabeledVectors data;
    for (int i = 0; i < 1000; ++i) {
        const bool high = i % 2 == 0;
        data.vectors.push_back({rng.normal(high ? 2.0 : 0.0, 1.0), rng.normal(0.0, 1.0)});
        data.labels.push_back(high);
    }
    const auto d = risk_direction(data);
    const double angle = std::acos(std::clamp(d[0], -1.0, 1.0)) * 180.0 / std::numbers::pi;
    CHECK(angle < 5.0);
}

TEST_CASE("fisher ratio") {
    const std::vector<double> a{0.0, 1.0};
    const std::vector<double> b{4.0, 5.0};
    CHECK(fisher_ratio(a, a) == 0.0);
    CHECK(fisher_ratio(a, b) == doctest::Approx(32.0).epsilon(1e-14));
    CHECK(fisher_ratio(std::vector<double>{10.0, 11.0}, std::vector<double>{14.0, 15.0}) ==
          doctest::Approx(32.0).epsilon(1e-14));
    CHECK(std::isinf(fisher_ratio(std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 2.0})));
}

TEST_CASE("confidence dynamics on noiseless and constant traces") {
    metrics::EpisodeTrace t;
    double c = 0.9;
    for (int i = 0; i < 40; ++i) {
        const bool err = i % 3 == 0;
        t.steps.push_back({0.3, c, err, err});
        if (err) c -= 0.05;
    }
    const auto fit = confidence_dynamics_fit(t);
    CHECK(fit.slope_on_error == doctest::Approx(-0.05).epsilon(1e-10));
    CHECK(std::abs(fit.intercept) < 1e-12);

    metrics::EpisodeTrace flat;
    for (int i = 0; i < 20; ++i) flat.steps.push_back({0.3, 0.6, i % 2 == 0, i % 2 == 0});
    CHECK(confidence_dynamics_fit(flat).slope_on_error == 0.0);

    metrics::EpisodeTrace tiny;
    for (int i = 0; i < 5; ++i) tiny.steps.push_back({0.3, 0.6, i % 2 == 0, i % 2 == 0});
    CHECK_THROWS_AS(confidence_dynamics_fit(tiny), EstimationError);
}

TEST_CASE("confidence dynamics recovers a planted slope") {
    const auto fit = confidence_dynamics_fit(lbtest::planted_dynamics_trace(0.05, 0.005, 500, 21));
    CHECK(std::abs(fit.slope_on_error - 0.05) <= 0.01);
}

TEST_CASE("temperature fitting") {
    const auto data = lbtest::softmax_samples(10000, 1.0, 41);
    CHECK(std::abs(fit_temperature(data) - 1.0) <= 0.05);
    CHECK(std::abs(fit_temperature(lbtest::scaled(data, 2.0)) - 2.0) <= 0.1);
    CHECK_THROWS_AS(fit_temperature(std::vector<ScoredObservation>{{{0.1, 0.2}, 0}}), EstimationError);
    CHECK(temperature_nll(data, 1.0) < temperature_nll(data, 3.0));
}
