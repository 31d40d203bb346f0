#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ludobench/error.hpp"
#include "ludobench/risk.hpp"
#include "risk_oracle.hpp"

using namespace ludobench;
using namespace ludobench::risk;

namespace {
const DiscreteDistribution kTail({{0.0, 0.9}, {10.0, 0.1}});
}

TEST_CASE("value at risk") {
    for (double a : {0.5, 0.9, 0.99}) CHECK(value_at_risk(DiscreteDistribution::point_mass(5.0), a) == 5.0);
    CHECK(value_at_risk(kTail, 0.95) == 10.0);
    CHECK(value_at_risk(kTail, 0.5) == 0.0);
    CHECK(value_at_risk(kTail, 0.9) == 0.0);
}

TEST_CASE("conditional value at risk") {
    CHECK(conditional_var(DiscreteDistribution::point_mass(5.0), 0.9) == 5.0);
    CHECK(conditional_var(kTail, 0.9) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(conditional_var(kTail, 0.95) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("alpha outside (0,1) is rejected") {
    CHECK_THROWS_AS(value_at_risk(kTail, 1.0), ParameterError);
    CHECK_THROWS_AS(conditional_var(kTail, 0.0), ParameterError);
}

TEST_CASE("combined risk measure") {
    CHECK(risk_measure(kTail, 0.95, 0.0) == value_at_risk(kTail, 0.95));
    CHECK(risk_measure(DiscreteDistribution::point_mass(5.0), 0.95, 1.0) == 10.0);
    CHECK(risk_measure(kTail, 0.9, 0.5) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("VaR and CVaR agree with enumeration on random distributions") {
    Rng rng(31337);
    for (int trial = 0; trial < 300; ++trial) {
        const auto outcomes = lbtest::random_losses(rng);
        const DiscreteDistribution d(outcomes);
        for (double a : {0.5, 0.9, 0.95, 0.99}) {
            const auto [var, cvar] = lbtest::brute_var_cvar(outcomes, a);
            REQUIRE(std::abs(value_at_risk(d, a) - var) <= 1e-12);
            REQUIRE(std::abs(conditional_var(d, a) - cvar) <= 1e-12 * std::max(1.0, std::abs(cvar)));
            REQUIRE(conditional_var(d, a) >= value_at_risk(d, a));
        }
    }
}

TEST_CASE("composite risk") {
    const RiskWeights w;
    CHECK(composite_risk({0.0, 0.0, 0.0}, w) == 0.0);
    CHECK(composite_risk({0.7, 0.3, 0.9}, RiskWeights{1.0, 0.0, 0.0}) == doctest::Approx(0.7));
    CHECK(composite_risk({0.4, 0.8, 0.2}, w) == doctest::Approx(0.45).epsilon(1e-14));
    CHECK_THROWS_AS((RiskWeights{0.5, 0.5, 0.5}.validate()), ValidationError);
    CHECK_THROWS_AS((RiskComponents{1.2, 0.0, 0.0}.validate()), ValidationError);
}

TEST_CASE("risk calibrated confidence head") {
    ConfidenceFeatures f{{0.0}, 0.5, 0.5, 0.5};
    CHECK(risk_calibrated_confidence(f, ConfidenceHead{{0, 0, 0, 0}, 0.0}) == 0.5);
    CHECK(risk_calibrated_confidence(f, ConfidenceHead{{0, 0, 0, 0}, -20.0}) < 1e-8);
    CHECK(risk_calibrated_confidence(f, ConfidenceHead{{1, 1, 1, 1}, -1.5}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(head_input(f).size() == 4);
    CHECK_THROWS_AS(risk_calibrated_confidence(f, ConfidenceHead{{1, 1}, 0.0}), ValidationError);
}
