#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ludobench/agents.hpp"
#include "ludobench/error.hpp"
#include "support.hpp"

using namespace ludobench;
using namespace ludobench::agents;

namespace {

/// Conservative option B has the higher EU.
Scenario two_way() {
    Scenario s;
    s.id = "t";
    s.options = {ScenarioOption{"A", "", {0.8, 0.6, 0.6}, 0.4, 0.3, 0.5},
                 ScenarioOption{"B", "", {0.1, 0.1, 0.1}, 0.9, 0.7, 0.6}};
    return s;
}

ScriptedProfile profile(ScriptedKind k) {
    ScriptedProfile p;
    p.kind = k;
    return p;
}

}  // namespace

TEST_CASE("rational picks the higher EU option with its p_correct") {
    const auto a = scripted_act(profile(ScriptedKind::rational_calibrated), two_way(), AgentMemory{});
    CHECK(a.label == "B");
    CHECK(a.confidence == 0.6);
}

TEST_CASE("overconfident adds the bias") {
    auto p = profile(ScriptedKind::overconfident);
    p.bias = 0.3;
    const auto a = scripted_act(p, two_way(), initial_memory(p));
    CHECK(a.label == "B");
    CHECK(a.confidence == doctest::Approx(0.9).epsilon(1e-14));
    p.bias = 0.9;
    CHECK(scripted_act(p, two_way(), initial_memory(p)).confidence == 1.0);
}

TEST_CASE("loss chaser raises its target after negative feedback") {
    auto p = profile(ScriptedKind::loss_chaser);
    p.chase_increment = 0.1;
    p.baseline_target = 0.2;
    auto m = initial_memory(p);
    CHECK(m.risk_target == 0.2);
    m = update_memory(p, m, true);
    CHECK(m.risk_target == doctest::Approx(0.3).epsilon(1e-14));
    for (int i = 0; i < 20; ++i) m = update_memory(p, m, true);
    CHECK(m.risk_target == 1.0);
}

TEST_CASE("loss chaser decays toward baseline") {
    auto p = profile(ScriptedKind::loss_chaser);
    p.decay = 0.5;
    auto m = update_memory(p, initial_memory(p), true);
    m = update_memory(p, m, false);
    CHECK(m.risk_target == doctest::Approx(0.25));
}

TEST_CASE("hot hand scales bias by the success streak") {
    auto p = profile(ScriptedKind::hot_hand);
    p.bias = 0.05;
    auto m = initial_memory(p);
    m = update_memory(p, m, false);
    m = update_memory(p, m, false);
    CHECK(m.success_streak == 2);
    CHECK(scripted_act(p, two_way(), m).confidence == doctest::Approx(0.7));
    m = update_memory(p, m, true);
    CHECK(m.success_streak == 0);
}

TEST_CASE("risk seeker picks the riskiest option") {
    CHECK(scripted_act(profile(ScriptedKind::risk_seeking), two_way(), AgentMemory{}).label == "A");
}

TEST_CASE("ties go to the lowest label") {
    Scenario s;
    s.options = {ScenarioOption{"B", "", {0.2, 0.2, 0.2}, 0.5, 0.5, 0.5},
                 ScenarioOption{"A", "", {0.2, 0.2, 0.2}, 0.5, 0.5, 0.5}};
    CHECK(scripted_act(profile(ScriptedKind::rational_calibrated), s, AgentMemory{}).label == "A");
}

TEST_CASE("profile validation") {
    auto p = profile(ScriptedKind::overconfident);
    p.bias = -0.1;
    CHECK_THROWS_AS(p.validate(), Error);
    auto d = profile(ScriptedKind::loss_chaser);
    d.decay = 1.5;
    CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("scripted agents are deterministic") {
    const auto& bank = lbtest::default_bank();
    for (auto kind : {ScriptedKind::rational_calibrated, ScriptedKind::loss_chaser, ScriptedKind::hot_hand}) {
        ScriptedAgent a(profile(kind));
        ScriptedAgent b(profile(kind));
        a.begin_episode(RngState{3});
        b.begin_episode(RngState{3});
        for (std::size_t t = 0; t < bank.scenarios.size(); ++t) {
            const auto& s = bank.scenarios[t];
            const auto x = a.choose_option(s, {t});
            const auto y = b.choose_option(s, {t});
            REQUIRE(x.label == y.label);
            REQUIRE(x.confidence == y.confidence);
            a.observe_feedback(s, *s.find_label(x.label), t % 3 == 0);
            b.observe_feedback(s, *s.find_label(y.label), t % 3 == 0);
        }
    }
}

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536).epsilon(1e-6));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-6));
}

TEST_CASE("toy policy with zero theta is uniform") {
    ToyPolicy pol;
    const auto& s = lbtest::default_bank().scenarios[0];
    const auto p = softmax(toy_scores(pol, s));
    for (double v : p) CHECK(v == doctest::Approx(1.0 / static_cast<double>(s.options.size())));
}

TEST_CASE("toy policy aligned with quality saturates on the optimal option") {
    ToyPolicy pol;
    pol.theta = {50.0, 0.0, 0.0, 0.0, 0.0};
    for (const auto& s : lbtest::default_bank().scenarios) {
        const auto p = softmax(toy_scores(pol, s));
        CHECK(p[s.quality_optimal_index()] > 0.99);
    }
}

TEST_CASE("toy policy sampling is deterministic per seed") {
    ToyPolicy pol;
    pol.theta = {1.0, -0.5, 0.2, 0.1, 0.8};
    const auto& bank = lbtest::default_bank();
    Rng r1(8);
    Rng r2(8);
    for (const auto& s : bank.scenarios) {
        const auto a = toy_policy_act(pol, s, r1);
        const auto b = toy_policy_act(pol, s, r2);
        REQUIRE(a.index == b.index);
        REQUIRE(a.confidence == b.confidence);
    }
}

TEST_CASE("toy head features") {
    const auto s = two_way();
    const std::vector<double> probs{0.3, 0.7};
    const auto f = toy_head_features(s, 0, probs, risk::RiskWeights{});
    CHECK(f.hidden.size() == kFeatureDim);
    CHECK(f.u_epistemic == doctest::Approx(0.3));
    CHECK(f.u_aleatoric == 0.6);
    CHECK(f.risk == doctest::Approx(0.5 * 0.8 + 0.25 * 0.6 + 0.25 * 0.6));
}

TEST_CASE("toy policy rejects a wrong dimension") {
    ToyPolicy pol;
    pol.theta = {1.0, 2.0};
    CHECK_THROWS_AS(pol.validate(), ValidationError);
}

TEST_CASE("event scenario probability equals softmax mass on the event") {
    ToyPolicy pol;
    pol.theta = {1.0, -1.0, 0.0, 0.0, 1.0};
    ToyAgent agent(pol);
    const ProbabilityItem item{"x", "", 0.8, FallacyTag::none};
    const auto p = softmax(toy_scores(pol, event_scenario(0.8)));
    CHECK(agent.estimate_probability(item) == doctest::Approx(p[0]).epsilon(1e-14));
    const auto scores = agent.probability_scores(item);
    REQUIRE(scores.has_value());
    CHECK(1.0 / (1.0 + std::exp((*scores)[1] - (*scores)[0])) == doctest::Approx(p[0]).epsilon(1e-12));
}

TEST_CASE("deck expectancies weigh losses by the loss-aversion factor") {
    std::vector<IowaDraw> h{{Deck::A, 100, 300}};
    DeckLearner plain;
    DeckLearner averse;
    averse.loss_aversion = 2.25;
    CHECK(deck_expectancies(averse, h)[0] < deck_expectancies(plain, h)[0]);
    CHECK(deck_expectancies(plain, h)[1] == 0.0);
}
