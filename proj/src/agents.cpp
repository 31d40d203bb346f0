#include "ludobench/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ludobench/error.hpp"

namespace ludobench::agents {

std::string_view to_string(ScriptedKind k) noexcept {
    switch (k) {
        case ScriptedKind::rational_calibrated: return "rational_calibrated";
        case ScriptedKind::overconfident: return "overconfident";
        case ScriptedKind::loss_chaser: return "loss_chaser";
        case ScriptedKind::hot_hand: return "hot_hand";
        case ScriptedKind::risk_seeking: return "risk_seeking";
    }
    return "unknown";
}

std::optional<ScriptedKind> parse_scripted_kind(std::string_view s) noexcept {
    for (auto k : {ScriptedKind::rational_calibrated, ScriptedKind::overconfident, ScriptedKind::loss_chaser,
                   ScriptedKind::hot_hand, ScriptedKind::risk_seeking}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

void ScriptedProfile::validate() const {
    if (!(bias >= 0.0)) throw ValidationError("scripted profile: bias must be non-negative");
    if (!(chase_increment >= 0.0)) throw ValidationError("scripted profile: chase_increment must be non-negative");
    if (!(decay >= 0.0 && decay <= 1.0)) throw ValidationError("scripted profile: decay must lie in [0,1]");
    if (!(baseline_target >= 0.0 && baseline_target <= 1.0)) {
        throw ValidationError("scripted profile: baseline_target must lie in [0,1]");
    }
}

AgentMemory initial_memory(const ScriptedProfile& profile) noexcept { return {profile.baseline_target, 0}; }

AgentMemory update_memory(const ScriptedProfile& profile, AgentMemory memory, bool negative_feedback) noexcept {
    if (negative_feedback) {
        memory.risk_target = std::min(1.0, memory.risk_target + profile.chase_increment);
        memory.success_streak = 0;
    } else {
        memory.risk_target =
            profile.baseline_target + (memory.risk_target - profile.baseline_target) * (1.0 - profile.decay);
        ++memory.success_streak;
    }
    return memory;
}

namespace {

/// Index maximizing key(option); ties go to the lexicographically lowest label.
template <class Key>
std::size_t argmax_by(const Scenario& s, Key key) {
    std::size_t best = 0;
    double best_key = key(0);
    for (std::size_t i = 1; i < s.options.size(); ++i) {
        const double k = key(i);
        if (k > best_key || (k == best_key && s.options[i].label < s.options[best].label)) {
            best = i;
            best_key = k;
        }
    }
    return best;
}

}  // namespace

double scripted_confidence(const ScriptedProfile& profile, const ScenarioOption& option, const AgentMemory& memory) {
    switch (profile.kind) {
        case ScriptedKind::overconfident: return std::min(1.0, option.p_correct + profile.bias);
        case ScriptedKind::hot_hand:
            return std::min(1.0, option.p_correct + profile.bias * static_cast<double>(memory.success_streak));
        default: return option.p_correct;
    }
}

ScriptedAction scripted_act(const ScriptedProfile& profile, const Scenario& scenario, const AgentMemory& memory,
                            const risk::RiskWeights& weights) {
    if (scenario.options.empty()) throw ValidationError("scenario " + scenario.id + " has no options");
    auto risk_of = [&](std::size_t i) { return risk::composite_risk(scenario.options[i].risk_components, weights); };
    std::size_t idx = 0;
    switch (profile.kind) {
        case ScriptedKind::rational_calibrated:
        case ScriptedKind::overconfident:
        case ScriptedKind::hot_hand:
            idx = argmax_by(scenario, [&](std::size_t i) { return scenario.options[i].expected_utility; });
            break;
        case ScriptedKind::loss_chaser:
            idx = argmax_by(scenario, [&](std::size_t i) { return -std::abs(risk_of(i) - memory.risk_target); });
            break;
        case ScriptedKind::risk_seeking: idx = argmax_by(scenario, risk_of); break;
    }
    const auto& opt = scenario.options[idx];
    return {idx, opt.label, scripted_confidence(profile, opt, memory)};
}

double scripted_probability(const ScriptedProfile& profile, const ProbabilityItem& item) noexcept {
    const double p = item.p_true;
    double out = p;
    if (profile.kind == ScriptedKind::overconfident) {
        const double dir = p > 0.5 ? 1.0 : (p < 0.5 ? -1.0 : 0.0);
        out = p + profile.bias * dir;
    } else if (profile.kind == ScriptedKind::hot_hand) {
        switch (item.fallacy_tag) {
            case FallacyTag::hot_hand: out = p + profile.bias; break;
            case FallacyTag::gamblers_fallacy: out = p - profile.bias; break;
            case FallacyTag::base_rate: out = p + profile.bias * (1.0 - 2.0 * p); break;
            case FallacyTag::none: break;
        }
    }
    return std::clamp(out, 0.0, 1.0);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal quantile needs p in (0,1)");
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
        (cdf < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Deck best_mean_deck(const std::vector<IowaDraw>& history) {
    std::array<double, 4> sum{};
    std::array<std::size_t, 4> count{};
    for (const auto& d : history) {
        sum[static_cast<int>(d.deck)] += d.net();
        ++count[static_cast<int>(d.deck)];
    }
    int best = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < 4; ++d) {
        if (count[d] == 0) continue;
        const double m = sum[d] / static_cast<double>(count[d]);
        if (m > best_mean) {
            best = d;
            best_mean = m;
        }
    }
    return best < 0 ? Deck::A : static_cast<Deck>(best);
}

ScriptedAgent::ScriptedAgent(ScriptedProfile profile, risk::RiskWeights weights)
    : profile_(profile), weights_(weights), memory_(initial_memory(profile)) {
    profile_.validate();
    weights_.validate();
}

std::string ScriptedAgent::kind() const { return std::string(to_string(profile_.kind)); }

void ScriptedAgent::begin_episode(RngState stream) {
    memory_ = initial_memory(profile_);
    rng_ = Rng(stream);
}

ChoiceAnswer ScriptedAgent::choose_option(const Scenario& scenario, const ChoiceContext&) {
    const auto a = scripted_act(profile_, scenario, memory_, weights_);
    ChoiceAnswer out;
    out.label = a.label;
    out.confidence = a.confidence;
    return out;
}

void ScriptedAgent::observe_feedback(const Scenario&, std::size_t, bool negative) {
    memory_ = update_memory(profile_, memory_, negative);
}

std::optional<double> ScriptedAgent::confidence_for(const Scenario& scenario, std::size_t option) const {
    return scripted_confidence(profile_, scenario.options.at(option), memory_);
}

double ScriptedAgent::estimate_probability(const ProbabilityItem& item) { return scripted_probability(profile_, item); }

Interval ScriptedAgent::give_interval(const IntervalItem& item) {
    if (profile_.kind != ScriptedKind::overconfident) return {item.true_value, item.true_value};
    // Noisy point estimate with a band too narrow for the requested level.
    const double sd = item.true_value != 0.0 ? 0.1 * std::abs(item.true_value) : 0.1;
    const double estimate = item.true_value + rng_.normal(0.0, sd);
    const double shrink = std::max(0.0, 1.0 - profile_.bias);
    const double half = normal_quantile(0.5 * (1.0 + item.nominal_level)) * sd * shrink;
    return {estimate - half, estimate + half};
}

Deck ScriptedAgent::pick_deck(const DeckObservation& obs) {
    const auto& history = *obs.history;
    if (profile_.kind == ScriptedKind::risk_seeking) {
        if (obs.pick_index < 4) return static_cast<Deck>(obs.pick_index % 4);
        // Chase the largest per-card reward seen.
        Deck best = Deck::A;
        double best_reward = -1.0;
        for (const auto& d : history) {
            if (d.reward > best_reward || (d.reward == best_reward && d.deck < best)) {
                best = d.deck;
                best_reward = d.reward;
            }
        }
        return best;
    }
    if (obs.pick_index < kDeckExplorationPicks) return static_cast<Deck>(obs.pick_index % 4);
    if (profile_.kind == ScriptedKind::loss_chaser && !history.empty() && history.back().net() < 0.0) {
        Deck best = Deck::A;
        double best_reward = -1.0;
        for (const auto& d : history) {
            if (d.reward > best_reward) {
                best = d.deck;
                best_reward = d.reward;
            }
        }
        return best;
    }
    return best_mean_deck(history);
}

ChoiceAnswer RandomAgent::choose_option(const Scenario& scenario, const ChoiceContext&) {
    ChoiceAnswer out;
    out.label = scenario.options[rng_.below(scenario.options.size())].label;
    out.confidence = rng_.unit();
    return out;
}

double RandomAgent::estimate_probability(const ProbabilityItem&) { return rng_.unit(); }

Interval RandomAgent::give_interval(const IntervalItem& item) {
    const double scale = std::max(1.0, std::abs(item.true_value));
    double a = item.true_value + scale * rng_.uniform(-1.0, 1.0);
    double b = item.true_value + scale * rng_.uniform(-1.0, 1.0);
    if (a > b) std::swap(a, b);
    return {a, b};
}

Deck RandomAgent::pick_deck(const DeckObservation&) { return static_cast<Deck>(rng_.below(4)); }

// ---------------------------------------------------------------------------
// Toy policy
// ---------------------------------------------------------------------------

FeatureVector option_features(const ScenarioOption& o) noexcept {
    return {o.quality, o.risk_components.factual, o.risk_components.controversy, o.risk_components.uncertainty,
            o.expected_utility};
}

void ToyPolicy::validate() const {
    if (theta.size() != kFeatureDim) throw ValidationError("toy policy: theta must have 5 entries");
    if (head.weights.size() != kHeadDim) throw ValidationError("toy policy: head must have 8 weights");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::ranges::all_of(theta, finite) || !std::ranges::all_of(head.weights, finite) ||
        !std::isfinite(head.bias)) {
        throw ValidationError("toy policy: non-finite parameter");
    }
    if (!(deck.learning_rate > 0.0 && deck.learning_rate <= 1.0)) {
        throw ValidationError("toy policy: deck learning rate must lie in (0,1]");
    }
    if (!(deck.loss_aversion > 0.0) || !(deck.payoff_scale > 0.0) || !(deck.sensitivity >= 0.0)) {
        throw ValidationError("toy policy: invalid deck learner parameters");
    }
}

std::vector<double> toy_scores(const ToyPolicy& policy, const Scenario& scenario) {
    if (policy.theta.size() != kFeatureDim) {
        throw ValidationError("toy policy has " + std::to_string(policy.theta.size()) +
                              " weights, feature map has 5");
    }
    std::vector<double> scores;
    scores.reserve(scenario.options.size());
    for (const auto& o : scenario.options) {
        const auto f = option_features(o);
        scores.push_back(std::inner_product(f.begin(), f.end(), policy.theta.begin(), 0.0));
    }
    return scores;
}

std::vector<double> softmax(const std::vector<double>& scores) {
    const double m = *std::ranges::max_element(scores);
    std::vector<double> p(scores.size());
    double z = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        p[i] = std::exp(scores[i] - m);
        z += p[i];
    }
    for (auto& v : p) v /= z;
    return p;
}

risk::ConfidenceFeatures toy_head_features(const Scenario& scenario, std::size_t chosen,
                                           const std::vector<double>& probabilities,
                                           const risk::RiskWeights& weights) {
    const auto& opt = scenario.options.at(chosen);
    const auto f = option_features(opt);
    risk::ConfidenceFeatures feats;
    feats.hidden.assign(f.begin(), f.end());
    feats.u_epistemic = 1.0 - *std::ranges::max_element(probabilities);
    feats.u_aleatoric = opt.risk_components.uncertainty;
    feats.risk = risk::composite_risk(opt.risk_components, weights);
    return feats;
}

ToyAction toy_policy_act(const ToyPolicy& policy, const Scenario& scenario, Rng& rng,
                         const risk::RiskWeights& weights) {
    ToyAction a;
    a.scores = toy_scores(policy, scenario);
    a.probabilities = softmax(a.scores);
    const double u = rng.unit();
    double cumulative = 0.0;
    a.index = a.probabilities.size() - 1;
    for (std::size_t i = 0; i < a.probabilities.size(); ++i) {
        cumulative += a.probabilities[i];
        if (u < cumulative) {
            a.index = i;
            break;
        }
    }
    a.label = scenario.options[a.index].label;
    a.confidence = risk::risk_calibrated_confidence(toy_head_features(scenario, a.index, a.probabilities, weights),
                                                    policy.head);
    return a;
}

Scenario event_scenario(double p, const std::string& id) {
    Scenario s;
    s.id = id;
    s.prompt = "Does the event occur?";
    s.tags = {"probability"};
    const double spread = 1.0 - std::abs(2.0 * p - 1.0);
    ScenarioOption yes{"YES", "The event occurs", {1.0 - p, 0.0, spread}, p, p, p};
    ScenarioOption no{"NO", "The event does not occur", {p, 0.0, spread}, 1.0 - p, 1.0 - p, 1.0 - p};
    s.options = {yes, no};
    return s;
}

std::array<double, 4> deck_expectancies(const DeckLearner& learner, const std::vector<IowaDraw>& history) {
    std::array<double, 4> e{};
    for (const auto& d : history) {
        const double u = d.net() / learner.payoff_scale;
        // One gradient step on the (loss-averse) squared prediction error.
        const double weight = u < 0.0 ? learner.loss_aversion : 1.0;
        const double step = std::min(1.0, learner.learning_rate * weight);
        auto& ed = e[static_cast<int>(d.deck)];
        ed += step * (u - ed);
    }
    return e;
}

ToyAgent::ToyAgent(ToyPolicy policy, risk::RiskWeights weights) : policy_(std::move(policy)), weights_(weights) {
    policy_.validate();
    weights_.validate();
}

ChoiceAnswer ToyAgent::choose_option(const Scenario& scenario, const ChoiceContext&) {
    auto a = toy_policy_act(policy_, scenario, rng_, weights_);
    ChoiceAnswer out;
    out.label = a.label;
    out.confidence = a.confidence;
    out.option_probabilities = std::move(a.probabilities);
    out.scores = std::move(a.scores);
    return out;
}

std::optional<double> ToyAgent::confidence_for(const Scenario& scenario, std::size_t option) const {
    const auto p = softmax(toy_scores(policy_, scenario));
    return risk::risk_calibrated_confidence(toy_head_features(scenario, option, p, weights_), policy_.head);
}

double ToyAgent::estimate_probability(const ProbabilityItem& item) {
    return softmax(toy_scores(policy_, event_scenario(item.p_true, item.id)))[0];
}

std::optional<std::array<double, 2>> ToyAgent::probability_scores(const ProbabilityItem& item) const {
    const auto s = toy_scores(policy_, event_scenario(item.p_true, item.id));
    return std::array<double, 2>{s[0], s[1]};
}

Interval ToyAgent::give_interval(const IntervalItem& item) { return {item.true_value, item.true_value}; }

Deck ToyAgent::pick_deck(const DeckObservation& obs) {
    const auto e = deck_expectancies(policy_.deck, *obs.history);
    std::vector<double> scores(e.begin(), e.end());
    for (auto& s : scores) s *= policy_.deck.sensitivity;
    const auto p = softmax(scores);
    const double u = rng_.unit();
    double cumulative = 0.0;
    for (std::size_t d = 0; d < 4; ++d) {
        cumulative += p[d];
        if (u < cumulative) return static_cast<Deck>(d);
    }
    return Deck::D;
}

}  // namespace ludobench::agents
