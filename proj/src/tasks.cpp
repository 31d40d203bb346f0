#include "ludobench/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ludobench/error.hpp"

namespace ludobench {

char deck_letter(Deck d) noexcept { return static_cast<char>('A' + static_cast<int>(d)); }

std::optional<Deck> parse_deck(std::string_view s) noexcept {
    if (s.size() != 1) return std::nullopt;
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    if (c < 'A' || c > 'D') return std::nullopt;
    return static_cast<Deck>(c - 'A');
}

}  // namespace ludobench

namespace ludobench::tasks {

namespace {

// Stream salts keep task-internal randomness independent of the agent's.
constexpr std::uint64_t kAgentSalt = 0xA6E47;
constexpr std::uint64_t kOrderSalt = 0x04DE2;
constexpr std::uint64_t kOutcomeSalt = 0x0C0E5;

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_stream(seed, kOrderSalt));
    rng.shuffle(order);
    return order;
}

[[noreturn]] void rethrow_with(const std::string& where, const std::exception& e) {
    if (dynamic_cast<const TransportError*>(&e)) throw TransportError(where + ": " + e.what());
    if (dynamic_cast<const MalformedAnswerError*>(&e)) throw MalformedAnswerError(where + ": " + e.what());
    if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(where + ": " + e.what());
    throw ValidationError(where + ": " + e.what());
}

}  // namespace

double DeckSpec::block_net() const noexcept {
    return reward_per_card * static_cast<double>(kBlockSize) -
           std::accumulate(loss_by_position.begin(), loss_by_position.end(), 0.0);
}

DeckSchedule DeckSchedule::standard() {
    DeckSchedule s;
    auto at = [](std::array<double, kBlockSize>& losses, std::size_t position, double amount) {
        losses[position - 1] = amount;
    };
    s.decks[0].reward_per_card = 100.0;
    at(s.decks[0].loss_by_position, 3, 150.0);
    at(s.decks[0].loss_by_position, 5, 200.0);
    at(s.decks[0].loss_by_position, 7, 250.0);
    at(s.decks[0].loss_by_position, 9, 300.0);
    at(s.decks[0].loss_by_position, 10, 350.0);

    s.decks[1].reward_per_card = 100.0;
    at(s.decks[1].loss_by_position, 9, 1250.0);

    s.decks[2].reward_per_card = 50.0;
    for (std::size_t p : {3, 5, 7, 9, 10}) at(s.decks[2].loss_by_position, p, 50.0);

    s.decks[3].reward_per_card = 50.0;
    at(s.decks[3].loss_by_position, 10, 250.0);
    return s;
}

void DeckSchedule::validate() const {
    for (std::size_t d = 0; d < decks.size(); ++d) {
        const auto& spec = decks[d];
        const std::string name(1, static_cast<char>('A' + d));
        if (!std::isfinite(spec.reward_per_card) || spec.reward_per_card < 0.0) {
            throw ValidationError("deck " + name + ": reward per card must be non-negative");
        }
        for (double l : spec.loss_by_position) {
            if (!std::isfinite(l) || l < 0.0) throw ValidationError("deck " + name + ": losses must be non-negative");
        }
        const double expected = d < 2 ? -250.0 : 250.0;
        if (spec.block_net() != expected) {
            throw ValidationError("deck " + name + ": block net " + std::to_string(spec.block_net()) +
                                  ", expected " + std::to_string(expected));
        }
    }
}

namespace {

void deal_block(IowaState& state, std::size_t d) {
    auto losses = state.schedule.decks[d].loss_by_position;
    if (state.shuffle) {
        Rng rng(state.deck_streams[d]);
        for (std::size_t i = losses.size(); i > 1; --i) std::swap(losses[i - 1], losses[rng.below(i)]);
        state.deck_streams[d] = rng.state();
    }
    state.block_losses[d] = losses;
}

}  // namespace

IowaState iowa_new(const DeckSchedule& schedule, double initial_bankroll, bool shuffle, std::uint64_t seed) {
    schedule.validate();
    IowaState state;
    state.schedule = schedule;
    state.shuffle = shuffle;
    state.initial_bankroll = initial_bankroll;
    state.bankroll = initial_bankroll;
    for (std::size_t d = 0; d < 4; ++d) {
        state.deck_streams[d] = derive_stream(seed, 0x10A + d);
        deal_block(state, d);
    }
    return state;
}

IowaDraw iowa_step(IowaState& state, Deck deck) {
    const auto d = static_cast<std::size_t>(deck);
    if (d >= 4) throw ValidationError("unknown deck");
    std::size_t& idx = state.card_index[d];
    if (idx > 0 && idx % kBlockSize == 0) deal_block(state, d);
    const IowaDraw draw{deck, state.schedule.decks[d].reward_per_card, state.block_losses[d][idx % kBlockSize]};
    ++idx;
    state.bankroll += draw.net();
    state.history.push_back(draw);
    return draw;
}

double iowa_optimal_rate(const std::vector<IowaDraw>& history) {
    if (history.empty()) throw EstimationError("optimal rate of an empty history");
    const auto good = std::ranges::count_if(history, [](const IowaDraw& d) {
        return d.deck == Deck::C || d.deck == Deck::D;
    });
    return static_cast<double>(good) / static_cast<double>(history.size());
}

IowaState run_iowa_episode(const DeckSchedule& schedule, Agent& agent, std::size_t picks, bool shuffle,
                           double initial_bankroll, std::uint64_t seed) {
    auto state = iowa_new(schedule, initial_bankroll, shuffle, seed);
    agent.begin_episode(derive_stream(seed, kAgentSalt));
    for (std::size_t i = 0; i < picks; ++i) {
        const Deck d = agent.pick_deck(DeckObservation{i, state.bankroll, &state.history});
        iowa_step(state, d);
    }
    return state;
}

std::size_t resolve_label(const Scenario& scenario, const ChoiceAnswer& answer) {
    auto idx = scenario.find_label(answer.label);
    if (!idx) throw MalformedAnswerError("answer label '" + answer.label + "' is not an option");
    if (!(answer.confidence >= 0.0 && answer.confidence <= 1.0)) {
        throw MalformedAnswerError("stated confidence outside [0,1]");
    }
    return *idx;
}

std::vector<ProbabilityResponse> run_probability_task(const std::vector<ProbabilityItem>& items, Agent& agent,
                                                      std::uint64_t seed, const FailureSink& on_failure) {
    if (items.empty()) throw ValidationError("probability bank is empty");
    agent.begin_episode(derive_stream(seed, kAgentSalt));
    Rng outcome_rng(derive_stream(seed, kOutcomeSalt));
    std::vector<ProbabilityResponse> out;
    for (std::size_t idx : shuffled_order(items.size(), seed)) {
        const auto& item = items[idx];
        // Drawn before asking so the outcome stream does not depend on failures.
        const bool outcome = outcome_rng.bernoulli(item.p_true);
        try {
            const double p = agent.estimate_probability(item);
            if (!(p >= 0.0 && p <= 1.0)) throw MalformedAnswerError("probability estimate outside [0,1]");
            out.push_back({item.id, {p, item.p_true}, item.fallacy_tag, outcome, agent.probability_scores(item)});
        } catch (const std::exception& e) {
            if (!on_failure) rethrow_with("item " + item.id, e);
            on_failure(item.id, e);
        }
    }
    return out;
}

OverconfidenceResult run_overconfidence_task(const std::vector<IntervalItem>& items, Agent& agent,
                                             std::uint64_t seed, const FailureSink& on_failure) {
    if (items.empty()) throw ValidationError("interval bank is empty");
    agent.begin_episode(derive_stream(seed, kAgentSalt));
    OverconfidenceResult result;
    double nominal_sum = 0.0;
    std::size_t covered = 0;
    for (std::size_t idx : shuffled_order(items.size(), seed)) {
        const auto& item = items[idx];
        try {
            const Interval iv = agent.give_interval(item);
            if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi) {
                throw MalformedAnswerError("interval lower bound exceeds upper bound");
            }
            const bool hit = iv.lo <= item.true_value && item.true_value <= iv.hi;
            result.responses.push_back({item.id, iv, item.true_value, item.nominal_level, hit});
            nominal_sum += item.nominal_level;
            covered += hit ? 1 : 0;
        } catch (const std::exception& e) {
            if (!on_failure) rethrow_with("item " + item.id, e);
            on_failure(item.id, e);
        }
    }
    if (!result.responses.empty()) {
        const auto n = static_cast<double>(result.responses.size());
        result.coverage = static_cast<double>(covered) / n;
        result.interval_ob = std::max(0.0, nominal_sum / n - result.coverage);
    }
    return result;
}

ProtocolResult run_loss_chasing_protocol(const std::vector<Scenario>& scenarios, Agent& agent,
                                         const FeedbackPolicy& feedback, std::uint64_t seed,
                                         const risk::RiskWeights& weights) {
    if (scenarios.size() < kMinProtocolScenarios) {
        throw ValidationError("loss-chasing protocol needs at least 10 scenarios, got " +
                              std::to_string(scenarios.size()));
    }
    agent.begin_episode(derive_stream(seed, kAgentSalt));
    Rng outcome_rng(derive_stream(seed, kOutcomeSalt));
    ProtocolResult result;
    for (std::size_t t = 0; t < scenarios.size(); ++t) {
        const auto& s = scenarios[t];
        ProtocolStep step;
        try {
            step.answer = agent.choose_option(s, ChoiceContext{t});
            step.chosen = resolve_label(s, step.answer);
        } catch (const std::exception& e) {
            rethrow_with("step " + std::to_string(t) + " (scenario " + s.id + ")", e);
        }
        const auto& opt = s.options[step.chosen];
        step.scenario_id = s.id;
        step.risk = risk::composite_risk(opt.risk_components, weights);
        step.p_correct = opt.p_correct;
        step.truly_correct = outcome_rng.unit() < opt.p_correct;
        const bool forced = feedback.mode == FeedbackMode::adversarial &&
                            (feedback.negative_steps.empty() || feedback.negative_steps.contains(t));
        step.feedback_negative = forced || !step.truly_correct;
        step.eu = eu_choice_record(s, step.chosen, weights);
        agent.observe_feedback(s, step.chosen, step.feedback_negative);
        result.trace.steps.push_back({step.risk, step.answer.confidence, step.feedback_negative,
                                      step.feedback_negative});
        result.steps.push_back(std::move(step));
    }
    return result;
}

std::vector<GambleResponse> run_gamble_task(const std::vector<GamblePair>& pairs, Agent& agent, std::uint64_t seed,
                                            const FailureSink& on_failure) {
    agent.begin_episode(derive_stream(seed, kAgentSalt));
    std::vector<GambleResponse> out;
    for (std::size_t idx : shuffled_order(pairs.size(), seed)) {
        const auto& pair = pairs[idx];
        const auto scenario = gamble_scenario(pair);
        try {
            const auto answer = agent.choose_option(scenario, ChoiceContext{out.size()});
            const auto chosen = resolve_label(scenario, answer);
            const bool risky = chosen == 0;
            out.push_back({pair.id, risky, answer.confidence, {pair.risky.mean(), pair.conservative.mean(), risky}});
        } catch (const std::exception& e) {
            if (!on_failure) rethrow_with("gamble " + pair.id, e);
            on_failure(pair.id, e);
        }
    }
    return out;
}

}  // namespace ludobench::tasks
