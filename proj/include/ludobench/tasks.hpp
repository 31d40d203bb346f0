#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ludobench/agent.hpp"
#include "ludobench/bank.hpp"
#include "ludobench/metrics.hpp"
#include "ludobench/risk.hpp"

namespace ludobench::tasks {

// ---------------------------------------------------------------------------
// Iowa Gambling Task
// ---------------------------------------------------------------------------

inline constexpr std::size_t kBlockSize = 10;

struct DeckSpec {
    double reward_per_card = 0.0;
    /// Loss charged at each 1-based position of a 10-card block.
    std::array<double, kBlockSize> loss_by_position{};

    double block_net() const noexcept;
};

struct DeckSchedule {
    std::array<DeckSpec, 4> decks{};

    /// A and B net -250 per block; C and D net +250.
    static DeckSchedule standard();
    void validate() const;
    const DeckSpec& operator[](Deck d) const noexcept { return decks[static_cast<int>(d)]; }
};

struct IowaState {
    DeckSchedule schedule;
    bool shuffle = false;
    double initial_bankroll = 0.0;
    double bankroll = 0.0;
    std::array<std::size_t, 4> card_index{};
    /// Per-deck loss layout of the block currently being dealt.
    std::array<std::array<double, kBlockSize>, 4> block_losses{};
    std::array<RngState, 4> deck_streams{};
    std::vector<IowaDraw> history;
};

inline constexpr double kDefaultBankroll = 2000.0;
inline constexpr std::size_t kDefaultIowaPicks = 100;

IowaState iowa_new(const DeckSchedule& schedule, double initial_bankroll, bool shuffle, std::uint64_t seed);
/// Deals the next card of `deck`; decks repeat their block forever.
IowaDraw iowa_step(IowaState& state, Deck deck);
/// Fraction of picks from C or D.
double iowa_optimal_rate(const std::vector<IowaDraw>& history);

IowaState run_iowa_episode(const DeckSchedule& schedule, Agent& agent, std::size_t picks, bool shuffle,
                           double initial_bankroll, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Behavioral task runners
// ---------------------------------------------------------------------------

/// Called with (item id, error message) when an item fails and the caller
/// wants the run to continue. Without a sink the error propagates.
using FailureSink = std::function<void(const std::string&, const std::exception&)>;

struct ProbabilityResponse {
    std::string item_id;
    metrics::ProbabilityJudgment judgment;
    FallacyTag fallacy_tag = FallacyTag::none;
    /// Realized event, drawn from p_true; used for temperature fitting.
    bool outcome = false;
    std::optional<std::array<double, 2>> scores;
};

std::vector<ProbabilityResponse> run_probability_task(const std::vector<ProbabilityItem>& items, Agent& agent,
                                                      std::uint64_t seed, const FailureSink& on_failure = {});

struct IntervalResponse {
    std::string item_id;
    Interval interval;
    double true_value = 0.0;
    double nominal_level = 0.0;
    bool covered = false;
    metrics::ConfidenceRecord record() const noexcept { return {nominal_level, covered ? 1.0 : 0.0}; }
};

struct OverconfidenceResult {
    std::vector<IntervalResponse> responses;
    double coverage = 0.0;
    /// max(0, mean nominal level - coverage).
    double interval_ob = 0.0;
};

OverconfidenceResult run_overconfidence_task(const std::vector<IntervalItem>& items, Agent& agent,
                                             std::uint64_t seed, const FailureSink& on_failure = {});

enum class FeedbackMode { truthful, adversarial };

struct FeedbackPolicy {
    FeedbackMode mode = FeedbackMode::adversarial;
    /// Steps forced negative in adversarial mode; empty means every step.
    std::set<std::size_t> negative_steps;

    static FeedbackPolicy truthful() { return {FeedbackMode::truthful, {}}; }
    static FeedbackPolicy all_negative() { return {FeedbackMode::adversarial, {}}; }
};

struct ProtocolStep {
    std::string scenario_id;
    std::size_t chosen = 0;
    ChoiceAnswer answer;
    double risk = 0.0;
    double p_correct = 0.0;
    bool truly_correct = false;
    bool feedback_negative = false;
    metrics::EUChoiceRecord eu;
};

struct ProtocolResult {
    metrics::EpisodeTrace trace;
    std::vector<ProtocolStep> steps;
};

inline constexpr std::size_t kMinProtocolScenarios = 10;

/// Presents the scenarios in the given order. An error at step t is the
/// delivery of negative feedback at t.
ProtocolResult run_loss_chasing_protocol(const std::vector<Scenario>& scenarios, Agent& agent,
                                         const FeedbackPolicy& feedback, std::uint64_t seed,
                                         const risk::RiskWeights& weights = {});

struct GambleResponse {
    std::string pair_id;
    bool chose_risky = false;
    double confidence = 0.0;
    metrics::EUChoiceRecord eu;
};

std::vector<GambleResponse> run_gamble_task(const std::vector<GamblePair>& pairs, Agent& agent, std::uint64_t seed,
                                            const FailureSink& on_failure = {});

/// Resolves an answer label to an option index; MalformedAnswerError when
/// the label does not exist.
std::size_t resolve_label(const Scenario& scenario, const ChoiceAnswer& answer);

}  // namespace ludobench::tasks
