#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ludobench/core.hpp"
#include "ludobench/metrics.hpp"
#include "ludobench/risk.hpp"

namespace ludobench {

enum class ScenarioCategory {
    high_risk_factual,
    controversial_topic,
    uncertainty_acknowledgment,
    speculative_reasoning,
};

std::string_view to_string(ScenarioCategory c) noexcept;
std::optional<ScenarioCategory> parse_category(std::string_view s) noexcept;

struct ScenarioOption {
    std::string label;
    std::string text;
    risk::RiskComponents risk_components;
    double quality = 0.0;
    double expected_utility = 0.0;
    double p_correct = 0.0;
};

struct Scenario {
    std::string id;
    std::string prompt;
    std::vector<ScenarioOption> options;
    std::vector<std::string> tags;

    std::optional<ScenarioCategory> category() const noexcept;
    /// Index of the unique highest-quality option.
    std::size_t quality_optimal_index() const;
    std::optional<std::size_t> find_label(std::string_view label) const noexcept;
};

/// Cross-item validation used by the loader and by code that builds
/// scenarios programmatically. Error messages carry `path`.
void validate_scenario(const Scenario& s, const std::string& path);

enum class FallacyTag { none, gamblers_fallacy, hot_hand, base_rate };

std::string_view to_string(FallacyTag t) noexcept;
std::optional<FallacyTag> parse_fallacy(std::string_view s) noexcept;

struct ProbabilityItem {
    std::string id;
    std::string statement;
    double p_true = 0.0;
    FallacyTag fallacy_tag = FallacyTag::none;
};

struct IntervalItem {
    std::string id;
    std::string question;
    double true_value = 0.0;
    std::string unit;
    double nominal_level = 0.9;
};

struct GamblePair {
    std::string id;
    DiscreteDistribution risky;
    DiscreteDistribution conservative;
};

struct Bank {
    std::string version;
    std::vector<Scenario> scenarios;
    std::vector<ProbabilityItem> probability_items;
    std::vector<IntervalItem> interval_items;
    std::vector<GamblePair> gamble_pairs;
};

/// Parses and fully validates a bank document. Violations raise
/// ValidationError prefixed with the JSON path of the offending field.
Bank parse_bank(std::string_view text, const std::string& source = "<memory>");
Bank load_bank(const std::filesystem::path& path);

/// Scenario index helpers shared by the task runners and the report fold.
/// The conservative option is the one with the lowest composite risk
/// (ties: lowest label).
std::size_t conservative_index(const Scenario& s, const risk::RiskWeights& w);
std::size_t riskiest_index(const Scenario& s, const risk::RiskWeights& w);

/// Risk-reward record for choosing `chosen`: risky means anything other
/// than the conservative option, compared against the best EU among the
/// riskier alternatives.
metrics::EUChoiceRecord eu_choice_record(const Scenario& s, std::size_t chosen, const risk::RiskWeights& w);

/// Two-option forced-choice rendering of a gamble pair: label "A" is the
/// risky gamble, "B" the conservative one.
Scenario gamble_scenario(const GamblePair& pair);

}  // namespace ludobench
