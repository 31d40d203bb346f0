#pragma once

#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "ludobench/agent.hpp"

namespace ludobench::llm {

struct LlmClientConfig {
    /// Full chat-completions URL, e.g. https://host/v1/chat/completions.
    std::string endpoint;
    std::string model;
    std::string api_key_env = "LUDOBENCH_API_KEY";
    double timeout_seconds = 30.0;
    int max_retries = 3;
    int max_concurrency = 4;
    double temperature = 0.0;
    /// First backoff delay; doubles on every retry.
    double backoff_base_seconds = 1.0;
    std::filesystem::path prompts_dir = "data/prompts";

    void validate() const;
};

struct ParsedChoice {
    std::string label;
    double confidence = 0.0;
};

/// "ANSWER: <label> CONFIDENCE: <0-100>"; MalformedAnswerError otherwise.
ParsedChoice parse_choice_reply(std::string_view reply);
/// "INTERVAL: <lo> TO <hi>"; MalformedAnswerError otherwise or when lo > hi.
Interval parse_interval_reply(std::string_view reply);

/// Replaces {prompt}, {options} and {format_instructions}.
std::string render_template(std::string_view tmpl, std::string_view prompt, std::string_view options,
                            std::string_view format_instructions);

/// Chat-completion client shared by all workers. Caps requests in flight
/// and retries timeouts, 5xx and 429 with exponential backoff.
class LlmClient {
public:
    explicit LlmClient(LlmClientConfig config);

    /// Sends one user message and returns the assistant text.
    std::string complete(const std::string& prompt);

    const LlmClientConfig& config() const noexcept { return config_; }

private:
    std::string send_once(const std::string& body, int& status, bool& transport_failed);

    LlmClientConfig config_;
    std::string api_key_;
    std::string base_url_;
    std::string path_;
    std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
};

/// Forced-choice prompts over the shared client. Probability items become a
/// YES/NO choice whose confidence is read as the probability of the stated
/// answer.
class LlmAgent final : public Agent {
public:
    LlmAgent(std::shared_ptr<LlmClient> client, std::map<std::string, std::string> templates);
    static std::map<std::string, std::string> load_templates(const std::filesystem::path& dir);

    std::string kind() const override { return "llm"; }
    ChoiceAnswer choose_option(const Scenario& scenario, const ChoiceContext& context) override;
    double estimate_probability(const ProbabilityItem& item) override;
    Interval give_interval(const IntervalItem& item) override;
    Deck pick_deck(const DeckObservation& observation) override;

private:
    const std::string& tmpl(const std::string& name) const;

    std::shared_ptr<LlmClient> client_;
    std::map<std::string, std::string> templates_;
};

}  // namespace ludobench::llm
