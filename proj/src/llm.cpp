#include "ludobench/llm.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <sstream>
#include <thread>

#include "ludobench/error.hpp"

namespace ludobench::llm {

using json = nlohmann::json;

void LlmClientConfig::validate() const {
    if (endpoint.empty()) throw ConfigError("llm: endpoint is required");
    if (!(timeout_seconds > 0.0)) throw ConfigError("llm: timeout must be positive");
    if (max_retries < 0) throw ConfigError("llm: max_retries must be non-negative");
    if (max_concurrency < 1) throw ConfigError("llm: max_concurrency must be at least 1");
    if (!(backoff_base_seconds >= 0.0)) throw ConfigError("llm: backoff base must be non-negative");
}

ParsedChoice parse_choice_reply(std::string_view reply) {
    static const std::regex re(R"(ANSWER:\s*([A-Z]+)\s+CONFIDENCE:\s*(\d{1,3}))");
    std::cmatch m;
    if (!std::regex_search(reply.data(), reply.data() + reply.size(), m, re)) {
        throw MalformedAnswerError("reply has no ANSWER/CONFIDENCE line");
    }
    const int c = std::stoi(m[2].str());
    if (c > 100) throw MalformedAnswerError("confidence " + std::to_string(c) + " above 100");
    return {m[1].str(), c / 100.0};
}

Interval parse_interval_reply(std::string_view reply) {
    static const std::regex re(R"(INTERVAL:\s*(-?[0-9][0-9,]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)\s+TO\s+(-?[0-9][0-9,]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?))");
    std::cmatch m;
    if (!std::regex_search(reply.data(), reply.data() + reply.size(), m, re)) {
        throw MalformedAnswerError("reply has no INTERVAL line");
    }
    auto num = [](std::string s) {
        std::erase(s, ',');
        return std::stod(s);
    };
    Interval iv{num(m[1].str()), num(m[2].str())};
    if (iv.lo > iv.hi) throw MalformedAnswerError("interval lower bound above upper bound");
    return iv;
}

std::string render_template(std::string_view tmpl, std::string_view prompt, std::string_view options,
                            std::string_view format_instructions) {
    std::string out(tmpl);
    auto replace = [&](std::string_view key, std::string_view value) {
        for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size())) {
            out.replace(pos, key.size(), value);
        }
    };
    replace("{prompt}", prompt);
    replace("{options}", options);
    replace("{format_instructions}", format_instructions);
    return out;
}

LlmClient::LlmClient(LlmClientConfig config) : config_(std::move(config)) {
    config_.validate();
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) throw ConfigError("llm: environment variable " + config_.api_key_env + " is not set");
    api_key_ = key;
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url_re)) throw ConfigError("llm: malformed endpoint " + config_.endpoint);
    base_url_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
}

std::string LlmClient::send_once(const std::string& body, int& status, bool& transport_failed) {
    httplib::Client cli(base_url_);
    const auto secs = std::chrono::duration<double>(config_.timeout_seconds);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    auto res = cli.Post(path_, headers, body, "application/json");
    if (!res) {
        transport_failed = true;
        status = 0;
        return httplib::to_string(res.error());
    }
    transport_failed = false;
    status = res->status;
    return res->body;
}

std::string LlmClient::complete(const std::string& prompt) {
    json req{{"model", config_.model},
             {"temperature", config_.temperature},
             {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    const std::string body = req.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay = config_.backoff_base_seconds * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        int status = 0;
        bool failed = false;
        std::string reply;
        {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [&] { return in_flight_ < config_.max_concurrency; });
            ++in_flight_;
        }
        try {
            reply = send_once(body, status, failed);
        } catch (...) {
            std::lock_guard lock(mu_);
            --in_flight_;
            cv_.notify_one();
            throw;
        }
        {
            std::lock_guard lock(mu_);
            --in_flight_;
        }
        cv_.notify_one();

        if (failed) {
            last_error = "request failed: " + reply;
            continue;
        }
        if (status == 429 || status >= 500) {
            last_error = "HTTP " + std::to_string(status);
            continue;
        }
        if (status < 200 || status >= 300) throw TransportError("llm: HTTP " + std::to_string(status));
        try {
            const auto doc = json::parse(reply);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw MalformedAnswerError(std::string("llm: unexpected response body: ") + e.what());
        }
    }
    throw TransportError("llm: retries exhausted (" + last_error + ")");
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kChoiceFormat =
    "Reply with exactly one line: ANSWER: <letter> CONFIDENCE: <integer 0-100>";
constexpr std::string_view kIntervalFormat =
    "Reply with exactly one line: INTERVAL: <lower> TO <upper>";

}  // namespace

LlmAgent::LlmAgent(std::shared_ptr<LlmClient> client, std::map<std::string, std::string> templates)
    : client_(std::move(client)), templates_(std::move(templates)) {
    if (!client_) throw ConfigError("llm agent: client missing");
}

std::map<std::string, std::string> LlmAgent::load_templates(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const char* name : {"choice", "probability", "interval", "deck"}) {
        const auto path = dir / (std::string(name) + ".txt");
        std::ifstream in(path);
        if (!in) throw ConfigError("llm: missing prompt template " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        out[name] = ss.str();
    }
    return out;
}

const std::string& LlmAgent::tmpl(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("llm: no template named " + name);
    return it->second;
}

ChoiceAnswer LlmAgent::choose_option(const Scenario& scenario, const ChoiceContext&) {
    std::ostringstream options;
    for (const auto& o : scenario.options) options << o.label << ") " << o.text << "\n";
    const auto parsed =
        parse_choice_reply(client_->complete(render_template(tmpl("choice"), scenario.prompt, options.str(),
                                                             kChoiceFormat)));
    ChoiceAnswer out;
    out.label = parsed.label;
    out.confidence = parsed.confidence;
    return out;
}

double LlmAgent::estimate_probability(const ProbabilityItem& item) {
    const auto parsed = parse_choice_reply(client_->complete(
        render_template(tmpl("probability"), item.statement, "YES) The event happens\nNO) It does not\n",
                        "Reply with exactly one line: ANSWER: <YES or NO> CONFIDENCE: <integer 0-100>")));
    if (parsed.label == "YES") return parsed.confidence;
    if (parsed.label == "NO") return 1.0 - parsed.confidence;
    throw MalformedAnswerError("probability answer must be YES or NO, got " + parsed.label);
}

Interval LlmAgent::give_interval(const IntervalItem& item) {
    std::ostringstream prompt;
    prompt << item.question << " (unit: " << item.unit << "). Give a " << std::lround(item.nominal_level * 100)
           << "% confidence interval.";
    return parse_interval_reply(client_->complete(render_template(tmpl("interval"), prompt.str(), "",
                                                                  kIntervalFormat)));
}

Deck LlmAgent::pick_deck(const DeckObservation& obs) {
    std::ostringstream prompt;
    prompt << "You are drawing cards from four decks to maximize money. Pick " << obs.pick_index + 1
           << ". Current bankroll: " << obs.bankroll << ".";
    if (obs.history && !obs.history->empty()) {
        const auto& last = obs.history->back();
        prompt << " Last card from deck " << deck_letter(last.deck) << " paid " << last.reward << " and cost "
               << last.loss << ".";
    }
    const auto parsed = parse_choice_reply(client_->complete(
        render_template(tmpl("deck"), prompt.str(), "A) Deck A\nB) Deck B\nC) Deck C\nD) Deck D\n", kChoiceFormat)));
    const auto deck = parse_deck(parsed.label);
    if (!deck) throw MalformedAnswerError("deck answer must be A-D, got " + parsed.label);
    return *deck;
}

}  // namespace ludobench::llm
