#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ludobench/agents.hpp"
#include "ludobench/bank.hpp"
#include "ludobench/llm.hpp"
#include "ludobench/metrics.hpp"
#include "ludobench/risk.hpp"
#include "ludobench/tasks.hpp"
#include "ludobench/training.hpp"

namespace ludobench::harness {

using json = nlohmann::json;

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class AgentType { scripted, random, toy, llm };

struct AgentSpec {
    std::string name;
    AgentType type = AgentType::scripted;
    agents::ScriptedProfile profile;
    agents::ToyPolicy toy;
    std::filesystem::path toy_path;
    std::optional<llm::LlmClientConfig> llm;
    bool anti_chasing = false;
};

struct TaskSettings {
    bool probability = true;
    bool overconfidence = true;
    bool gambles = true;
    bool loss_chasing = true;
    bool dynamics = true;
    bool iowa = true;
    std::size_t episode_length = 10;
    tasks::FeedbackPolicy feedback = tasks::FeedbackPolicy::all_negative();
    std::size_t iowa_picks = tasks::kDefaultIowaPicks;
    bool iowa_shuffle = false;
    double iowa_bankroll = tasks::kDefaultBankroll;
};

struct RunConfig {
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path bank_path;
    std::vector<AgentSpec> agents;
    TaskSettings tasks;
    metrics::MetricWeights metric_weights;
    risk::RiskWeights risk_weights;
    metrics::MetricConfig metric_config;
    training::AntiChasingConfig anti_chasing;
    std::size_t parallel = 1;
    std::filesystem::path out_dir = "runs/latest";
};

/// Relative paths resolve against `base_dir`. Errors are ConfigError with a
/// JSON path such as "$.agents[1].kind".
RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
/// Checks referenced files and all parameter ranges.
void validate_run_config(const RunConfig& config);

/// Self-contained description of the run: parameters, resolved toy policies
/// and the bank digest. Replaying it reproduces the run.
json config_snapshot(const RunConfig& config);
/// Snapshot back to a config; the inverse of config_snapshot.
RunConfig config_from_snapshot(const json& snapshot);
/// Hash of the snapshot without output location and parallelism.
std::string run_id_for(const json& snapshot);

/// train-toy / gradcheck job description.
struct TrainingJob {
    std::filesystem::path bank_path;
    training::TrainingConfig config;
    training::AblationFlags flags;
    std::filesystem::path out = "policy.json";
};

TrainingJob parse_training_job(const json& doc, const std::filesystem::path& base_dir);
TrainingJob load_training_job(const std::filesystem::path& path);

json policy_to_json(const agents::ToyPolicy& policy);
agents::ToyPolicy policy_from_json(const json& doc);
void save_policy(const agents::ToyPolicy& policy, const std::filesystem::path& path);
agents::ToyPolicy load_policy(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

using LlmClients = std::map<std::string, std::shared_ptr<llm::LlmClient>>;

AgentPtr make_agent(const AgentSpec& spec, const RunConfig& config, const LlmClients& clients);

/// Events of one (agent, seed) unit, in deterministic order. Each event is
/// {run_id, seed, task, episode, step, agent, payload}.
std::vector<json> run_unit(const RunConfig& config, const Bank& bank, const AgentSpec& spec, std::uint64_t seed,
                           const std::string& run_id, const LlmClients& clients);

/// Adds the per-line digest and serializes one event line (no newline).
std::string event_line(const json& event);

/// Metrics per agent and seed plus seed means, folded from raw events.
json fold_metrics(const std::vector<json>& events, const RunConfig& config);

struct RunResult {
    std::string run_id;
    std::filesystem::path dir;
    json metrics;
    std::size_t event_count = 0;
    std::string events_digest;
};

/// Writes events.jsonl incrementally, then manifest.json and metrics.json.
RunResult run_suite(const RunConfig& config);

/// Order-independent digest of a set of event lines.
std::string event_set_digest(std::vector<std::string> lines);

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

/// Verified contents of a finished run directory.
struct LoadedRun {
    json manifest;
    json metrics;
    std::vector<json> events;
};

/// Reads and verifies a run directory. IntegrityError names the offending
/// line on digest or parse failures, and reports count/digest mismatches.
LoadedRun load_run(const std::filesystem::path& run_dir);

/// Metric keys in report column order.
const std::vector<std::string>& metric_keys();

/// Recomputes metrics from the event log, checks them against metrics.json
/// (1e-12) and writes summary.csv and summary.md.
void emit_report(const std::filesystem::path& run_dir);

/// Per-metric absolute and percentage deltas (treatment - baseline), paired
/// per seed and agent. ComparabilityError when banks or seed sets differ.
json compare_runs(const std::filesystem::path& baseline_dir, const std::filesystem::path& treatment_dir);
std::string render_comparison_markdown(const json& comparison);

}  // namespace ludobench::harness
