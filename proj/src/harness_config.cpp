#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include "ludobench/error.hpp"
#include "ludobench/harness.hpp"

namespace ludobench::harness {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

std::string file_sha256(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

namespace {

/// Integer literal >= 0, whether stored signed or unsigned.
bool is_count(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

/// Typed field access with JSON-path error messages.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
        throw ConfigError(path + ": " + msg);
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    std::string at(const char* key) const { return path_ + "." + key; }
    const json& raw(const char* key) const {
        if (!has(key)) fail(at(key), "required field missing");
        return j_.at(key);
    }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        return v.get<double>();
    }
    std::uint64_t uint(const char* key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!is_count(v)) {
            fail(at(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }
    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) fail(at(key), "expected true or false");
        return v.get<bool>();
    }
    std::string text(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string required_text(const char* key) const {
        raw(key);
        return text(key, "");
    }

private:
    const json& j_;
    std::string path_;
};

template <class F>
void rethrow_at(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::string type_name(AgentType t) {
    switch (t) {
        case AgentType::scripted: return "scripted";
        case AgentType::random: return "random";
        case AgentType::toy: return "toy";
        case AgentType::llm: return "llm";
    }
    return "scripted";
}

llm::LlmClientConfig parse_llm(const json& j, const std::string& path, const fs::path& base) {
    Reader r(j, path);
    llm::LlmClientConfig c;
    c.endpoint = r.required_text("endpoint");
    c.model = r.text("model", "");
    c.api_key_env = r.text("api_key_env", c.api_key_env);
    c.timeout_seconds = r.number("timeout_seconds", c.timeout_seconds);
    c.max_retries = static_cast<int>(r.uint("max_retries", static_cast<std::uint64_t>(c.max_retries)));
    c.max_concurrency = static_cast<int>(r.uint("max_concurrency", static_cast<std::uint64_t>(c.max_concurrency)));
    c.temperature = r.number("temperature", c.temperature);
    c.backoff_base_seconds = r.number("backoff_base_seconds", c.backoff_base_seconds);
    c.prompts_dir = resolve(base, r.text("prompts_dir", c.prompts_dir.string()));
    rethrow_at(path, [&] { c.validate(); });
    return c;
}

json llm_to_json(const llm::LlmClientConfig& c) {
    return {{"endpoint", c.endpoint},
            {"model", c.model},
            {"api_key_env", c.api_key_env},
            {"timeout_seconds", c.timeout_seconds},
            {"max_retries", c.max_retries},
            {"max_concurrency", c.max_concurrency},
            {"temperature", c.temperature},
            {"backoff_base_seconds", c.backoff_base_seconds},
            {"prompts_dir", c.prompts_dir.string()}};
}

AgentSpec parse_agent(const json& j, const std::string& path, const fs::path& base) {
    Reader r(j, path);
    AgentSpec spec;
    spec.name = r.required_text("name");
    const auto type = r.required_text("type");
    spec.anti_chasing = r.boolean("anti_chasing", false);
    if (type == "scripted") {
        spec.type = AgentType::scripted;
        const auto kind = r.required_text("kind");
        const auto parsed = agents::parse_scripted_kind(kind);
        if (!parsed) Reader::fail(r.at("kind"), "unknown scripted kind '" + kind + "'");
        spec.profile.kind = *parsed;
        spec.profile.bias = r.number("bias", spec.profile.bias);
        spec.profile.chase_increment = r.number("chase_increment", spec.profile.chase_increment);
        spec.profile.decay = r.number("decay", spec.profile.decay);
        spec.profile.baseline_target = r.number("baseline_target", spec.profile.baseline_target);
        rethrow_at(path, [&] { spec.profile.validate(); });
    } else if (type == "random") {
        spec.type = AgentType::random;
    } else if (type == "toy") {
        spec.type = AgentType::toy;
        if (r.has("policy_params")) {
            rethrow_at(r.at("policy_params"), [&] { spec.toy = policy_from_json(r.raw("policy_params")); });
            spec.toy_path = r.text("policy", "");
        } else {
            spec.toy_path = resolve(base, r.required_text("policy"));
            if (!fs::exists(spec.toy_path)) Reader::fail(r.at("policy"), "file not found: " + spec.toy_path.string());
            rethrow_at(r.at("policy"), [&] { spec.toy = load_policy(spec.toy_path); });
        }
    } else if (type == "llm") {
        spec.type = AgentType::llm;
        spec.llm = parse_llm(r.raw("llm"), r.at("llm"), base);
    } else {
        Reader::fail(r.at("type"), "unknown agent type '" + type + "' (scripted, random, toy, llm)");
    }
    return spec;
}

void parse_tasks(const json& j, const std::string& path, TaskSettings& t) {
    Reader r(j, path);
    if (r.has("enabled")) {
        const auto& list = r.raw("enabled");
        if (!list.is_array()) Reader::fail(r.at("enabled"), "expected an array of task names");
        t.probability = t.overconfidence = t.gambles = t.loss_chasing = t.dynamics = t.iowa = false;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto p = r.at("enabled") + "[" + std::to_string(i) + "]";
            if (!list[i].is_string()) Reader::fail(p, "expected a task name");
            const auto name = list[i].get<std::string>();
            if (name == "probability") t.probability = true;
            else if (name == "overconfidence") t.overconfidence = true;
            else if (name == "gambles") t.gambles = true;
            else if (name == "loss_chasing") t.loss_chasing = true;
            else if (name == "dynamics") t.dynamics = true;
            else if (name == "iowa") t.iowa = true;
            else Reader::fail(p, "unknown task '" + name + "'");
        }
    }
    if (r.has("loss_chasing")) {
        Reader lc(r.raw("loss_chasing"), r.at("loss_chasing"));
        t.episode_length = lc.uint("episode_length", t.episode_length);
        if (t.episode_length < tasks::kMinProtocolScenarios) {
            Reader::fail(lc.at("episode_length"), "must be at least 10");
        }
        const auto mode = lc.text("feedback", "adversarial");
        if (mode == "adversarial") t.feedback.mode = tasks::FeedbackMode::adversarial;
        else if (mode == "truthful") t.feedback.mode = tasks::FeedbackMode::truthful;
        else Reader::fail(lc.at("feedback"), "expected 'adversarial' or 'truthful'");
        if (lc.has("negative_steps")) {
            const auto& steps = lc.raw("negative_steps");
            if (!steps.is_array()) Reader::fail(lc.at("negative_steps"), "expected an array of step indices");
            for (const auto& s : steps) {
                if (!is_count(s)) Reader::fail(lc.at("negative_steps"), "step indices must be non-negative integers");
                t.feedback.negative_steps.insert(s.get<std::size_t>());
            }
        }
    }
    if (r.has("iowa")) {
        Reader io(r.raw("iowa"), r.at("iowa"));
        t.iowa_picks = io.uint("picks", t.iowa_picks);
        t.iowa_shuffle = io.boolean("shuffle", t.iowa_shuffle);
        t.iowa_bankroll = io.number("bankroll", t.iowa_bankroll);
        if (t.iowa_picks == 0) Reader::fail(io.at("picks"), "must be positive");
    }
}

}  // namespace

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
    Reader r(doc, "$");
    RunConfig c;
    if (r.has("seeds")) {
        const auto& seeds = r.raw("seeds");
        if (!seeds.is_array() || seeds.empty()) Reader::fail("$.seeds", "expected a non-empty array of integers");
        c.seeds.clear();
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            if (!is_count(seeds[i])) Reader::fail("$.seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
            c.seeds.push_back(seeds[i].get<std::uint64_t>());
        }
    } else {
        c.seeds = {r.uint("seed", 0)};
    }
    c.bank_path = resolve(base_dir, r.required_text("bank"));

    const auto& agents = r.raw("agents");
    if (!agents.is_array() || agents.empty()) Reader::fail("$.agents", "expected a non-empty array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        c.agents.push_back(parse_agent(agents[i], "$.agents[" + std::to_string(i) + "]", base_dir));
    }
    for (std::size_t i = 0; i < c.agents.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (c.agents[i].name == c.agents[k].name) {
                Reader::fail("$.agents[" + std::to_string(i) + "].name", "duplicate agent name " + c.agents[i].name);
            }
        }
    }

    if (r.has("tasks")) parse_tasks(r.raw("tasks"), "$.tasks", c.tasks);
    if (r.has("metric_weights")) {
        Reader w(r.raw("metric_weights"), "$.metric_weights");
        c.metric_weights = {w.number("alpha", 0.25), w.number("beta", 0.25), w.number("gamma", 0.25),
                            w.number("delta", 0.25)};
        rethrow_at("$.metric_weights", [&] { c.metric_weights.validate(); });
    }
    if (r.has("risk_weights")) {
        Reader w(r.raw("risk_weights"), "$.risk_weights");
        c.risk_weights = {w.number("w_factual", 0.5), w.number("w_controversy", 0.25),
                          w.number("w_uncertainty", 0.25)};
        rethrow_at("$.risk_weights", [&] { c.risk_weights.validate(); });
    }
    if (r.has("metric_config")) {
        Reader m(r.raw("metric_config"), "$.metric_config");
        c.metric_config = {m.number("ob_epsilon", 0.05), m.number("lc_delta", 0.02)};
        rethrow_at("$.metric_config", [&] { c.metric_config.validate(); });
    }
    if (r.has("anti_chasing")) {
        Reader a(r.raw("anti_chasing"), "$.anti_chasing");
        c.anti_chasing.base_tolerance = a.number("base_tolerance", c.anti_chasing.base_tolerance);
        c.anti_chasing.chase_sensitivity = a.number("chase_sensitivity", c.anti_chasing.chase_sensitivity);
        c.anti_chasing.window_tau = a.uint("window_tau", c.anti_chasing.window_tau);
        rethrow_at("$.anti_chasing", [&] { c.anti_chasing.validate(); });
    }
    c.parallel = r.uint("parallel", 1);
    if (c.parallel < 1) Reader::fail("$.parallel", "must be at least 1");
    c.out_dir = resolve(base_dir, r.text("out", c.out_dir.string()));
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_run_config(doc, path.parent_path());
}

void validate_run_config(const RunConfig& c) {
    if (!fs::exists(c.bank_path)) throw ConfigError("$.bank: file not found: " + c.bank_path.string());
    if (c.parallel < 1) throw ConfigError("$.parallel: must be at least 1");
    if (c.seeds.empty()) throw ConfigError("$.seeds: at least one seed required");
    c.metric_weights.validate();
    c.risk_weights.validate();
    c.metric_config.validate();
    c.anti_chasing.validate();
    for (const auto& a : c.agents) {
        if (a.type == AgentType::toy) a.toy.validate();
        if (a.type == AgentType::llm && !fs::exists(a.llm->prompts_dir)) {
            throw ConfigError("agent " + a.name + ": prompts directory not found: " + a.llm->prompts_dir.string());
        }
    }
}

json config_snapshot(const RunConfig& c) {
    json agents = json::array();
    for (const auto& a : c.agents) {
        json j{{"name", a.name}, {"type", type_name(a.type)}, {"anti_chasing", a.anti_chasing}};
        switch (a.type) {
            case AgentType::scripted:
                j["kind"] = std::string(agents::to_string(a.profile.kind));
                j["bias"] = a.profile.bias;
                j["chase_increment"] = a.profile.chase_increment;
                j["decay"] = a.profile.decay;
                j["baseline_target"] = a.profile.baseline_target;
                break;
            case AgentType::random: break;
            case AgentType::toy:
                j["policy"] = a.toy_path.string();
                j["policy_params"] = policy_to_json(a.toy);
                break;
            case AgentType::llm: j["llm"] = llm_to_json(*a.llm); break;
        }
        agents.push_back(std::move(j));
    }
    json enabled = json::array();
    const auto& t = c.tasks;
    for (auto [on, name] : {std::pair{t.probability, "probability"}, {t.overconfidence, "overconfidence"},
                            {t.gambles, "gambles"}, {t.loss_chasing, "loss_chasing"}, {t.dynamics, "dynamics"},
                            {t.iowa, "iowa"}}) {
        if (on) enabled.push_back(name);
    }
    json steps = json::array();
    for (auto s : t.feedback.negative_steps) steps.push_back(s);
    return {
        {"seeds", c.seeds},
        {"bank", fs::absolute(c.bank_path).lexically_normal().string()},
        {"bank_digest", file_sha256(c.bank_path)},
        {"agents", agents},
        {"tasks",
         {{"enabled", enabled},
          {"loss_chasing",
           {{"episode_length", t.episode_length},
            {"feedback", t.feedback.mode == tasks::FeedbackMode::adversarial ? "adversarial" : "truthful"},
            {"negative_steps", steps}}},
          {"iowa", {{"picks", t.iowa_picks}, {"shuffle", t.iowa_shuffle}, {"bankroll", t.iowa_bankroll}}}}},
        {"metric_weights",
         {{"alpha", c.metric_weights.alpha},
          {"beta", c.metric_weights.beta},
          {"gamma", c.metric_weights.gamma},
          {"delta", c.metric_weights.delta}}},
        {"risk_weights",
         {{"w_factual", c.risk_weights.w_factual},
          {"w_controversy", c.risk_weights.w_controversy},
          {"w_uncertainty", c.risk_weights.w_uncertainty}}},
        {"metric_config", {{"ob_epsilon", c.metric_config.ob_epsilon}, {"lc_delta", c.metric_config.lc_delta}}},
        {"anti_chasing",
         {{"base_tolerance", c.anti_chasing.base_tolerance},
          {"chase_sensitivity", c.anti_chasing.chase_sensitivity},
          {"window_tau", c.anti_chasing.window_tau}}},
        {"parallel", c.parallel},
        {"out", c.out_dir.string()},
    };
}

RunConfig config_from_snapshot(const json& snapshot) { return parse_run_config(snapshot, {}); }

std::string run_id_for(const json& snapshot) {
    json identity = snapshot;
    // Locations do not change what runs; contents are covered by digests and
    // inline parameters.
    identity.erase("out");
    identity.erase("parallel");
    identity.erase("bank");
    for (auto& a : identity["agents"]) {
        a.erase("policy");
        if (a.contains("llm")) a["llm"].erase("prompts_dir");
    }
    return sha256_hex(identity.dump()).substr(0, 16);
}

TrainingJob parse_training_job(const json& doc, const fs::path& base_dir) {
    Reader r(doc, "$");
    TrainingJob job;
    job.bank_path = resolve(base_dir, r.required_text("bank"));
    auto& c = job.config;
    if (r.has("training")) {
        Reader t(r.raw("training"), "$.training");
        c.lambda_scale = t.number("lambda_scale", c.lambda_scale);
        c.kappa = t.number("kappa", c.kappa);
        c.lambda1 = t.number("lambda1", c.lambda1);
        c.lambda2 = t.number("lambda2", c.lambda2);
        c.lambda3 = t.number("lambda3", c.lambda3);
        c.risk_threshold = t.number("risk_threshold", c.risk_threshold);
        c.learning_rate = t.number("learning_rate", c.learning_rate);
        c.epochs = t.uint("epochs", c.epochs);
        c.seed = t.uint("seed", c.seed);
        rethrow_at("$.training", [&] { c.validate(); });
    }
    if (r.has("ablation")) {
        Reader a(r.raw("ablation"), "$.ablation");
        job.flags.loss_aversion = a.boolean("loss_aversion", true);
        job.flags.risk_calibration = a.boolean("risk_calibration", true);
        job.flags.anti_chasing = a.boolean("anti_chasing", true);
        job.flags.probability_training = a.boolean("probability_training", true);
    }
    job.out = resolve(base_dir, r.text("out", job.out.string()));
    return job;
}

TrainingJob load_training_job(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open training config " + path.string());
    try {
        return parse_training_job(json::parse(in), path.parent_path());
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json policy_to_json(const agents::ToyPolicy& p) {
    return {{"theta", p.theta},
            {"head", {{"weights", p.head.weights}, {"bias", p.head.bias}}},
            {"deck",
             {{"learning_rate", p.deck.learning_rate},
              {"sensitivity", p.deck.sensitivity},
              {"loss_aversion", p.deck.loss_aversion},
              {"payoff_scale", p.deck.payoff_scale}}}};
}

agents::ToyPolicy policy_from_json(const json& doc) {
    Reader r(doc, "$");
    agents::ToyPolicy p;
    auto vec = [&](const json& j, const std::string& path) {
        if (!j.is_array()) Reader::fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& v : j) {
            if (!v.is_number()) Reader::fail(path, "expected numbers");
            out.push_back(v.get<double>());
        }
        return out;
    };
    p.theta = vec(r.raw("theta"), "$.theta");
    Reader head(r.raw("head"), "$.head");
    p.head.weights = vec(head.raw("weights"), "$.head.weights");
    p.head.bias = head.number("bias", 0.0);
    if (r.has("deck")) {
        Reader d(r.raw("deck"), "$.deck");
        p.deck.learning_rate = d.number("learning_rate", p.deck.learning_rate);
        p.deck.sensitivity = d.number("sensitivity", p.deck.sensitivity);
        p.deck.loss_aversion = d.number("loss_aversion", p.deck.loss_aversion);
        p.deck.payoff_scale = d.number("payoff_scale", p.deck.payoff_scale);
    }
    rethrow_at("$", [&] { p.validate(); });
    return p;
}

void save_policy(const agents::ToyPolicy& policy, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << policy_to_json(policy).dump(2) << "\n";
}

agents::ToyPolicy load_policy(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open policy file " + path.string());
    try {
        return policy_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace ludobench::harness
