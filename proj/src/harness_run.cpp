#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "ludobench/analysis.hpp"
#include "ludobench/error.hpp"
#include "ludobench/harness.hpp"
#include "ludobench/prospect.hpp"

namespace ludobench::harness {

namespace fs = std::filesystem;

namespace {

// Per-task stream salts.
constexpr std::uint64_t kProbabilitySalt = 0x9B01;
constexpr std::uint64_t kIntervalSalt = 0x9B02;
constexpr std::uint64_t kGambleSalt = 0x9B03;
constexpr std::uint64_t kProtocolOrderSalt = 0x9B04;
constexpr std::uint64_t kDynamicsSalt = 0x9B05;
constexpr std::uint64_t kIowaSalt = 0x9B06;
constexpr std::uint64_t kEpisodeSalt = 0x1C00;

json distribution_json(const DiscreteDistribution& d) {
    json out = json::array();
    for (const auto& o : d.outcomes()) out.push_back({o.value, o.probability});
    return out;
}

DiscreteDistribution distribution_from(const json& j) {
    std::vector<Outcome> outcomes;
    for (const auto& o : j) outcomes.push_back({o.at(0).get<double>(), o.at(1).get<double>()});
    return DiscreteDistribution(std::move(outcomes));
}

json protocol_payload(const tasks::ProtocolStep& s) {
    json p{{"scenario_id", s.scenario_id},
           {"label", s.answer.label},
           {"risk", s.risk},
           {"confidence", s.answer.confidence},
           {"p_correct", s.p_correct},
           {"truly_correct", s.truly_correct},
           {"feedback_negative", s.feedback_negative},
           {"error", s.feedback_negative},
           {"eu_risky", s.eu.eu_risky},
           {"eu_conservative", s.eu.eu_conservative},
           {"chose_risky", s.eu.chose_risky},
           {"fallback", s.answer.fallback}};
    if (s.answer.applied_tolerance) p["applied_tolerance"] = *s.answer.applied_tolerance;
    return p;
}

}  // namespace

AgentPtr make_agent(const AgentSpec& spec, const RunConfig& config, const LlmClients& clients) {
    AgentPtr agent;
    switch (spec.type) {
        case AgentType::scripted:
            agent = std::make_unique<agents::ScriptedAgent>(spec.profile, config.risk_weights);
            break;
        case AgentType::random: agent = std::make_unique<agents::RandomAgent>(); break;
        case AgentType::toy: agent = std::make_unique<agents::ToyAgent>(spec.toy, config.risk_weights); break;
        case AgentType::llm: {
            auto it = clients.find(spec.name);
            if (it == clients.end()) throw ConfigError("agent " + spec.name + ": no LLM client");
            agent = std::make_unique<llm::LlmAgent>(it->second, llm::LlmAgent::load_templates(spec.llm->prompts_dir));
            break;
        }
    }
    if (spec.anti_chasing) {
        agent = std::make_unique<training::AntiChasingAgent>(std::move(agent), config.anti_chasing,
                                                             config.risk_weights);
    }
    return agent;
}

std::vector<json> run_unit(const RunConfig& config, const Bank& bank, const AgentSpec& spec, std::uint64_t seed,
                           const std::string& run_id, const LlmClients& clients) {
    std::vector<json> events;
    auto emit = [&](const char* task, std::size_t episode, std::size_t step, json payload) {
        events.push_back({{"run_id", run_id},
                          {"seed", seed},
                          {"task", task},
                          {"episode", episode},
                          {"step", step},
                          {"agent", spec.name},
                          {"payload", std::move(payload)}});
    };
    std::size_t failures = 0;
    auto record_failure = [&](const std::string& task, const std::string& item, const std::exception& e) {
        if (dynamic_cast<const TransportError*>(&e)) throw TransportError(e.what());
        emit("failure", 0, failures++, {{"task", task}, {"item", item}, {"error", e.what()}});
    };
    auto sink_for = [&](const std::string& task) -> tasks::FailureSink {
        return [&, task](const std::string& item, const std::exception& e) { record_failure(task, item, e); };
    };
    auto task_seed = [&](std::uint64_t salt) { return derive_stream(seed, salt).state; };

    auto agent = make_agent(spec, config, clients);
    const auto& weights = config.risk_weights;
    const auto& t = config.tasks;

    if (t.probability && !bank.probability_items.empty()) {
        const auto responses =
            tasks::run_probability_task(bank.probability_items, *agent, task_seed(kProbabilitySalt),
                                        sink_for("probability"));
        for (std::size_t i = 0; i < responses.size(); ++i) {
            const auto& r = responses[i];
            json p{{"item_id", r.item_id},
                   {"p_model", r.judgment.p_model},
                   {"p_true", r.judgment.p_true},
                   {"fallacy_tag", std::string(to_string(r.fallacy_tag))},
                   {"outcome", r.outcome}};
            if (r.scores) p["scores"] = {(*r.scores)[0], (*r.scores)[1]};
            emit("probability", 0, i, std::move(p));
        }
    }

    if (t.overconfidence && !bank.interval_items.empty()) {
        const auto result = tasks::run_overconfidence_task(bank.interval_items, *agent, task_seed(kIntervalSalt),
                                                           sink_for("overconfidence"));
        for (std::size_t i = 0; i < result.responses.size(); ++i) {
            const auto& r = result.responses[i];
            emit("overconfidence", 0, i,
                 {{"item_id", r.item_id},
                  {"lo", r.interval.lo},
                  {"hi", r.interval.hi},
                  {"true_value", r.true_value},
                  {"nominal_level", r.nominal_level},
                  {"covered", r.covered}});
        }
    }

    if (t.gambles && !bank.gamble_pairs.empty()) {
        std::map<std::string, const GamblePair*> by_id;
        for (const auto& g : bank.gamble_pairs) by_id[g.id] = &g;
        const auto responses =
            tasks::run_gamble_task(bank.gamble_pairs, *agent, task_seed(kGambleSalt), sink_for("gambles"));
        for (std::size_t i = 0; i < responses.size(); ++i) {
            const auto& r = responses[i];
            const auto& pair = *by_id.at(r.pair_id);
            const auto scenario = gamble_scenario(pair);
            emit("gamble", 0, i,
                 {{"pair_id", r.pair_id},
                  {"chose_risky", r.chose_risky},
                  {"confidence", r.confidence},
                  {"p_correct", scenario.options[r.chose_risky ? 0 : 1].p_correct},
                  {"eu_risky", r.eu.eu_risky},
                  {"eu_conservative", r.eu.eu_conservative},
                  {"risky", distribution_json(pair.risky)},
                  {"conservative", distribution_json(pair.conservative)}});
        }
    }

    std::vector<Scenario> order = bank.scenarios;
    {
        Rng rng(derive_stream(seed, kProtocolOrderSalt));
        rng.shuffle(order);
    }

    if (t.loss_chasing) {
        const std::size_t episodes = order.size() / t.episode_length;
        for (std::size_t e = 0; e < episodes; ++e) {
            std::vector<Scenario> slice(order.begin() + static_cast<std::ptrdiff_t>(e * t.episode_length),
                                        order.begin() + static_cast<std::ptrdiff_t>((e + 1) * t.episode_length));
            try {
                const auto result = tasks::run_loss_chasing_protocol(
                    slice, *agent, t.feedback, derive_stream(seed, kEpisodeSalt + e).state, weights);
                for (std::size_t k = 0; k < result.steps.size(); ++k) {
                    emit("loss_chasing", e, k, protocol_payload(result.steps[k]));
                }
            } catch (const std::exception& ex) {
                record_failure("loss_chasing", "episode " + std::to_string(e), ex);
            }
        }
    }

    if (t.dynamics && order.size() >= tasks::kMinProtocolScenarios) {
        try {
            const auto result = tasks::run_loss_chasing_protocol(order, *agent, tasks::FeedbackPolicy::truthful(),
                                                                 task_seed(kDynamicsSalt), weights);
            for (std::size_t k = 0; k < result.steps.size(); ++k) {
                emit("dynamics", 0, k, protocol_payload(result.steps[k]));
            }
        } catch (const std::exception& ex) {
            record_failure("dynamics", "episode 0", ex);
        }
    }

    if (t.iowa) {
        try {
            const auto state = tasks::run_iowa_episode(tasks::DeckSchedule::standard(), *agent, t.iowa_picks,
                                                       t.iowa_shuffle, t.iowa_bankroll, task_seed(kIowaSalt));
            double bankroll = t.iowa_bankroll;
            for (std::size_t k = 0; k < state.history.size(); ++k) {
                const auto& d = state.history[k];
                bankroll += d.net();
                emit("iowa", 0, k,
                     {{"deck", std::string(1, deck_letter(d.deck))},
                      {"reward", d.reward},
                      {"loss", d.loss},
                      {"bankroll", bankroll}});
            }
        } catch (const std::exception& ex) {
            record_failure("iowa", "episode 0", ex);
        }
    }
    return events;
}

std::string event_line(const json& event) {
    json record = event;
    record.erase("digest");
    record["digest"] = sha256_hex(record.dump()).substr(0, 16);
    return record.dump();
}

std::string event_set_digest(std::vector<std::string> lines) {
    std::vector<std::string> hashes;
    hashes.reserve(lines.size());
    for (const auto& l : lines) hashes.push_back(sha256_hex(l));
    std::ranges::sort(hashes);
    std::string joined;
    for (const auto& h : hashes) joined += h;
    return sha256_hex(joined);
}

// ---------------------------------------------------------------------------
// Metric fold
// ---------------------------------------------------------------------------

namespace {

template <class F>
json guarded(F&& f) {
    try {
        const double v = f();
        return std::isfinite(v) ? json(v) : json(nullptr);
    } catch (const EstimationError&) {
    } catch (const InfiniteDivergenceError&) {
    } catch (const ValidationError&) {
    }
    return nullptr;
}

bool step_less(const json* a, const json* b) {
    const auto ka = std::tuple(a->at("episode").get<std::size_t>(), a->at("step").get<std::size_t>());
    const auto kb = std::tuple(b->at("episode").get<std::size_t>(), b->at("step").get<std::size_t>());
    return ka < kb;
}

json unit_metrics(std::vector<const json*> evs, const RunConfig& config) {
    std::ranges::stable_sort(evs, step_less);
    std::vector<metrics::ConfidenceRecord> conf;
    std::vector<metrics::ProbabilityJudgment> judgments;
    std::vector<metrics::EUChoiceRecord> eu;
    std::vector<metrics::RiskPair> risk_pairs;
    std::vector<std::pair<DiscreteDistribution, DiscreteDistribution>> kl_pairs;
    std::vector<prospect::ChoiceRecordPT> gamble_records;
    std::vector<analysis::ScoredObservation> scored;
    std::map<std::size_t, metrics::EpisodeTrace> episodes;
    metrics::EpisodeTrace dynamics;
    std::size_t iowa_picks = 0;
    std::size_t iowa_good = 0;
    std::size_t intervals = 0;
    std::size_t covered = 0;
    double nominal_sum = 0.0;
    std::size_t failures = 0;
    bool kl_divergent = false;

    auto as_step = [](const json& p) {
        return metrics::TraceStep{p.at("risk").get<double>(), p.at("confidence").get<double>(),
                                  p.at("error").get<bool>(), p.at("feedback_negative").get<bool>()};
    };

    for (const json* ev : evs) {
        const auto& task = ev->at("task").get_ref<const std::string&>();
        const auto& p = ev->at("payload");
        if (task == "probability") {
            const double pm = p.at("p_model").get<double>();
            const double pt = p.at("p_true").get<double>();
            judgments.push_back({pm, pt});
            try {
                kl_pairs.emplace_back(DiscreteDistribution({{1.0, pt}, {0.0, 1.0 - pt}}),
                                      DiscreteDistribution({{1.0, pm}, {0.0, 1.0 - pm}}));
            } catch (const ValidationError&) {
                kl_divergent = true;
            }
            if (p.contains("scores")) {
                scored.push_back({{p.at("scores").at(0).get<double>(), p.at("scores").at(1).get<double>()},
                                  p.at("outcome").get<bool>() ? std::size_t{0} : std::size_t{1}});
            }
        } else if (task == "overconfidence") {
            const bool c = p.at("covered").get<bool>();
            const double nominal = p.at("nominal_level").get<double>();
            conf.push_back({nominal, c ? 1.0 : 0.0});
            ++intervals;
            covered += c ? 1 : 0;
            nominal_sum += nominal;
        } else if (task == "gamble") {
            const double c = p.at("confidence").get<double>();
            const double pc = p.at("p_correct").get<double>();
            const bool risky = p.at("chose_risky").get<bool>();
            conf.push_back({c, pc});
            risk_pairs.push_back({1.0 - c, 1.0 - pc});
            eu.push_back({p.at("eu_risky").get<double>(), p.at("eu_conservative").get<double>(), risky});
            gamble_records.push_back(
                {distribution_from(p.at("risky")), distribution_from(p.at("conservative")), risky});
        } else if (task == "loss_chasing") {
            const double c = p.at("confidence").get<double>();
            const double pc = p.at("p_correct").get<double>();
            conf.push_back({c, pc});
            risk_pairs.push_back({1.0 - c, 1.0 - pc});
            eu.push_back({p.at("eu_risky").get<double>(), p.at("eu_conservative").get<double>(),
                          p.at("chose_risky").get<bool>()});
            episodes[ev->at("episode").get<std::size_t>()].steps.push_back(as_step(p));
        } else if (task == "dynamics") {
            dynamics.steps.push_back(as_step(p));
        } else if (task == "iowa") {
            const auto& d = p.at("deck").get_ref<const std::string&>();
            ++iowa_picks;
            iowa_good += (d == "C" || d == "D") ? 1 : 0;
        } else if (task == "failure") {
            ++failures;
        }
    }

    std::vector<metrics::EpisodeTrace> traces;
    for (auto& [_, tr] : episodes) traces.push_back(std::move(tr));

    json m;
    m["ob"] = guarded([&] { return metrics::overconfidence_bias(conf); });
    m["lc_signed"] = guarded([&] { return metrics::loss_chasing(traces); });
    m["lc_clamped"] = m["lc_signed"].is_null() ? json(nullptr) : json(std::clamp(m["lc_signed"].get<double>(), 0.0, 1.0));
    m["loss_chase_rate"] = guarded([&] { return metrics::loss_chasing_rate(traces, config.metric_config); });
    m["pm"] = guarded([&] { return metrics::probability_misjudgment(judgments); });
    m["rrm"] = guarded([&] { return metrics::risk_reward_miscalibration(eu); });
    if (m["ob"].is_null() || m["lc_signed"].is_null() || m["pm"].is_null() || m["rrm"].is_null()) {
        m["gts"] = nullptr;
    } else {
        m["gts"] = metrics::gts(m["ob"].get<double>(), m["lc_signed"].get<double>(), m["pm"].get<double>(),
                                m["rrm"].get<double>(), config.metric_weights);
    }
    m["ob_flagged"] = m["ob"].is_null() ? json(nullptr) : json(m["ob"].get<double>() > config.metric_config.ob_epsilon);
    m["rce"] = guarded([&] { return metrics::risk_calibration_error(risk_pairs); });
    m["pja"] = guarded([&] { return metrics::pja(judgments); });
    m["calibration_quality"] =
        kl_divergent ? json(nullptr) : guarded([&] { return metrics::calibration_quality(kl_pairs); });
    m["interval_coverage"] =
        intervals ? json(static_cast<double>(covered) / static_cast<double>(intervals)) : json(nullptr);
    m["interval_ob"] = intervals ? json(std::max(0.0, nominal_sum / static_cast<double>(intervals) -
                                                          static_cast<double>(covered) / static_cast<double>(intervals)))
                                 : json(nullptr);
    m["iowa_optimal_rate"] =
        iowa_picks ? json(static_cast<double>(iowa_good) / static_cast<double>(iowa_picks)) : json(nullptr);
    m["lac"] = guarded([&] { return prospect::fit_loss_aversion(gamble_records, prospect::ProspectParams{}); });
    m["temperature"] = guarded([&] { return analysis::fit_temperature(scored); });
    json slope = nullptr;
    json intercept = nullptr;
    json resid = nullptr;
    try {
        const auto fit = analysis::confidence_dynamics_fit(dynamics);
        slope = fit.slope_on_error;
        intercept = fit.intercept;
        resid = fit.residual_std;
    } catch (const EstimationError&) {
    }
    m["dynamics_slope"] = slope;
    m["dynamics_intercept"] = intercept;
    m["dynamics_residual_std"] = resid;
    m["failures"] = failures;
    return m;
}

}  // namespace

const std::vector<std::string>& metric_keys() {
    static const std::vector<std::string> keys{
        "gts",         "ob",          "lc_signed",         "lc_clamped",        "loss_chase_rate",
        "pm",          "rrm",         "rce",               "pja",               "calibration_quality",
        "interval_coverage", "interval_ob", "iowa_optimal_rate", "lac",          "temperature",
        "dynamics_slope", "dynamics_intercept", "dynamics_residual_std", "failures"};
    return keys;
}

json fold_metrics(const std::vector<json>& events, const RunConfig& config) {
    std::map<std::string, std::map<std::uint64_t, std::vector<const json*>>> groups;
    for (const auto& ev : events) {
        groups[ev.at("agent").get<std::string>()][ev.at("seed").get<std::uint64_t>()].push_back(&ev);
    }
    json agents_out = json::array();
    for (const auto& spec : config.agents) {
        json per_seed = json::array();
        std::map<std::string, std::pair<double, std::size_t>> sums;
        for (std::uint64_t seed : config.seeds) {
            std::vector<const json*> evs;
            if (auto a = groups.find(spec.name); a != groups.end()) {
                if (auto s = a->second.find(seed); s != a->second.end()) evs = s->second;
            }
            auto m = unit_metrics(std::move(evs), config);
            for (const auto& key : metric_keys()) {
                if (m[key].is_number()) {
                    sums[key].first += m[key].get<double>();
                    sums[key].second += 1;
                }
            }
            per_seed.push_back({{"seed", seed}, {"metrics", std::move(m)}});
        }
        json mean;
        for (const auto& key : metric_keys()) {
            auto it = sums.find(key);
            mean[key] = (it == sums.end() || it->second.second == 0)
                            ? json(nullptr)
                            : json(it->second.first / static_cast<double>(it->second.second));
        }
        mean["ob_flagged"] =
            mean["ob"].is_null() ? json(nullptr) : json(mean["ob"].get<double>() > config.metric_config.ob_epsilon);
        agents_out.push_back({{"name", spec.name}, {"per_seed", per_seed}, {"mean", mean}});
    }
    return {{"agents", agents_out}};
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

RunResult run_suite(const RunConfig& config) {
    validate_run_config(config);
    const Bank bank = load_bank(config.bank_path);
    const json snapshot = config_snapshot(config);
    const std::string run_id = run_id_for(snapshot);

    LlmClients clients;
    for (const auto& a : config.agents) {
        if (a.type == AgentType::llm) clients[a.name] = std::make_shared<llm::LlmClient>(*a.llm);
    }

    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + config.out_dir.string() + ": " + ec.message());
    const auto events_path = config.out_dir / "events.jsonl";
    std::ofstream log(events_path, std::ios::binary | std::ios::trunc);
    if (!log) throw ConfigError("cannot write " + events_path.string());

    struct Unit {
        const AgentSpec* spec;
        std::uint64_t seed;
    };
    std::vector<Unit> units;
    for (const auto& a : config.agents) {
        for (auto s : config.seeds) units.push_back({&a, s});
    }

    const auto started = std::chrono::system_clock::now();
    std::vector<std::string> lines;
    std::mutex writer;
    auto write_unit = [&](const std::vector<json>& evs) {
        std::lock_guard lock(writer);
        for (const auto& ev : evs) {
            auto line = event_line(ev);
            log << line << '\n';
            lines.push_back(std::move(line));
        }
        log.flush();
        if (!log) throw ConfigError("write failed on " + events_path.string());
    };

    if (config.parallel <= 1) {
        for (const auto& u : units) write_unit(run_unit(config, bank, *u.spec, u.seed, run_id, clients));
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mu;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= units.size()) return;
                try {
                    write_unit(run_unit(config, bank, *units[i].spec, units[i].seed, run_id, clients));
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    next = units.size();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const std::size_t n = std::min(config.parallel, units.size());
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    log.close();
    const auto finished = std::chrono::system_clock::now();

    std::vector<json> parsed;
    parsed.reserve(lines.size());
    for (const auto& l : lines) parsed.push_back(json::parse(l));

    RunResult result;
    result.run_id = run_id;
    result.dir = config.out_dir;
    result.event_count = lines.size();
    result.events_digest = event_set_digest(lines);
    result.metrics = fold_metrics(parsed, config);
    result.metrics["run_id"] = run_id;

    auto stamp = [](std::chrono::system_clock::time_point tp) {
        return std::chrono::duration<double>(tp.time_since_epoch()).count();
    };
    json manifest{{"run_id", run_id},
                  {"config", snapshot},
                  {"event_count", result.event_count},
                  {"events_digest", result.events_digest},
                  {"units", units.size()},
                  {"started_unix", stamp(started)},
                  {"finished_unix", stamp(finished)},
                  {"wall_seconds", std::chrono::duration<double>(finished - started).count()}};
    std::ofstream(config.out_dir / "manifest.json") << manifest.dump(2) << "\n";
    std::ofstream(config.out_dir / "metrics.json") << result.metrics.dump(2) << "\n";
    return result;
}

}  // namespace ludobench::harness
