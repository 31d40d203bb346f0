// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "analysis_oracle.hpp"
#include "lac_oracle.hpp"
#include "llm_stub.hpp"
#include "ludobench/analysis.hpp"
#include "ludobench/error.hpp"
#include "ludobench/harness.hpp"
#include "risk_oracle.hpp"
#include "support.hpp"

using namespace ludobench;
namespace hx = ludobench::harness;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double num(const json& m, const char* key) { return m.at(key).is_null() ? NAN : m.at(key).get<double>(); }

// ---------------------------------------------------------------------------

Verdict oracle_identities() {
    Verdict o;
    const auto t0 = Clock::now();
    const auto out = lbtest::scratch_dir("acc-oracle");
    const json doc{{"seeds", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}},
                   {"bank", lbtest::default_bank_path().string()},
                   {"agents", {{{"name", "rational"}, {"type", "scripted"}, {"kind", "rational_calibrated"}}}},
                   {"out", out.string()}};
    const auto r = hx::run_suite(hx::parse_run_config(doc, lbtest::source_dir()));
    double worst_gts = 0.0;
    for (const auto& s : r.metrics["agents"][0]["per_seed"]) {
        const auto& m = s["metrics"];
        o.require(num(m, "ob") == 0.0, "OB = 0 at seed " + s["seed"].dump());
        o.require(num(m, "pm") == 0.0, "PM = 0 at seed " + s["seed"].dump());
        o.require(num(m, "rrm") == 0.0, "RRM = 0 at seed " + s["seed"].dump());
        worst_gts = std::max(worst_gts, num(m, "gts"));
    }
    o.require(worst_gts < 0.02, "GTS < 0.02");
    const double secs = seconds_since(t0);
    o.require(secs < 10.0, "runtime < 10 s");
    o.detail << "10 seeds, OB=PM=RRM=0, max GTS " << fmt(worst_gts) << ", " << fmt(secs, 3) << " s";
    return o;
}

Verdict var_cvar_equivalence() {
    Verdict o;
    Rng rng(20240611);
    int checked = 0;
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto outcomes = lbtest::random_losses(rng);
        const DiscreteDistribution d(outcomes);
        for (double a : {0.5, 0.9, 0.95, 0.99}) {
            const auto [var, cvar] = lbtest::brute_var_cvar(outcomes, a);
            const double v = risk::value_at_risk(d, a);
            const double c = risk::conditional_var(d, a);
            ++checked;
            if (std::abs(v - var) > 1e-12 || std::abs(c - cvar) > 1e-12 || c < v) ++mismatches;
        }
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
    o.detail << checked << " (distribution, alpha) cases, " << mismatches << " mismatches";
    return o;
}

Verdict gradient_check() {
    Verdict o;
    const auto t0 = Clock::now();
    const auto examples = training::training_examples(lbtest::default_bank());
    const training::TrainingConfig cfg;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        // wider than the training init so both heads and the hinge see varied regimes
        Rng rng(derive_stream(s, 0x6CEC));
        agents::ToyPolicy pol;
        for (auto& t : pol.theta) t = rng.normal(0.0, 1.5);
        for (auto& w : pol.head.weights) w = rng.normal(0.0, 1.0);
        pol.head.bias = rng.normal(0.0, 1.0);
        worst = std::max(worst, training::finite_diff_check(pol, examples, cfg, s % 2 == 0, 1e-5));
    }
    const double secs = seconds_since(t0);
    o.require(worst < 1e-4, "max relative error < 1e-4");
    o.require(secs < 30.0, "runtime < 30 s");
    o.detail << "20 initializations, max relative error " << fmt(worst, 3) << ", " << fmt(secs, 3) << " s";
    return o;
}

struct StageMetrics {
    double gts = 0.0;
    double iowa = 0.0;
};

/// Trains one policy per seed and evaluates it on the same seed.
StageMetrics evaluate_stage(const training::AblationFlags& flags) {
    const auto& bank = lbtest::default_bank();
    StageMetrics sum;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        training::TrainingConfig cfg;
        cfg.seed = seed;
        const auto trained = training::train_toy_policy(bank, cfg, flags);
        hx::RunConfig rc;
        rc.seeds = {seed};
        hx::AgentSpec spec;
        spec.name = "toy";
        spec.type = hx::AgentType::toy;
        spec.toy = trained.policy;
        spec.anti_chasing = flags.anti_chasing;
        rc.agents = {spec};
        std::vector<json> events;
        for (const auto& e : hx::run_unit(rc, bank, spec, seed, "acceptance", {})) {
            events.push_back(json::parse(hx::event_line(e)));
        }
        const auto m = hx::fold_metrics(events, rc)["agents"][0]["mean"];
        sum.gts += num(m, "gts");
        sum.iowa += num(m, "iowa_optimal_rate");
    }
    return {sum.gts / 10.0, sum.iowa / 10.0};
}

std::vector<StageMetrics> g_stages;

Verdict ablation() {
    Verdict o;
    const auto t0 = Clock::now();
    const std::vector<std::pair<const char*, training::AblationFlags>> stages{
        {"plain", {false, false, false, false}},
        {"+loss aversion", {true, false, false, false}},
        {"+calibration", {true, true, false, false}},
        {"+anti-chasing", {true, true, true, false}},
        {"+probability", {true, true, true, true}}};
    for (const auto& [name, flags] : stages) g_stages.push_back(evaluate_stage(flags));
    const double reduction = 1.0 - g_stages.back().gts / g_stages.front().gts;
    o.require(reduction > 0.10, "GTS reduction > 10%");
    for (std::size_t i = 1; i < stages.size(); ++i) {
        o.require(g_stages[i].gts <= g_stages[i - 1].gts, std::string(stages[i].first) + " not above previous stage");
    }
    const double secs = seconds_since(t0);
    o.require(secs < 300.0, "runtime < 5 min");
    o.detail << "mean GTS";
    for (std::size_t i = 0; i < stages.size(); ++i) o.detail << " " << stages[i].first << "=" << fmt(g_stages[i].gts);
    o.detail << "; reduction " << fmt(100.0 * reduction, 3) << "%, " << fmt(secs, 3) << " s";
    return o;
}

Verdict anti_chasing() {
    Verdict o;
    const auto out = lbtest::scratch_dir("acc-chase");
    const json doc{{"seeds", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}},
                   {"bank", lbtest::default_bank_path().string()},
                   {"tasks", {{"enabled", {"loss_chasing"}}, {"loss_chasing", {{"feedback", "adversarial"}}}}},
                   {"agents",
                    {{{"name", "chaser"}, {"type", "scripted"}, {"kind", "loss_chaser"}},
                     {{"name", "wrapped"}, {"type", "scripted"}, {"kind", "loss_chaser"}, {"anti_chasing", true}}}},
                   {"out", out.string()}};
    const auto r = hx::run_suite(hx::parse_run_config(doc, lbtest::source_dir()));
    const double raw = num(r.metrics["agents"][0]["mean"], "loss_chase_rate");
    const double wrapped = num(r.metrics["agents"][1]["mean"], "loss_chase_rate");
    o.require(raw > 0.0, "unwrapped rate > 0");
    o.require(wrapped <= 0.1 * raw, "wrapped <= 0.1 x unwrapped");
    o.detail << "loss_chase_rate unwrapped " << fmt(raw) << ", wrapped " << fmt(wrapped) << " (10-seed means)";
    return o;
}

Verdict iowa() {
    Verdict o;
    const auto schedule = tasks::DeckSchedule::standard();
    double worst_rational = 1.0;
    for (bool shuffle : {false, true}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            agents::ScriptedAgent rational(agents::ScriptedProfile{});
            const auto st = tasks::run_iowa_episode(schedule, rational, 200, shuffle, tasks::kDefaultBankroll, seed);
            const std::vector<IowaDraw> after(st.history.begin() + agents::kDeckExplorationPicks, st.history.end());
            worst_rational = std::min(worst_rational, tasks::iowa_optimal_rate(after));
        }
    }
    agents::RandomAgent random;
    const auto rs = tasks::run_iowa_episode(schedule, random, 10000, false, tasks::kDefaultBankroll, 99);
    const double random_rate = tasks::iowa_optimal_rate(rs.history);
    o.require(worst_rational == 1.0, "EU agent 1.0 after exploration");
    o.require(std::abs(random_rate - 0.5) <= 0.02, "random 0.5 +/- 0.02");
    if (g_stages.size() == 5) {
        o.require(g_stages.back().iowa > g_stages.front().iowa, "RARG toy above plain toy");
        o.detail << "EU agent " << fmt(worst_rational) << " after 40 picks, random " << fmt(random_rate)
                 << " over 10^4 picks, toy RARG " << fmt(g_stages.back().iowa) << " vs plain "
                 << fmt(g_stages.front().iowa);
    } else {
        o.require(false, "toy comparison unavailable");
    }
    return o;
}

Verdict lac_recovery() {
    Verdict o;
    const double k225 = prospect::fit_loss_aversion(lbtest::synthetic_lac_records(2.25, 500, 225),
                                                    prospect::ProspectParams{});
    const double k100 = prospect::fit_loss_aversion(lbtest::synthetic_lac_records(1.0, 500, 100),
                                                    prospect::ProspectParams{});
    o.require(std::abs(k225 - 2.25) <= 0.15, "kappa 2.25 within 0.15");
    o.require(std::abs(k100 - 1.0) <= 0.15, "kappa 1.0 within 0.15");
    o.detail << "fitted " << fmt(k225) << " (true 2.25), " << fmt(k100) << " (true 1.0)";
    return o;
}

Verdict estimators() {
    Verdict o;
    const auto fit = analysis::confidence_dynamics_fit(lbtest::planted_dynamics_trace(0.05, 0.005, 500, 8));
    const auto data = lbtest::softmax_samples(10000, 1.0, 88);
    const double t1 = analysis::fit_temperature(data);
    const double t2 = analysis::fit_temperature(lbtest::scaled(data, 2.0));
    const double h = analysis::subset_entropy({{0.1, 0.1, 0.1, 0.1, 5.0}, {true, true, true, true, false}});
    o.require(std::abs(fit.slope_on_error - 0.05) <= 0.01, "planted slope within 0.01");
    o.require(std::abs(t1 - 1.0) <= 0.05, "T=1 within 0.05");
    o.require(std::abs(t2 - 2.0) <= 0.1, "T=2 within 0.1");
    o.require(std::abs(h - std::log(4.0)) <= 1e-12, "entropy ln 4");
    o.detail << "slope " << fmt(fit.slope_on_error) << " (planted 0.05), T " << fmt(t1) << " and " << fmt(t2)
             << ", entropy error " << fmt(std::abs(h - std::log(4.0)), 2);
    return o;
}

Verdict determinism() {
    Verdict o;
    const auto base = lbtest::scratch_dir("acc-det");
    const auto policy_path = base / "toy.json";
    training::TrainingConfig cfg;
    cfg.seed = 3;
    hx::save_policy(training::train_toy_policy(lbtest::default_bank(), cfg, training::AblationFlags::all_on()).policy,
                    policy_path);
    auto doc_for = [&](const fs::path& out, std::size_t parallel) {
        return json{{"seeds", {0, 1, 2, 3}},
                    {"bank", lbtest::default_bank_path().string()},
                    {"agents",
                     {{{"name", "rational"}, {"type", "scripted"}, {"kind", "rational_calibrated"}},
                      {{"name", "hot_hand"}, {"type", "scripted"}, {"kind", "hot_hand"}},
                      {{"name", "random"}, {"type", "random"}},
                      {{"name", "toy"}, {"type", "toy"}, {"policy", policy_path.string()}, {"anti_chasing", true}}}},
                    {"parallel", parallel},
                    {"out", out.string()}};
    };
    const auto a = hx::run_suite(hx::parse_run_config(doc_for(base / "a", 1), base));
    const auto b = hx::run_suite(hx::parse_run_config(doc_for(base / "b", 1), base));
    const auto p = hx::run_suite(hx::parse_run_config(doc_for(base / "p", 4), base));
    o.require(slurp(base / "a" / "events.jsonl") == slurp(base / "b" / "events.jsonl"), "byte-identical serial logs");
    auto sorted_lines = [](const fs::path& f) {
        std::vector<std::string> lines;
        std::ifstream in(f);
        for (std::string l; std::getline(in, l);) lines.push_back(l);
        std::sort(lines.begin(), lines.end());
        return lines;
    };
    o.require(sorted_lines(base / "a" / "events.jsonl") == sorted_lines(base / "p" / "events.jsonl"),
              "parallel event set equals serial");
    o.require(a.events_digest == p.events_digest, "set digests equal");
    bool report_ok = true;
    try {
        hx::emit_report(base / "a");
        hx::emit_report(base / "p");
    } catch (const std::exception& e) {
        report_ok = false;
        o.detail << " report: " << e.what();
    }
    o.require(report_ok, "report recomputation within 1e-12");
    bool tamper_caught = false;
    {
        std::string text = slurp(base / "b" / "events.jsonl");
        const auto pos = text.find("\"agent\":\"random\"");
        text.replace(pos, 16, "\"agent\":\"rAndom\"");
        std::ofstream(base / "b" / "events.jsonl", std::ios::binary | std::ios::trunc) << text;
        try {
            hx::load_run(base / "b");
        } catch (const IntegrityError&) {
            tamper_caught = true;
        }
    }
    o.require(tamper_caught, "tampered log rejected");
    o.detail << a.event_count << " events, serial logs identical, parallel set equal, report verified, tamper detected";
    return o;
}

Verdict llm_contract() {
    Verdict o;
    const auto t0 = Clock::now();
    ::setenv("LUDOBENCH_ACCEPTANCE_KEY", "acceptance", 1);
    auto base_config = [](const lbtest::StubServer& stub) {
        llm::LlmClientConfig c;
        c.endpoint = stub.endpoint();
        c.model = "stub";
        c.api_key_env = "LUDOBENCH_ACCEPTANCE_KEY";
        c.backoff_base_seconds = 0.01;
        c.timeout_seconds = 5.0;
        c.prompts_dir = lbtest::source_dir() / "data" / "prompts";
        return c;
    };
    Scenario s;
    s.id = "q";
    s.prompt = "Pick.";
    s.options = {ScenarioOption{"A", "one"}, ScenarioOption{"B", "two"}};
    {
        lbtest::StubServer stub;
        stub.fixed_reply = "ANSWER: B CONFIDENCE: 70";
        const auto c = base_config(stub);
        llm::LlmAgent agent(std::make_shared<llm::LlmClient>(c), llm::LlmAgent::load_templates(c.prompts_dir));
        const auto a = agent.choose_option(s, {});
        o.require(a.label == "B" && std::abs(a.confidence - 0.70) < 1e-12, "parse ANSWER: B CONFIDENCE: 70");
    }
    {
        lbtest::StubServer stub;
        stub.fixed_reply = "Probably the second one.";
        const auto c = base_config(stub);
        llm::LlmAgent agent(std::make_shared<llm::LlmClient>(c), llm::LlmAgent::load_templates(c.prompts_dir));
        bool malformed = false;
        try {
            agent.choose_option(s, {});
        } catch (const MalformedAnswerError&) {
            malformed = true;
        }
        o.require(malformed, "prose reply is malformed");
    }
    {
        lbtest::StubServer stub;
        stub.fixed_reply = "ANSWER: A CONFIDENCE: 55";
        stub.queue_status(429);
        llm::LlmClient client(base_config(stub));
        const auto reply = client.complete("x");
        o.require(stub.requests() == 2 && reply == "ANSWER: A CONFIDENCE: 55", "429 retried once");
    }
    int peak = 0;
    {
        lbtest::StubServer stub;
        stub.fixed_reply = "ANSWER: A CONFIDENCE: 55";
        stub.delay = std::chrono::milliseconds(30);
        auto c = base_config(stub);
        c.max_concurrency = 3;
        auto client = std::make_shared<llm::LlmClient>(c);
        std::vector<std::thread> pool;
        for (int w = 0; w < 10; ++w) {
            pool.emplace_back([&] {
                for (int i = 0; i < 3; ++i) client->complete("x");
            });
        }
        for (auto& t : pool) t.join();
        peak = stub.max_in_flight();
        o.require(peak <= 3, "in-flight cap 3 respected");
    }
    {
        lbtest::StubServer stub;
        const auto out = lbtest::scratch_dir("acc-llm");
        const json doc{{"seeds", {0, 1}},
                       {"bank", lbtest::default_bank_path().string()},
                       {"agents",
                        {{{"name", "stub"},
                          {"type", "llm"},
                          {"llm",
                           {{"endpoint", stub.endpoint()},
                            {"api_key_env", "LUDOBENCH_ACCEPTANCE_KEY"},
                            {"backoff_base_seconds", 0.01},
                            {"prompts_dir", (lbtest::source_dir() / "data" / "prompts").string()}}}}}},
                       {"parallel", 2},
                       {"out", out.string()}};
        const auto r = hx::run_suite(hx::parse_run_config(doc, lbtest::source_dir()));
        o.require(r.event_count > 0, "full stub run produced events");
        o.detail << "full stub run " << r.event_count << " events; ";
    }
    const double secs = seconds_since(t0);
    o.require(secs < 30.0, "runtime < 30 s");
    o.detail << "parse, malformed, 429 retry checked; peak in flight " << peak << " of 3; " << fmt(secs, 3) << " s";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"oracle-agent metric identities", oracle_identities},
        {"VaR/CVaR brute-force equivalence", var_cvar_equivalence},
        {"gradient correctness", gradient_check},
        {"RARG ablation trend", ablation},
        {"anti-chasing efficacy", anti_chasing},
        {"Iowa task sanity", iowa},
        {"loss-aversion coefficient recovery", lac_recovery},
        {"estimator recovery", estimators},
        {"determinism and integrity", determinism},
        {"LLM client contract", llm_contract},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first
                  << "): " << o.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
