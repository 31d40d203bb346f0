#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "ludobench/error.hpp"
#include "ludobench/harness.hpp"

namespace ludobench::harness {

namespace fs = std::filesystem;

namespace {

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IntegrityError("missing " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IntegrityError(path.string() + ": " + e.what());
    }
}

void check_same(const json& stored, const json& recomputed, const std::string& where) {
    if (stored.is_number() && recomputed.is_number()) {
        const double a = stored.get<double>();
        const double b = recomputed.get<double>();
        if (!(std::abs(a - b) <= 1e-12)) {
            std::ostringstream os;
            os << std::setprecision(17) << where << ": stored " << a << ", recomputed " << b;
            throw IntegrityError(os.str());
        }
        return;
    }
    if (stored.type() != recomputed.type()) {
        throw IntegrityError(where + ": stored " + stored.dump() + ", recomputed " + recomputed.dump());
    }
    if (stored.is_object()) {
        if (stored.size() != recomputed.size()) throw IntegrityError(where + ": key sets differ");
        for (const auto& [k, v] : stored.items()) {
            if (!recomputed.contains(k)) throw IntegrityError(where + "." + k + ": missing after recomputation");
            check_same(v, recomputed.at(k), where + "." + k);
        }
    } else if (stored.is_array()) {
        if (stored.size() != recomputed.size()) throw IntegrityError(where + ": lengths differ");
        for (std::size_t i = 0; i < stored.size(); ++i) {
            check_same(stored[i], recomputed[i], where + "[" + std::to_string(i) + "]");
        }
    } else if (stored != recomputed) {
        throw IntegrityError(where + ": stored " + stored.dump() + ", recomputed " + recomputed.dump());
    }
}

std::string fmt(const json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    std::ostringstream os;
    os << std::setprecision(6) << v.get<double>();
    return os.str();
}

json delta_entry(const json& base, const json& treat) {
    json d{{"baseline", base}, {"treatment", treat}, {"abs", nullptr}, {"pct", nullptr}};
    if (base.is_number() && treat.is_number()) {
        const double b = base.get<double>();
        const double t = treat.get<double>();
        d["abs"] = t - b;
        if (b != 0.0) d["pct"] = 100.0 * (t - b) / std::abs(b);
    }
    return d;
}

json metric_deltas(const json& base, const json& treat) {
    json out;
    for (const auto& key : metric_keys()) out[key] = delta_entry(base.value(key, json()), treat.value(key, json()));
    return out;
}

}  // namespace

LoadedRun load_run(const fs::path& run_dir) {
    LoadedRun run;
    run.manifest = read_json(run_dir / "manifest.json");
    run.metrics = read_json(run_dir / "metrics.json");
    const auto run_id = run.manifest.at("run_id").get<std::string>();

    std::ifstream in(run_dir / "events.jsonl", std::ios::binary);
    if (!in) throw IntegrityError("missing " + (run_dir / "events.jsonl").string());
    std::vector<std::string> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "events.jsonl line " + std::to_string(lineno);
        if (in.eof()) throw IntegrityError(where + ": truncated (no line terminator)");
        json ev;
        try {
            ev = json::parse(line);
        } catch (const json::parse_error&) {
            throw IntegrityError(where + ": not a valid record");
        }
        for (const char* key : {"run_id", "seed", "task", "episode", "step", "agent", "payload", "digest"}) {
            if (!ev.contains(key)) throw IntegrityError(where + ": missing field " + key);
        }
        if (event_line(ev) != line) throw IntegrityError(where + ": digest mismatch (record altered)");
        if (ev.at("run_id") != run_id) throw IntegrityError(where + ": belongs to another run");
        run.events.push_back(std::move(ev));
        lines.push_back(line);
    }
    if (lines.size() != run.manifest.at("event_count").get<std::size_t>()) {
        throw IntegrityError("events.jsonl has " + std::to_string(lines.size()) + " records, manifest lists " +
                             std::to_string(run.manifest.at("event_count").get<std::size_t>()));
    }
    if (event_set_digest(lines) != run.manifest.at("events_digest").get<std::string>()) {
        throw IntegrityError("events.jsonl: event set digest does not match the manifest");
    }
    return run;
}

void emit_report(const fs::path& run_dir) {
    const auto run = load_run(run_dir);
    const auto config = config_from_snapshot(run.manifest.at("config"));
    auto recomputed = fold_metrics(run.events, config);
    recomputed["run_id"] = run.manifest.at("run_id");
    check_same(run.metrics, recomputed, "metrics");

    const auto& agents = recomputed.at("agents");
    std::ofstream csv(run_dir / "summary.csv");
    csv << "agent,seeds";
    for (const auto& k : metric_keys()) csv << "," << k;
    csv << "\n";
    for (const auto& a : agents) {
        csv << a.at("name").get<std::string>() << "," << a.at("per_seed").size();
        for (const auto& k : metric_keys()) csv << "," << fmt(a.at("mean").at(k));
        csv << "\n";
    }

    std::ostringstream md;
    md << "# Run " << run.manifest.at("run_id").get<std::string>() << "\n\n";
    md << "Seeds: " << run.manifest.at("config").at("seeds").dump() << "  \n";
    md << "Events: " << run.manifest.at("event_count") << "  \n";
    const auto& w = run.manifest.at("config").at("metric_weights");
    md << "GTS weights (ob, lc, pm, rrm): " << fmt(w.at("alpha")) << ", " << fmt(w.at("beta")) << ", "
       << fmt(w.at("gamma")) << ", " << fmt(w.at("delta")) << "\n\n";
    md << "## Seed means\n\n| agent |";
    for (const auto& k : metric_keys()) md << " " << k << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < metric_keys().size(); ++i) md << "---|";
    md << "\n";
    for (const auto& a : agents) {
        md << "| " << a.at("name").get<std::string>() << " |";
        for (const auto& k : metric_keys()) md << " " << fmt(a.at("mean").at(k)) << " |";
        md << "\n";
    }
    if (agents.size() > 1) {
        const auto& base = agents[0];
        md << "\n## Deltas against " << base.at("name").get<std::string>() << "\n\n| agent | metric | abs | pct |\n"
           << "|---|---|---|---|\n";
        for (std::size_t i = 1; i < agents.size(); ++i) {
            const auto d = metric_deltas(base.at("mean"), agents[i].at("mean"));
            for (const auto& k : metric_keys()) {
                md << "| " << agents[i].at("name").get<std::string>() << " | " << k << " | " << fmt(d[k]["abs"])
                   << " | " << fmt(d[k]["pct"]) << " |\n";
            }
        }
    }
    std::ofstream(run_dir / "summary.md") << md.str();
}

json compare_runs(const fs::path& baseline_dir, const fs::path& treatment_dir) {
    const auto base = load_run(baseline_dir);
    const auto treat = load_run(treatment_dir);
    const auto& bc = base.manifest.at("config");
    const auto& tc = treat.manifest.at("config");
    if (bc.at("bank_digest") != tc.at("bank_digest")) throw ComparabilityError("runs use different banks");
    const auto bs = bc.at("seeds").get<std::set<std::uint64_t>>();
    const auto ts = tc.at("seeds").get<std::set<std::uint64_t>>();
    if (bs != ts) throw ComparabilityError("runs use different seed sets");

    const auto& ba = base.metrics.at("agents");
    const auto& ta = treat.metrics.at("agents");
    std::vector<std::pair<const json*, const json*>> pairs;
    for (const auto& a : ba) {
        for (const auto& b : ta) {
            if (a.at("name") == b.at("name")) pairs.emplace_back(&a, &b);
        }
    }
    if (pairs.empty() && ba.size() == 1 && ta.size() == 1) pairs.emplace_back(&ba[0], &ta[0]);
    if (pairs.empty()) throw ComparabilityError("no agents in common between the runs");

    json out{{"baseline_run", base.manifest.at("run_id")},
             {"treatment_run", treat.manifest.at("run_id")},
             {"pairs", json::array()}};
    for (const auto& [a, b] : pairs) {
        json per_seed = json::array();
        for (const auto& sa : a->at("per_seed")) {
            for (const auto& sb : b->at("per_seed")) {
                if (sa.at("seed") == sb.at("seed")) {
                    per_seed.push_back({{"seed", sa.at("seed")},
                                        {"deltas", metric_deltas(sa.at("metrics"), sb.at("metrics"))}});
                }
            }
        }
        out["pairs"].push_back({{"baseline_agent", a->at("name")},
                                {"treatment_agent", b->at("name")},
                                {"mean", metric_deltas(a->at("mean"), b->at("mean"))},
                                {"per_seed", per_seed}});
    }
    return out;
}

std::string render_comparison_markdown(const json& c) {
    std::ostringstream md;
    md << "# Comparison " << c.at("baseline_run").get<std::string>() << " -> "
       << c.at("treatment_run").get<std::string>() << "\n";
    for (const auto& p : c.at("pairs")) {
        md << "\n## " << p.at("baseline_agent").get<std::string>() << " vs "
           << p.at("treatment_agent").get<std::string>() << "\n\n| metric | baseline | treatment | abs | pct |\n"
           << "|---|---|---|---|---|\n";
        for (const auto& k : metric_keys()) {
            const auto& d = p.at("mean").at(k);
            md << "| " << k << " | " << fmt(d.at("baseline")) << " | " << fmt(d.at("treatment")) << " | "
               << fmt(d.at("abs")) << " | " << fmt(d.at("pct")) << " |\n";
        }
    }
    return md.str();
}

}  // namespace ludobench::harness
