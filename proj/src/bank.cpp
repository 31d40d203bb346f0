#include "ludobench/bank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ludobench/error.hpp"

namespace ludobench {

using nlohmann::json;

std::string_view to_string(ScenarioCategory c) noexcept {
    switch (c) {
        case ScenarioCategory::high_risk_factual: return "high-risk-factual";
        case ScenarioCategory::controversial_topic: return "controversial-topic";
        case ScenarioCategory::uncertainty_acknowledgment: return "uncertainty-acknowledgment";
        case ScenarioCategory::speculative_reasoning: return "speculative-reasoning";
    }
    return "unknown";
}

std::optional<ScenarioCategory> parse_category(std::string_view s) noexcept {
    for (auto c : {ScenarioCategory::high_risk_factual, ScenarioCategory::controversial_topic,
                   ScenarioCategory::uncertainty_acknowledgment, ScenarioCategory::speculative_reasoning}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

std::string_view to_string(FallacyTag t) noexcept {
    switch (t) {
        case FallacyTag::none: return "none";
        case FallacyTag::gamblers_fallacy: return "gamblers-fallacy";
        case FallacyTag::hot_hand: return "hot-hand";
        case FallacyTag::base_rate: return "base-rate";
    }
    return "none";
}

std::optional<FallacyTag> parse_fallacy(std::string_view s) noexcept {
    for (auto t : {FallacyTag::none, FallacyTag::gamblers_fallacy, FallacyTag::hot_hand, FallacyTag::base_rate}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::optional<ScenarioCategory> Scenario::category() const noexcept {
    for (const auto& t : tags) {
        if (auto c = parse_category(t)) return c;
    }
    return std::nullopt;
}

std::size_t Scenario::quality_optimal_index() const {
    if (options.empty()) throw ValidationError("scenario " + id + " has no options");
    std::size_t best = 0;
    for (std::size_t i = 1; i < options.size(); ++i) {
        if (options[i].quality > options[best].quality) best = i;
    }
    return best;
}

std::optional<std::size_t> Scenario::find_label(std::string_view label) const noexcept {
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (options[i].label == label) return i;
    }
    return std::nullopt;
}

namespace {

void require_unit(double v, const std::string& path) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(path + ": value " + std::to_string(v) + " outside [0,1]");
    }
}

const json& field(const json& obj, const char* name, const std::string& path) {
    if (!obj.is_object()) throw ValidationError(path + ": expected an object");
    auto it = obj.find(name);
    if (it == obj.end()) throw ValidationError(path + "." + name + ": missing field");
    return *it;
}

double number(const json& obj, const char* name, const std::string& path) {
    const auto& v = field(obj, name, path);
    if (!v.is_number()) throw ValidationError(path + "." + name + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(path + "." + name + ": not finite");
    return d;
}

std::string text(const json& obj, const char* name, const std::string& path) {
    const auto& v = field(obj, name, path);
    if (!v.is_string()) throw ValidationError(path + "." + name + ": expected a string");
    return v.get<std::string>();
}

const json& array(const json& obj, const char* name, const std::string& path) {
    const auto& v = field(obj, name, path);
    if (!v.is_array()) throw ValidationError(path + "." + name + ": expected an array");
    return v;
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

DiscreteDistribution parse_distribution(const json& arr, const std::string& path) {
    if (!arr.is_array()) throw ValidationError(path + ": expected an array of outcomes");
    std::vector<Outcome> outcomes;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto p = at(path, i);
        outcomes.push_back({number(arr[i], "value", p), number(arr[i], "probability", p)});
    }
    try {
        return DiscreteDistribution(std::move(outcomes));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

ScenarioOption parse_option(const json& j, const std::string& path) {
    ScenarioOption o;
    o.label = text(j, "label", path);
    o.text = text(j, "text", path);
    const auto rpath = path + ".risk_components";
    const auto& rc = field(j, "risk_components", path);
    o.risk_components.factual = number(rc, "factual", rpath);
    o.risk_components.controversy = number(rc, "controversy", rpath);
    o.risk_components.uncertainty = number(rc, "uncertainty", rpath);
    require_unit(o.risk_components.factual, rpath + ".factual");
    require_unit(o.risk_components.controversy, rpath + ".controversy");
    require_unit(o.risk_components.uncertainty, rpath + ".uncertainty");
    o.quality = number(j, "quality", path);
    require_unit(o.quality, path + ".quality");
    o.expected_utility = number(j, "expected_utility", path);
    o.p_correct = number(j, "p_correct", path);
    require_unit(o.p_correct, path + ".p_correct");
    return o;
}

template <class T>
void reject_duplicates(const std::vector<T>& items, const std::string& path) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!seen.insert(items[i].id).second) {
            throw ValidationError(at(path, i) + ".id: duplicate id '" + items[i].id + "'");
        }
    }
}

}  // namespace

void validate_scenario(const Scenario& s, const std::string& path) {
    if (s.id.empty()) throw ValidationError(path + ".id: empty id");
    if (s.options.size() < 2) throw ValidationError(path + ".options: a scenario needs at least 2 options");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < s.options.size(); ++i) {
        const auto& o = s.options[i];
        const auto p = at(path + ".options", i);
        if (o.label.empty()) throw ValidationError(p + ".label: empty label");
        if (!labels.insert(o.label).second) throw ValidationError(p + ".label: duplicate label '" + o.label + "'");
        try {
            o.risk_components.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(p + ".risk_components: " + e.what());
        }
        require_unit(o.quality, p + ".quality");
        require_unit(o.p_correct, p + ".p_correct");
        if (!std::isfinite(o.expected_utility)) throw ValidationError(p + ".expected_utility: not finite");
    }
    const auto best = s.quality_optimal_index();
    for (std::size_t i = 0; i < s.options.size(); ++i) {
        if (i != best && s.options[i].quality == s.options[best].quality) {
            throw ValidationError(path + ".options: quality-optimal option is not unique");
        }
    }
    std::size_t categories = 0;
    for (const auto& t : s.tags) categories += parse_category(t).has_value() ? 1 : 0;
    if (categories != 1) {
        throw ValidationError(path + ".tags: exactly one scenario category tag is required");
    }
}

Bank parse_bank(std::string_view document, const std::string& source) {
    json root;
    try {
        root = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ValidationError(source + ": parse error: " + e.what());
    }
    Bank bank;
    const std::string r = "$";
    bank.version = text(root, "version", r);

    const auto& scenarios = array(root, "scenarios", r);
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto p = at(r + ".scenarios", i);
        Scenario s;
        s.id = text(scenarios[i], "id", p);
        s.prompt = text(scenarios[i], "prompt", p);
        const auto& opts = array(scenarios[i], "options", p);
        for (std::size_t k = 0; k < opts.size(); ++k) s.options.push_back(parse_option(opts[k], at(p + ".options", k)));
        const auto& tags = array(scenarios[i], "tags", p);
        for (std::size_t k = 0; k < tags.size(); ++k) {
            if (!tags[k].is_string()) throw ValidationError(at(p + ".tags", k) + ": expected a string");
            s.tags.push_back(tags[k].get<std::string>());
        }
        validate_scenario(s, p);
        bank.scenarios.push_back(std::move(s));
    }
    reject_duplicates(bank.scenarios, r + ".scenarios");

    const auto& probs = array(root, "probability_items", r);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const auto p = at(r + ".probability_items", i);
        ProbabilityItem item;
        item.id = text(probs[i], "id", p);
        item.statement = text(probs[i], "statement", p);
        item.p_true = number(probs[i], "p_true", p);
        require_unit(item.p_true, p + ".p_true");
        if (auto it = probs[i].find("fallacy_tag"); it != probs[i].end() && !it->is_null()) {
            if (!it->is_string()) throw ValidationError(p + ".fallacy_tag: expected a string");
            auto tag = parse_fallacy(it->get<std::string>());
            if (!tag) throw ValidationError(p + ".fallacy_tag: unknown tag '" + it->get<std::string>() + "'");
            item.fallacy_tag = *tag;
        }
        bank.probability_items.push_back(std::move(item));
    }
    reject_duplicates(bank.probability_items, r + ".probability_items");

    const auto& intervals = array(root, "interval_items", r);
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto p = at(r + ".interval_items", i);
        IntervalItem item;
        item.id = text(intervals[i], "id", p);
        item.question = text(intervals[i], "question", p);
        item.true_value = number(intervals[i], "true_value", p);
        item.unit = text(intervals[i], "unit", p);
        item.nominal_level = number(intervals[i], "nominal_level", p);
        if (!(item.nominal_level > 0.0 && item.nominal_level < 1.0)) {
            throw ValidationError(p + ".nominal_level: value outside (0,1)");
        }
        bank.interval_items.push_back(std::move(item));
    }
    reject_duplicates(bank.interval_items, r + ".interval_items");

    const auto& gambles = array(root, "gamble_pairs", r);
    for (std::size_t i = 0; i < gambles.size(); ++i) {
        const auto p = at(r + ".gamble_pairs", i);
        bank.gamble_pairs.push_back(GamblePair{text(gambles[i], "id", p),
                                               parse_distribution(field(gambles[i], "risky", p), p + ".risky"),
                                               parse_distribution(field(gambles[i], "conservative", p),
                                                                  p + ".conservative")});
    }
    reject_duplicates(bank.gamble_pairs, r + ".gamble_pairs");
    return bank;
}

Bank load_bank(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open bank file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_bank(ss.str(), path.string());
}

namespace {

template <class Better>
std::size_t pick_by_risk(const Scenario& s, const risk::RiskWeights& w, Better better) {
    std::size_t best = 0;
    double best_risk = risk::composite_risk(s.options[0].risk_components, w);
    for (std::size_t i = 1; i < s.options.size(); ++i) {
        const double r = risk::composite_risk(s.options[i].risk_components, w);
        if (better(r, best_risk) || (r == best_risk && s.options[i].label < s.options[best].label)) {
            best = i;
            best_risk = r;
        }
    }
    return best;
}

}  // namespace

std::size_t conservative_index(const Scenario& s, const risk::RiskWeights& w) {
    return pick_by_risk(s, w, std::less<>{});
}

std::size_t riskiest_index(const Scenario& s, const risk::RiskWeights& w) {
    return pick_by_risk(s, w, std::greater<>{});
}

metrics::EUChoiceRecord eu_choice_record(const Scenario& s, std::size_t chosen, const risk::RiskWeights& w) {
    const auto cons = conservative_index(s, w);
    double best_risky = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.options.size(); ++i) {
        if (i != cons) best_risky = std::max(best_risky, s.options[i].expected_utility);
    }
    return {best_risky, s.options[cons].expected_utility, chosen != cons};
}

Scenario gamble_scenario(const GamblePair& pair) {
    // Utilities are expressed in units of the largest stake in the pair so
    // that gambles share the scale of scenario annotations.
    const double stake = std::max({std::abs(pair.risky.min_value()), std::abs(pair.risky.max_value()),
                                   std::abs(pair.conservative.min_value()), std::abs(pair.conservative.max_value())});
    const double scale = stake > 0.0 ? stake : 1.0;
    auto annotate = [scale](const DiscreteDistribution& d, std::string label, std::string text) {
        const double mean = d.mean();
        double var = 0.0;
        double p_loss = 0.0;
        double max_abs = 0.0;
        for (const auto& o : d.outcomes()) {
            var += o.probability * (o.value - mean) * (o.value - mean);
            if (o.value < 0.0) p_loss += o.probability;
            max_abs = std::max(max_abs, std::abs(o.value));
        }
        ScenarioOption opt;
        opt.label = std::move(label);
        opt.text = std::move(text);
        opt.risk_components.factual = std::clamp(p_loss, 0.0, 1.0);
        opt.risk_components.uncertainty = max_abs > 0.0 ? std::clamp(std::sqrt(var) / max_abs, 0.0, 1.0) : 0.0;
        opt.expected_utility = mean / scale;
        opt.p_correct = std::clamp(1.0 - p_loss, 0.0, 1.0);
        return opt;
    };
    auto describe = [](const DiscreteDistribution& d) {
        std::ostringstream os;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (i) os << ", ";
            os << d[i].value << " with probability " << d[i].probability;
        }
        return os.str();
    };
    Scenario s;
    s.id = pair.id;
    s.prompt = "Choose one of the two gambles.";
    s.tags = {std::string(to_string(ScenarioCategory::high_risk_factual)), "gamble"};
    s.options.push_back(annotate(pair.risky, "A", "Gamble paying " + describe(pair.risky)));
    s.options.push_back(annotate(pair.conservative, "B", "Gamble paying " + describe(pair.conservative)));
    const bool risky_better = pair.risky.mean() > pair.conservative.mean();
    s.options[0].quality = risky_better ? 1.0 : 0.5;
    s.options[1].quality = risky_better ? 0.5 : 1.0;
    return s;
}

}  // namespace ludobench
