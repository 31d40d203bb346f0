#include "ludobench/training.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "ludobench/error.hpp"
#include "ludobench/metrics.hpp"

namespace ludobench::training {

void TrainingConfig::validate() const {
    if (!(lambda_scale > 0.0)) throw ConfigError("training: lambda_scale must be positive");
    if (!(kappa > 0.0)) throw ConfigError("training: kappa must be positive");
    if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0)) {
        throw ConfigError("training: lambda1..lambda3 must be non-negative");
    }
    if (!(risk_threshold >= 0.0 && risk_threshold <= 1.0)) {
        throw ConfigError("training: risk_threshold must lie in [0,1]");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("training: learning_rate must be positive");
    if (kappa <= 1.0) std::clog << "warning: training kappa <= 1, losses are not weighted above gains\n";
}

TrainingConfig effective_config(const TrainingConfig& config, const AblationFlags& flags) {
    TrainingConfig out = config;
    if (!flags.loss_aversion) out.lambda1 = 0.0;
    if (!flags.probability_training) out.lambda2 = 0.0;
    if (!flags.risk_calibration) out.lambda3 = 0.0;
    return out;
}

double loss_averse_loss(double base_loss, bool correct, const TrainingConfig& config) {
    if (!(base_loss >= 0.0)) throw ParameterError("loss_averse_loss: base loss must be non-negative");
    return correct ? config.lambda_scale * base_loss : config.lambda_scale * config.kappa * base_loss;
}

double prob_calibration_loss(const DiscreteDistribution& p_true, const DiscreteDistribution& p_model) {
    return metrics::kl_divergence(p_true, p_model);
}

double risk_regularizer(double risk, double threshold) { return std::max(0.0, risk - threshold); }

double total_loss(double lm_loss, double la_loss, double cal_loss, double risk_reg, const TrainingConfig& config) {
    return lm_loss + config.lambda1 * la_loss + config.lambda2 * cal_loss + config.lambda3 * risk_reg;
}

std::vector<TrainingExample> training_examples(const Bank& bank) {
    constexpr std::uint64_t kEventOutcomeSalt = 0xE7E47;
    std::uint64_t index = 0;
    std::vector<TrainingExample> out;
    out.reserve(bank.scenarios.size() + bank.gamble_pairs.size() + bank.probability_items.size());
    for (const auto& s : bank.scenarios) out.push_back({s, s.quality_optimal_index(), false});
    for (const auto& pair : bank.gamble_pairs) {
        auto s = gamble_scenario(pair);
        auto optimal = s.quality_optimal_index();
        out.push_back({std::move(s), optimal, false});
    }
    for (const auto& item : bank.probability_items) {
        TrainingExample ex{agents::event_scenario(item.p_true, item.id), std::nullopt, true};
        // Resolved event: the label is the outcome that occurred, drawn once per item.
        Rng rng(derive_stream(kEventOutcomeSalt, index++));
        ex.optimal = rng.bernoulli(item.p_true) ? 0 : 1;
        out.push_back(std::move(ex));
    }
    return out;
}

namespace {

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::ranges::max_element(v) - v.begin());
}

/// log(sigmoid(z)) without overflow.
double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

}  // namespace

LossParts objective(std::span<const double> theta, std::span<const TrainingExample> examples,
                    const TrainingConfig& config, const risk::RiskWeights& weights, std::vector<double>* grad) {
    if (theta.size() != agents::kFeatureDim) throw ValidationError("objective: theta must have 5 entries");
    if (examples.empty()) throw ValidationError("objective: no training examples");
    agents::ToyPolicy probe;
    probe.theta.assign(theta.begin(), theta.end());
    if (grad) grad->assign(agents::kFeatureDim, 0.0);

    LossParts parts;
    std::vector<double> dscore;
    for (const auto& ex : examples) {
        const auto& options = ex.scenario.options;
        const auto scores = agents::toy_scores(probe, ex.scenario);
        const auto p = agents::softmax(scores);
        const std::size_t n = options.size();
        dscore.assign(n, 0.0);

        if (ex.optimal) {
            const std::size_t o = *ex.optimal;
            const double ce = -std::log(std::max(p[o], std::numeric_limits<double>::min()));
            const bool correct = argmax(scores) == o;
            parts.lm += ce;
            parts.la += loss_averse_loss(ce, correct, config);
            // d la / d score = lambda * (kappa if wrong) * d ce / d score
            const double scale = 1.0 + config.lambda1 * config.lambda_scale * (correct ? 1.0 : config.kappa);
            for (std::size_t i = 0; i < n; ++i) dscore[i] += scale * (p[i] - (i == o ? 1.0 : 0.0));
        }

        if (ex.is_event) {
            double kl = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = options[i].p_correct;
                if (t > 0.0) kl += t * std::log(t / p[i]);
                dscore[i] += config.lambda2 * (p[i] - t);
            }
            parts.cal += kl;
        } else {
            double expected_risk = 0.0;
            std::vector<double> r(n);
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = risk::composite_risk(options[i].risk_components, weights);
                expected_risk += p[i] * r[i];
            }
            const double reg = risk_regularizer(expected_risk, config.risk_threshold);
            parts.reg += reg;
            if (expected_risk > config.risk_threshold) {
                for (std::size_t i = 0; i < n; ++i) dscore[i] += config.lambda3 * p[i] * (r[i] - expected_risk);
            }
        }

        if (grad) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto f = agents::option_features(options[i]);
                for (std::size_t k = 0; k < agents::kFeatureDim; ++k) (*grad)[k] += dscore[i] * f[k];
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(examples.size());
    parts.lm *= inv;
    parts.la *= inv;
    parts.cal *= inv;
    parts.reg *= inv;
    parts.total = total_loss(parts.lm, parts.la, parts.cal, parts.reg, config);
    if (grad) {
        for (auto& g : *grad) g *= inv;
    }
    return parts;
}

double head_loss(const agents::ToyPolicy& policy, std::span<const TrainingExample> examples, bool calibrated,
                 const risk::RiskWeights& weights, std::vector<double>* grad) {
    const std::size_t dim = policy.head.weights.size();
    if (grad) grad->assign(dim + 1, 0.0);
    double loss = 0.0;
    std::size_t count = 0;
    for (const auto& ex : examples) {
        if (ex.is_event || !ex.optimal) continue;
        ++count;
        const auto p = agents::softmax(agents::toy_scores(policy, ex.scenario));
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto x = risk::head_input(agents::toy_head_features(ex.scenario, i, p, weights));
            if (x.size() != dim) throw ValidationError("head_loss: head dimension mismatch");
            double z = policy.head.bias;
            for (std::size_t k = 0; k < dim; ++k) z += policy.head.weights[k] * x[k];
            const double y = calibrated ? ex.scenario.options[i].p_correct : (i == *ex.optimal ? 1.0 : 0.0);
            loss -= p[i] * (y * log_sigmoid(z) + (1.0 - y) * log_sigmoid(-z));
            if (grad) {
                const double dz = p[i] * (risk::sigmoid(z) - y);
                for (std::size_t k = 0; k < dim; ++k) (*grad)[k] += dz * x[k];
                (*grad)[dim] += dz;
            }
        }
    }
    if (count == 0) throw ValidationError("head_loss: no scenario examples");
    const double inv = 1.0 / static_cast<double>(count);
    if (grad) {
        for (auto& g : *grad) g *= inv;
    }
    return loss * inv;
}

agents::ToyPolicy initial_policy(std::uint64_t seed) {
    constexpr std::uint64_t kInitSalt = 0x7011C7;
    Rng rng(derive_stream(seed, kInitSalt));
    agents::ToyPolicy policy;
    for (auto& t : policy.theta) t = rng.normal(0.0, 0.1);
    for (auto& w : policy.head.weights) w = rng.normal(0.0, 0.1);
    policy.head.bias = 0.0;
    return policy;
}

TrainingResult train_toy_policy(const Bank& bank, const TrainingConfig& config, const AblationFlags& flags,
                                const risk::RiskWeights& weights) {
    config.validate();
    if (bank.scenarios.empty()) throw ValidationError("train_toy_policy: bank has no scenarios");
    const auto cfg = effective_config(config, flags);
    const auto examples = training_examples(bank);

    TrainingResult result{initial_policy(config.seed), {}};
    auto& policy = result.policy;
    policy.deck.loss_aversion = flags.loss_aversion ? config.kappa : 1.0;
    result.loss_history.reserve(config.epochs);

    std::vector<double> grad;
    std::vector<double> head_grad;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto parts = objective(policy.theta, examples, cfg, weights, &grad);
        if (!std::isfinite(parts.total) || parts.total > kDivergenceLoss) {
            throw TrainingError("training diverged at epoch " + std::to_string(epoch) + " (loss " + std::to_string(parts.total) + ")", static_cast<int>(epoch));
        }
        result.loss_history.push_back(parts.total);
        head_loss(policy, examples, flags.risk_calibration, weights, &head_grad);
        for (std::size_t k = 0; k < policy.theta.size(); ++k) policy.theta[k] -= cfg.learning_rate * grad[k];
        for (std::size_t k = 0; k < policy.head.weights.size(); ++k) {
            policy.head.weights[k] -= cfg.learning_rate * head_grad[k];
        }
        policy.head.bias -= cfg.learning_rate * head_grad.back();
    }
    return result;
}

double finite_diff_check(const agents::ToyPolicy& policy, std::span<const TrainingExample> examples,
                         const TrainingConfig& config, bool calibrated_head, double epsilon,
                         const risk::RiskWeights& weights) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) throw ParameterError("finite_diff_check: epsilon outside [1e-7, 1e-3]");
    auto rel = [](double a, double n) { return std::abs(a - n) / (std::abs(a) + std::abs(n) + 1e-12); };
    double worst = 0.0;

    std::vector<double> grad;
    objective(policy.theta, examples, config, weights, &grad);
    std::vector<double> theta = policy.theta;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double saved = theta[k];
        theta[k] = saved + epsilon;
        const double up = objective(theta, examples, config, weights, nullptr).total;
        theta[k] = saved - epsilon;
        const double down = objective(theta, examples, config, weights, nullptr).total;
        theta[k] = saved;
        worst = std::max(worst, rel(grad[k], (up - down) / (2.0 * epsilon)));
    }

    std::vector<double> head_grad;
    head_loss(policy, examples, calibrated_head, weights, &head_grad);
    agents::ToyPolicy probe = policy;
    const std::size_t dim = probe.head.weights.size();
    for (std::size_t k = 0; k <= dim; ++k) {
        double& param = k < dim ? probe.head.weights[k] : probe.head.bias;
        const double saved = param;
        param = saved + epsilon;
        const double up = head_loss(probe, examples, calibrated_head, weights, nullptr);
        param = saved - epsilon;
        const double down = head_loss(probe, examples, calibrated_head, weights, nullptr);
        param = saved;
        worst = std::max(worst, rel(head_grad[k], (up - down) / (2.0 * epsilon)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Anti-chasing selection
// ---------------------------------------------------------------------------

void AntiChasingConfig::validate() const {
    if (!(base_tolerance >= 0.0 && base_tolerance <= 1.0)) {
        throw ConfigError("anti_chasing: base_tolerance must lie in [0,1]");
    }
    if (!(chase_sensitivity >= 0.0)) throw ConfigError("anti_chasing: chase_sensitivity must be non-negative");
    if (window_tau == 0) throw ConfigError("anti_chasing: window_tau must be positive");
}

void ErrorHistory::validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && entries[i] <= entries[i - 1]) throw ValidationError("error history: entries must increase");
        if (entries[i] > current_step) throw ValidationError("error history: entry after the current step");
    }
}

double ErrorHistory::recent_fraction(std::size_t tau) const {
    if (entries.empty()) return 0.0;
    // step > current - tau, written without unsigned underflow
    const auto recent = std::ranges::count_if(entries, [&](std::size_t e) { return e + tau > current_step; });
    return static_cast<double>(recent) / static_cast<double>(entries.size());
}

double applied_tolerance(const ErrorHistory& history, const AntiChasingConfig& config) {
    const double e = history.recent_fraction(config.window_tau);
    return std::clamp(config.base_tolerance * (1.0 - config.chase_sensitivity * e), 0.0, 1.0);
}

AntiChasingChoice anti_chasing_select(std::span<const ScenarioOption> candidates, const ErrorHistory& history,
                                      const AntiChasingConfig& config, const risk::RiskWeights& weights) {
    if (candidates.empty()) throw ValidationError("anti_chasing_select: no candidates");
    AntiChasingChoice out;
    out.applied_tolerance = applied_tolerance(history, config);

    std::optional<std::size_t> best;
    std::size_t safest = 0;
    double safest_risk = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const double r = risk::composite_risk(c.risk_components, weights);
        if (r < safest_risk || (r == safest_risk && c.label < candidates[safest].label)) {
            safest = i;
            safest_risk = r;
        }
        if (r > out.applied_tolerance) continue;
        if (!best || c.quality > candidates[*best].quality ||
            (c.quality == candidates[*best].quality && c.label < candidates[*best].label)) {
            best = i;
        }
    }
    out.fallback = !best.has_value();
    out.index = best.value_or(safest);
    return out;
}

AntiChasingAgent::AntiChasingAgent(AgentPtr inner, AntiChasingConfig config, risk::RiskWeights weights)
    : inner_(std::move(inner)), config_(config), weights_(weights) {
    if (!inner_) throw ConfigError("anti_chasing: wrapped agent missing");
    config_.validate();
    weights_.validate();
}

std::string AntiChasingAgent::kind() const { return "anti_chasing(" + inner_->kind() + ")"; }

void AntiChasingAgent::begin_episode(RngState stream) {
    history_ = {};
    inner_->begin_episode(stream);
}

ChoiceAnswer AntiChasingAgent::choose_option(const Scenario& scenario, const ChoiceContext& context) {
    history_.current_step = context.step;
    const auto inner_answer = inner_->choose_option(scenario, context);
    const auto pick = anti_chasing_select(scenario.options, history_, config_, weights_);
    ChoiceAnswer out;
    out.label = scenario.options[pick.index].label;
    out.confidence = inner_->confidence_for(scenario, pick.index).value_or(inner_answer.confidence);
    out.applied_tolerance = pick.applied_tolerance;
    out.fallback = pick.fallback;
    return out;
}

void AntiChasingAgent::observe_feedback(const Scenario& scenario, std::size_t chosen, bool negative) {
    if (negative && (history_.entries.empty() || history_.entries.back() < history_.current_step)) {
        history_.entries.push_back(history_.current_step);
    }
    inner_->observe_feedback(scenario, chosen, negative);
}

std::optional<double> AntiChasingAgent::confidence_for(const Scenario& scenario, std::size_t option) const {
    return inner_->confidence_for(scenario, option);
}

double AntiChasingAgent::estimate_probability(const ProbabilityItem& item) {
    return inner_->estimate_probability(item);
}

Interval AntiChasingAgent::give_interval(const IntervalItem& item) { return inner_->give_interval(item); }

Deck AntiChasingAgent::pick_deck(const DeckObservation& observation) { return inner_->pick_deck(observation); }

std::optional<std::array<double, 2>> AntiChasingAgent::probability_scores(const ProbabilityItem& item) const {
    return inner_->probability_scores(item);
}

}  // namespace ludobench::training
