#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "ludobench/error.hpp"
#include "ludobench/harness.hpp"
#include "ludobench/training.hpp"

namespace lb = ludobench;
namespace hx = ludobench::harness;

int main(int argc, char** argv) {
    CLI::App app{"ludobench: gambling-style risk behavior evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> parallel;

    auto* run = app.add_subcommand("run", "Run the evaluation suite described by a config file");
    run->add_option("--config", config_path, "Run config (JSON)")->required();
    run->add_option("--out", out, "Output directory (overrides config)");
    run->add_option("--seed", seed, "Single seed (overrides config)");
    run->add_option("--parallel", parallel, "Worker count (overrides config)");

    std::string run_dir;
    auto* report = app.add_subcommand("report", "Verify a run and write summary.csv / summary.md");
    report->add_option("run_dir", run_dir, "Run directory")->required();

    std::string baseline;
    std::string treatment;
    auto* compare = app.add_subcommand("compare", "Per-metric deltas between two runs");
    compare->add_option("baseline", baseline, "Baseline run directory")->required();
    compare->add_option("treatment", treatment, "Treatment run directory")->required();
    compare->add_option("--out", out, "Write the comparison JSON here (markdown next to it)");

    auto* train = app.add_subcommand("train-toy", "Train the toy policy and save it as JSON");
    train->add_option("--config", config_path, "Training config (JSON)")->required();
    train->add_option("--out", out, "Policy output path (overrides config)");
    train->add_option("--seed", seed, "Training seed (overrides config)");

    double epsilon = 1e-5;
    std::size_t inits = 20;
    auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the training gradients");
    grad->add_option("--config", config_path, "Training config (JSON)")->required();
    grad->add_option("--seed", seed, "First initialization seed");
    grad->add_option("--epsilon", epsilon, "Central-difference step");
    grad->add_option("--inits", inits, "Number of random initializations");

    std::string bank_path;
    auto* vbank = app.add_subcommand("validate-bank", "Load and validate a bank file");
    vbank->add_option("bank", bank_path, "Bank file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            auto config = hx::load_run_config(config_path);
            if (!out.empty()) config.out_dir = out;
            if (seed) config.seeds = {*seed};
            if (parallel) {
                if (*parallel < 1) throw lb::ConfigError("--parallel must be at least 1");
                config.parallel = *parallel;
            }
            const auto result = hx::run_suite(config);
            std::cout << "run " << result.run_id << ": " << result.event_count << " events in "
                      << result.dir.string() << "\n";
            for (const auto& a : result.metrics.at("agents")) {
                std::cout << "  " << a.at("name").get<std::string>() << "  GTS " << a.at("mean").at("gts").dump()
                          << "\n";
            }
        } else if (*report) {
            hx::emit_report(run_dir);
            std::cout << "report written to " << run_dir << "\n";
        } else if (*compare) {
            const auto c = hx::compare_runs(baseline, treatment);
            const auto md = hx::render_comparison_markdown(c);
            if (!out.empty()) {
                std::ofstream(out) << c.dump(2) << "\n";
                std::ofstream(std::filesystem::path(out).replace_extension(".md")) << md;
            }
            std::cout << md;
        } else if (*train) {
            auto job = hx::load_training_job(config_path);
            if (!out.empty()) job.out = out;
            if (seed) job.config.seed = *seed;
            const auto bank = lb::load_bank(job.bank_path);
            const auto result = lb::training::train_toy_policy(bank, job.config, job.flags);
            hx::save_policy(result.policy, job.out);
            std::cout << "trained " << result.loss_history.size() << " epochs";
            if (!result.loss_history.empty()) std::cout << ", final loss " << result.loss_history.back();
            std::cout << "; policy saved to " << job.out.string() << "\n";
        } else if (*grad) {
            const auto job = hx::load_training_job(config_path);
            const auto bank = lb::load_bank(job.bank_path);
            const auto examples = lb::training::training_examples(bank);
            const auto cfg = lb::training::effective_config(job.config, job.flags);
            double worst = 0.0;
            const std::uint64_t first = seed.value_or(job.config.seed);
            for (std::size_t i = 0; i < inits; ++i) {
                const auto policy = lb::training::initial_policy(first + i);
                worst = std::max(worst, lb::training::finite_diff_check(policy, examples, cfg,
                                                                        job.flags.risk_calibration, epsilon));
            }
            std::cout << "max relative gradient error over " << inits << " initializations: " << worst << "\n";
            return worst < 1e-4 ? 0 : 1;
        } else if (*vbank) {
            const auto bank = lb::load_bank(bank_path);
            std::cout << bank_path << ": ok (" << bank.scenarios.size() << " scenarios, "
                      << bank.probability_items.size() << " probability items, " << bank.interval_items.size()
                      << " interval items, " << bank.gamble_pairs.size() << " gamble pairs)\n";
        }
    } catch (const lb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
