// Command-line front end: single runs, delta sweeps, and the baseline
// comparison, each emitting deterministic CSV (and optional SVG charts).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedrisk/errors.hpp"
#include "fedrisk/experiment.hpp"
#include "fedrisk/svg.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::optional<double> delta;
    std::string out_dir = ".";
    std::optional<std::string> mnist_images;
    std::optional<std::string> mnist_labels;
    bool svg = false;
    std::optional<int> threads;
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "config file (key = value lines)");
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--variant", opts.variant, "alg1 | ucb | fedsgd_full | fedsgd_partial | centralized");
    cmd->add_option("--delta", opts.delta, "participation threshold");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--mnist-images", opts.mnist_images, "IDX image file (switches dataset to mnist)");
    cmd->add_option("--mnist-labels", opts.mnist_labels, "IDX label file");
    cmd->add_flag("--svg", opts.svg, "also emit SVG charts");
    cmd->add_option("--threads", opts.threads, "worker threads");
}

fedrisk::ExperimentConfig build_config(const CliOptions& opts) {
    fedrisk::ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = fedrisk::load_config_file(opts.config_path, cfg);
    }
    if (opts.seed) {
        cfg.seed = *opts.seed;
    }
    if (opts.variant) {
        cfg.variant = fedrisk::variant_from_string(*opts.variant);
    }
    if (opts.delta) {
        cfg.delta = *opts.delta;
    }
    if (opts.mnist_images) {
        cfg.dataset = fedrisk::DatasetKind::mnist;
        cfg.mnist_images = *opts.mnist_images;
    }
    if (opts.mnist_labels) {
        cfg.mnist_labels = *opts.mnist_labels;
    }
    if (opts.threads) {
        cfg.threads = *opts.threads;
    }
    fedrisk::validate(cfg);
    return cfg;
}

std::string out_path(const CliOptions& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    return (std::filesystem::path(opts.out_dir) / name).string();
}

fedrisk::Series accuracy_series(const std::string& name, const std::vector<fedrisk::RoundLog>& logs) {
    fedrisk::Series s;
    s.name = name;
    for (const auto& log : logs) {
        s.x.push_back(log.round);
        s.y.push_back(log.test_accuracy);
    }
    return s;
}

int cmd_run(const CliOptions& opts) {
    const auto cfg = build_config(opts);
    const auto logs = fedrisk::run(cfg);
    const std::string csv = out_path(opts, std::string("run_") + fedrisk::to_string(cfg.variant) + ".csv");
    fedrisk::emit_csv(logs, csv);
    std::cout << "wrote " << csv << "\n";

    const auto reached = fedrisk::rounds_to_accuracy(logs, cfg.accuracy_target);
    std::cout << "final accuracy " << logs.back().test_accuracy << ", target " << cfg.accuracy_target
              << (reached ? " reached at round " + std::to_string(*reached) : std::string(" not reached"))
              << ", avg links (first 10 rounds) " << fedrisk::links_per_round(logs, 10) << "\n";

    if (opts.svg) {
        std::vector<fedrisk::Series> acc{accuracy_series(fedrisk::to_string(cfg.variant), logs)};
        fedrisk::emit_svg_lines(acc, out_path(opts, "accuracy.svg"), "communication round", "test accuracy");
        fedrisk::Series regret{"cvar_regret", {}, {}};
        fedrisk::Series bound{"bound", {}, {}};
        for (const auto& log : logs) {
            regret.x.push_back(log.round);
            regret.y.push_back(log.cvar_regret);
            bound.x.push_back(log.round);
            bound.y.push_back(log.regret_bound);
        }
        std::vector<fedrisk::Series> reg{regret, bound};
        fedrisk::emit_svg_lines(reg, out_path(opts, "regret.svg"), "communication round", "CVaR-regret");
        std::cout << "wrote " << out_path(opts, "accuracy.svg") << " and " << out_path(opts, "regret.svg") << "\n";
    }
    return 0;
}

int cmd_sweep(const CliOptions& opts) {
    const auto cfg = build_config(opts);
    const auto rows = fedrisk::sweep_delta(cfg, cfg.delta_sweep);
    const std::string csv = out_path(opts, "sweep.csv");
    fedrisk::emit_sweep_csv(rows, csv);
    std::cout << "wrote " << csv << "\n";
    for (const auto& row : rows) {
        std::cout << "delta " << row.delta << ": avg links " << row.avg_links << ", rounds to target "
                  << (row.rounds_to_target ? std::to_string(*row.rounds_to_target) : std::string("-")) << "\n";
    }
    if (opts.svg) {
        fedrisk::Series links{"avg links per round", {}, {}};
        fedrisk::Series rounds{"rounds to target", {}, {}};
        for (const auto& row : rows) {
            links.x.push_back(row.delta);
            links.y.push_back(row.avg_links);
            rounds.x.push_back(row.delta);
            rounds.y.push_back(row.rounds_to_target ? *row.rounds_to_target : cfg.rounds + 1);
        }
        std::vector<fedrisk::Series> a{links};
        std::vector<fedrisk::Series> b{rounds};
        fedrisk::emit_svg_lines(a, out_path(opts, "sweep_links.svg"), "delta", "links per round");
        fedrisk::emit_svg_lines(b, out_path(opts, "sweep_rounds.svg"), "delta", "rounds to target");
        std::cout << "wrote " << out_path(opts, "sweep_links.svg") << " and " << out_path(opts, "sweep_rounds.svg")
                  << "\n";
    }
    return 0;
}

int cmd_baselines(const CliOptions& opts) {
    const auto base = build_config(opts);
    const fedrisk::Variant variants[] = {fedrisk::Variant::alg1, fedrisk::Variant::ucb, fedrisk::Variant::fedsgd_full,
                                         fedrisk::Variant::fedsgd_partial, fedrisk::Variant::centralized};
    std::vector<fedrisk::Series> accuracy_curves;
    for (const auto variant : variants) {
        fedrisk::ExperimentConfig cfg = base;
        cfg.variant = variant;
        const auto logs = fedrisk::run(cfg);
        const std::string csv = out_path(opts, std::string("baseline_") + fedrisk::to_string(variant) + ".csv");
        fedrisk::emit_csv(logs, csv);
        std::cout << fedrisk::to_string(variant) << ": final accuracy " << logs.back().test_accuracy
                  << ", avg links (first 10 rounds) " << fedrisk::links_per_round(logs, 10) << " -> " << csv << "\n";
        accuracy_curves.push_back(accuracy_series(fedrisk::to_string(variant), logs));
    }
    if (opts.svg) {
        fedrisk::emit_svg_lines(accuracy_curves, out_path(opts, "baselines_accuracy.svg"), "communication round",
                                "test accuracy");
        std::cout << "wrote " << out_path(opts, "baselines_accuracy.svg") << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"risk-averse federated learning simulator"};
    app.require_subcommand(1);

    CliOptions opts;
    auto* run_cmd = app.add_subcommand("run", "single simulation run");
    auto* sweep_cmd = app.add_subcommand("sweep", "delta sweep with the alg1 variant");
    auto* baselines_cmd = app.add_subcommand("baselines", "all variants on identical data and seed");
    add_common_options(run_cmd, opts);
    add_common_options(sweep_cmd, opts);
    add_common_options(baselines_cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(opts);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(opts);
        }
        return cmd_baselines(opts);
    } catch (const fedrisk::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const fedrisk::ParseError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
