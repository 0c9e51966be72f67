// Experiment runner: coverage sweeps, FL trainings and the oracle suite.
// Every command writes one CSV into the output directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aerialfl/config.hpp"
#include "aerialfl/experiments.hpp"

namespace fs = std::filesystem;
using namespace aerialfl;

namespace {

constexpr int kPartialFailure = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::optional<int> rounds;
    std::string out;
    std::vector<std::string> aggregators;
    std::string dataset;
    std::string mnist_dir;
    bool full_scale = false;
};

void add_common(CLI::App* sub, Options& o)
{
    sub->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--trials", o.trials, "Monte-Carlo trials per point (0: analytic only)");
    sub->add_option("--out", o.out, "output directory (default $AERIALFL_OUT_DIR or ./results)");
}

void add_training(CLI::App* sub, Options& o)
{
    sub->add_option("--aggregator", o.aggregators, "joint|ul-only|fedavg (repeatable)")
        ->check(CLI::IsMember({"joint", "ul-only", "fedavg"}));
    sub->add_option("--dataset", o.dataset, "mnist|synthetic")->check(CLI::IsMember({"mnist", "synthetic"}));
    sub->add_option("--mnist-dir", o.mnist_dir, "directory with MNIST IDX files");
    sub->add_option("--rounds", o.rounds, "communication rounds");
    sub->add_flag("--full-scale", o.full_scale, "train with the full cluster (N, M of the network section)");
}

ExperimentConfig resolve(const Options& o)
{
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.train.seed = *o.seed;
    }
    if (o.trials) {
        cfg.trials = *o.trials;
    }
    if (o.rounds) {
        cfg.train.rounds = *o.rounds;
    }
    if (!o.aggregators.empty()) {
        cfg.aggregators.clear();
        for (const auto& a : o.aggregators) {
            cfg.aggregators.push_back(parse_aggregator(a));
        }
    }
    if (!o.dataset.empty()) {
        cfg.data.source = o.dataset == "mnist" ? DataSource::Mnist : DataSource::Synthetic;
    }
    if (!o.mnist_dir.empty()) {
        cfg.data.mnist_dir = o.mnist_dir;
    }
    if (o.full_scale) {
        cfg.fl_devices = cfg.network.devices_per_cluster;
        cfg.fl_blocks = cfg.network.resource_blocks;
    }
    if (!o.out.empty()) {
        cfg.output_dir = o.out;
    } else if (cfg.output_dir.empty()) {
        const char* env = std::getenv("AERIALFL_OUT_DIR");
        cfg.output_dir = env != nullptr && *env != '\0' ? env : "results";
    }
    cfg.validate();
    return cfg;
}

fs::path open_output(const ExperimentConfig& cfg, const std::string& name, std::ofstream& out)
{
    fs::create_directories(cfg.output_dir);
    const fs::path path = cfg.output_dir / name;
    out.open(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return path;
}

template <class Rows>
int finish(const fs::path& path, std::ofstream& out, const Rows& rows)
{
    out.close();
    if (!out) {
        throw std::runtime_error("error writing " + path.string());
    }
    std::cerr << "wrote " << path.string() << "\n";
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            std::cerr << "some rows failed; see '# failed' lines\n";
            return kPartialFailure;
        }
    }
    return 0;
}

int cmd_coverage(const ExperimentConfig& cfg)
{
    const auto rows = run_coverage_sweep(cfg);
    std::ofstream out;
    const auto path = open_output(cfg, "coverage.csv", out);
    write_coverage_csv(out, cfg, rows);
    return finish(path, out, rows);
}

int cmd_train(const ExperimentConfig& cfg)
{
    const auto data = load_data(cfg);
    const auto runs = run_training(cfg, cfg.fl_network(), cfg.aggregators, data);
    std::ofstream out;
    const auto path = open_output(cfg, "train.csv", out);
    write_training_csv(out, cfg, runs);
    return finish(path, out, runs);
}

int cmd_sweep_e(const ExperimentConfig& cfg)
{
    const auto data = load_data(cfg);
    const auto rows = run_e_sweep(cfg, data);
    std::ofstream out;
    const auto path = open_output(cfg, "sweep_e.csv", out);
    write_e_sweep_csv(out, cfg, rows);
    return finish(path, out, rows);
}

int cmd_sweep_height(const ExperimentConfig& cfg)
{
    const auto data = load_data(cfg);
    const auto rows = run_height_sweep(cfg, data);
    std::ofstream out;
    const auto path = open_output(cfg, "sweep_height.csv", out);
    write_trend_csv(out, "sweep-height", cfg, rows);
    return finish(path, out, rows);
}

int cmd_env_compare(const ExperimentConfig& cfg)
{
    const auto data = load_data(cfg);
    const auto rows = run_env_compare(cfg, data);
    std::ofstream out;
    const auto path = open_output(cfg, "env_compare.csv", out);
    write_trend_csv(out, "env-compare", cfg, rows);
    return finish(path, out, rows);
}

int cmd_validate(const ExperimentConfig& cfg)
{
    const auto checks = run_validation(cfg);
    std::ofstream out;
    const auto path = open_output(cfg, "validate.csv", out);
    write_metadata(out, "validate", cfg);
    out << "check,passed,detail\n";
    int failed = 0;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        out << c.name << ',' << (c.passed ? 1 : 0) << ",\"" << c.detail << "\"\n";
        failed += c.passed ? 0 : 1;
    }
    out.close();
    std::cerr << "wrote " << path.string() << "\n";
    std::cout << (checks.size() - static_cast<std::size_t>(failed)) << "/" << checks.size() << " checks passed\n";
    return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Federated learning over UAV networks: coverage analysis and training experiments"};
    app.require_subcommand(1);
    Options o;

    auto* coverage = app.add_subcommand("coverage", "analytic and simulated coverage versus a network parameter");
    auto* train = app.add_subcommand("train", "loss/accuracy trajectories per aggregator");
    auto* sweep_e = app.add_subcommand("sweep-e", "final accuracy versus local epochs");
    auto* sweep_h = app.add_subcommand("sweep-height", "training accuracy versus UAV height");
    auto* env = app.add_subcommand("env-compare", "training accuracy per environment preset");
    auto* validate = app.add_subcommand("validate", "analytic-vs-simulation oracle suite");
    for (auto* sub : {coverage, train, sweep_e, sweep_h, env, validate}) {
        add_common(sub, o);
    }
    for (auto* sub : {train, sweep_e, sweep_h, env}) {
        add_training(sub, o);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = resolve(o);
        if (coverage->parsed()) {
            return cmd_coverage(cfg);
        }
        if (train->parsed()) {
            return cmd_train(cfg);
        }
        if (sweep_e->parsed()) {
            return cmd_sweep_e(cfg);
        }
        if (sweep_h->parsed()) {
            return cmd_sweep_height(cfg);
        }
        if (env->parsed()) {
            return cmd_env_compare(cfg);
        }
        return cmd_validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
