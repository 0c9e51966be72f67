#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "aerialfl/analytic.hpp"
#include "aerialfl/config.hpp"
#include "aerialfl/dataset.hpp"
#include "aerialfl/fl.hpp"
#include "aerialfl/montecarlo.hpp"

namespace aerialfl {

/// A row that could not be computed keeps its key and carries the reason;
/// writers emit it with empty cells and a '# failed' comment.
struct CoverageRow {
    double value = 0.0; // sweep-axis value
    std::optional<SuccessProfile> analytic;
    std::optional<CoverageEstimate> mc;
    std::string error;
};

/// Analytic and simulated coverage for every value of the sweep axis
/// (default: heights 20, 25, ..., 145). trials == 0 skips simulation.
std::vector<CoverageRow> run_coverage_sweep(const ExperimentConfig& cfg);

struct TrainingRun {
    AggregatorKind kind = AggregatorKind::Joint;
    std::vector<RoundMetrics> history;
    std::string error;
};

/// Loads the configured data set (bundled MNIST subset by default).
DataSplit load_data(const ExperimentConfig& cfg);

/// One trajectory per kind over a shared topology, partition and seed.
std::vector<TrainingRun> run_training(const ExperimentConfig& cfg, const NetworkParams& params,
                                      std::span<const AggregatorKind> kinds, const DataSplit& data);

struct ESweepRow {
    int local_epochs = 0;
    AggregatorKind kind = AggregatorKind::Joint;
    double test_accuracy = 0.0;
    std::string error;
};

/// Final test accuracy per (E, kind) at a fixed number of rounds.
std::vector<ESweepRow> run_e_sweep(const ExperimentConfig& cfg, const DataSplit& data);

struct TrendRow {
    std::string environment;
    double height = 0.0;
    AggregatorKind kind = AggregatorKind::Joint;
    double mean_joint_success = 0.0; // average J_k over the cluster's devices
    double final_train_accuracy = 0.0;
    double final_test_accuracy = 0.0;
    std::string error;
};

/// Training accuracy of every aggregator at each sweep height (default 25,
/// 50, 120) in the configured environment.
std::vector<TrendRow> run_height_sweep(const ExperimentConfig& cfg, const DataSplit& data);

/// Training accuracy per environment preset at each environment height.
std::vector<TrendRow> run_env_compare(const ExperimentConfig& cfg, const DataSplit& data);

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Analytic-vs-simulation oracle suite: coverage agreement at heights 20 to
/// 145 and Laplace transforms at the evaluation arguments of the success
/// probability, for heights 45 and 120.
std::vector<ValidationCheck> run_validation(const ExperimentConfig& cfg);

/// CSV writers. Every file starts with '#' lines naming the command, the
/// config hash and the seed, followed by the resolved config as JSON.
void write_metadata(std::ostream& out, const std::string& command, const ExperimentConfig& cfg);
void write_coverage_csv(std::ostream& out, const ExperimentConfig& cfg, std::span<const CoverageRow> rows);
void write_training_csv(std::ostream& out, const ExperimentConfig& cfg, std::span<const TrainingRun> runs);
void write_e_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, std::span<const ESweepRow> rows);
void write_trend_csv(std::ostream& out, const std::string& command, const ExperimentConfig& cfg,
                     std::span<const TrendRow> rows);

} // namespace aerialfl
