#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aerialfl/fl.hpp"
#include "aerialfl/params.hpp"
#include "aerialfl/quadrature.hpp"

namespace aerialfl {

enum class DataSource { Mnist, Synthetic };

struct DataConfig {
    DataSource source = DataSource::Mnist;
    // Empty selects the bundled subset.
    std::filesystem::path mnist_dir;
    std::size_t max_train = 10000;
    std::size_t synthetic_train_per_class = 400;
    std::size_t synthetic_test_per_class = 100;
    int synthetic_classes = 10;
    int synthetic_dim = 784;
    double synthetic_separation = 4.0;
};

struct SweepAxis {
    std::string parameter = "height";
    std::vector<double> values;
};

/// Everything one experiment needs. Defaults are the reference scenario for
/// coverage and the desk-scale setting for training.
struct ExperimentConfig {
    NetworkParams network;
    QuadratureSpec quad;
    TrainConfig train;
    DataConfig data;
    SweepAxis sweep;
    std::vector<AggregatorKind> aggregators{AggregatorKind::Joint, AggregatorKind::UlOnly, AggregatorKind::FedAvg};
    std::vector<int> local_epoch_values{1, 2, 3, 5, 10};
    std::vector<std::string> environments{"suburban", "urban", "dense-urban", "high-rise"};
    std::vector<double> environment_heights{25.0, 120.0};
    // Cluster size and resource blocks used by training experiments; the
    // coverage experiments use network.devices_per_cluster/resource_blocks.
    int fl_devices = 20;
    int fl_blocks = 18;
    long trials = 5000;
    std::uint64_t seed = 1;
    // Empty: AERIALFL_OUT_DIR, else ./results.
    std::filesystem::path output_dir;

    /// Network parameters of the training experiments.
    NetworkParams fl_network() const;

    void validate() const;
};

/// Parses a JSON config on top of the defaults. Unknown keys, non-integer
/// Nakagami parameters and invalid values are rejected with
/// std::invalid_argument. dB-valued keys end in _db.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the resolved config (linear-scale values).
std::string to_json(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of to_json(cfg).
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Sets one network field by sweep-axis name. Throws std::invalid_argument for
/// unknown names.
void set_network_parameter(NetworkParams& params, const std::string& name, double value);

} // namespace aerialfl
