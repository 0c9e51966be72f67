#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "aerialfl/analytic.hpp"
#include "aerialfl/dataset.hpp"
#include "aerialfl/geometry.hpp"
#include "aerialfl/model.hpp"
#include "aerialfl/montecarlo.hpp"
#include "aerialfl/params.hpp"

namespace aerialfl {

/// Local data of one device: row indices into the shared training set and
/// its weight p_k = n_k / n.
struct DeviceData {
    std::vector<std::size_t> rows;
    double weight = 0.0;
};

struct ModelState {
    std::vector<double> weights;
    int round = 0;
};

/// How the server corrects for lost updates.
///   Joint:  p_k / (q_k J_k), J_k the joint DL/UL success probability.
///   UlOnly: p_k / (q_k J_k^UL), blind to downlink loss.
///   FedAvg: p_k renormalized over the updates that arrived.
enum class AggregatorKind { Joint, UlOnly, FedAvg };

AggregatorKind parse_aggregator(std::string_view name);
std::string_view to_string(AggregatorKind kind);

struct TrainConfig {
    int local_epochs = 2;
    int batch_size = 64;
    double learning_rate = 0.05;
    // eta_t = learning_rate / (1 + lr_decay * t).
    double lr_decay = 0.0;
    int rounds = 60;
    std::uint64_t seed = 1;
    ModelKind model = ModelKind::Logistic;
    int shards_per_device = 2;
    // Treat every link as perfect: J_k = 1 and all indicators pass.
    bool ideal_channel = false;
    // Re-draw the cluster geometry every round instead of hovering over a
    // fixed one. Success profiles are then recomputed each round.
    bool resample_topology = false;

    void validate() const;
};

/// Label-sorted sharding: sort by label, cut into n_devices * shards
/// contiguous shards and deal `shards` of them to every device at random.
/// Throws std::invalid_argument when data has fewer rows than shards.
std::vector<DeviceData> partition_noniid(const Dataset& data, int n_devices, int shards, Rng& rng);

/// E epochs of mini-batch SGD from the broadcast model over the device's
/// shuffled rows. Throws std::runtime_error naming the device and batch when
/// a gradient is not finite.
ModelState local_update(int device, const ModelState& global, const Model& model, const Dataset& data,
                        const DeviceData& local, const TrainConfig& cfg, Rng& rng);

/// Uniform M-subset of {0, ..., N-1}, returned in increasing order.
std::vector<int> schedule(int n_devices, int m_blocks, Rng& rng);

/// Aggregation step. updates[i] is the local model of channel[i].device;
/// profiles and weights are indexed by device; q is the scheduling
/// probability M/N. Throws std::domain_error when a needed success
/// probability is zero.
ModelState aggregate(const ModelState& global, std::span<const ModelState> updates, const RoundChannel& channel,
                     std::span<const SuccessProfile> profiles, std::span<const double> weights, double q,
                     AggregatorKind kind);

/// sum_k p_k F_k(w).
double global_loss(const Model& model, std::span<const double> w, const Dataset& data,
                   std::span<const DeviceData> partitions);

/// Cluster geometry, data split and per-device success probabilities shared
/// by all aggregators of a paired comparison.
struct FederatedSetup {
    Topology topology;
    std::vector<DeviceData> partitions;
    std::vector<SuccessProfile> profiles;
};

/// Success profile of every device at its serving distance, or J = 1 when
/// the channel is ideal.
std::vector<SuccessProfile> device_profiles(const Topology& topology, const NetworkParams& params,
                                            const QuadratureSpec& quad, bool ideal_channel);

FederatedSetup make_federated_setup(const Dataset& train, const TrainConfig& cfg, const NetworkParams& params,
                                    const QuadratureSpec& quad);

struct RoundMetrics {
    int round = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    int scheduled = 0;
    int delivered = 0;
};

/// Server loop. Row 0 holds the metrics of the initial model; row t those
/// after round t. All randomness is keyed by (seed, round, device) and none
/// by the aggregator, so different kinds see identical schedules, channels
/// and SGD noise. Errors are rethrown with the round attached.
std::vector<RoundMetrics> train(const TrainConfig& cfg, const NetworkParams& params, const QuadratureSpec& quad,
                                AggregatorKind kind, const Model& model, const FederatedSetup& setup,
                                const Dataset& train, const Dataset& test);

} // namespace aerialfl
