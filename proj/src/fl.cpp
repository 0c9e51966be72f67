#include "aerialfl/fl.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aerialfl {

AggregatorKind parse_aggregator(std::string_view name)
{
    if (name == "joint") {
        return AggregatorKind::Joint;
    }
    if (name == "ul-only") {
        return AggregatorKind::UlOnly;
    }
    if (name == "fedavg") {
        return AggregatorKind::FedAvg;
    }
    throw std::invalid_argument("unknown aggregator '" + std::string(name) + "' (expected joint, ul-only or fedavg)");
}

std::string_view to_string(AggregatorKind kind)
{
    switch (kind) {
    case AggregatorKind::Joint:
        return "joint";
    case AggregatorKind::UlOnly:
        return "ul-only";
    case AggregatorKind::FedAvg:
        return "fedavg";
    }
    return "?";
}

void TrainConfig::validate() const
{
    if (local_epochs < 1) {
        throw std::invalid_argument("local_epochs must be >= 1");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("batch_size must be >= 1");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be finite and non-negative");
    }
    if (!(lr_decay >= 0.0)) {
        throw std::invalid_argument("lr_decay must be non-negative");
    }
    if (rounds < 0) {
        throw std::invalid_argument("rounds must be >= 0");
    }
    if (shards_per_device < 1) {
        throw std::invalid_argument("shards_per_device must be >= 1");
    }
}

std::vector<DeviceData> partition_noniid(const Dataset& data, int n_devices, int shards, Rng& rng)
{
    if (n_devices < 1 || shards < 1) {
        throw std::invalid_argument("partition_noniid: need at least one device and one shard per device");
    }
    const std::size_t total_shards = static_cast<std::size_t>(n_devices) * static_cast<std::size_t>(shards);
    if (data.size() < total_shards) {
        throw std::invalid_argument("partition_noniid: " + std::to_string(data.size()) + " samples, need at least " +
                                    std::to_string(total_shards));
    }
    std::vector<std::size_t> sorted(data.size());
    std::iota(sorted.begin(), sorted.end(), std::size_t{0});
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](std::size_t a, std::size_t b) { return data.labels[a] < data.labels[b]; });

    std::vector<std::size_t> order(total_shards);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<DeviceData> devices(static_cast<std::size_t>(n_devices));
    for (std::size_t i = 0; i < total_shards; ++i) {
        const std::size_t shard = order[i];
        const std::size_t lo = shard * data.size() / total_shards;
        const std::size_t hi = (shard + 1) * data.size() / total_shards;
        auto& rows = devices[i / static_cast<std::size_t>(shards)].rows;
        rows.insert(rows.end(), sorted.begin() + static_cast<std::ptrdiff_t>(lo),
                    sorted.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    for (auto& d : devices) {
        d.weight = static_cast<double>(d.rows.size()) / static_cast<double>(data.size());
    }
    return devices;
}

ModelState local_update(int device, const ModelState& global, const Model& model, const Dataset& data,
                        const DeviceData& local, const TrainConfig& cfg, Rng& rng)
{
    if (local.rows.empty()) {
        throw std::invalid_argument("local_update: device " + std::to_string(device) + " has no data");
    }
    // Every local run starts from the broadcast model (the local iterate is
    // reset to w_t at each multiple of E).
    ModelState v{global.weights, global.round};
    const double lr = cfg.learning_rate / (1.0 + cfg.lr_decay * global.round);
    std::vector<std::size_t> rows = local.rows;
    std::vector<double> grad(v.weights.size());
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
    int batch_index = 0;
    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t lo = 0; lo < rows.size(); lo += batch, ++batch_index) {
            const std::size_t hi = std::min(rows.size(), lo + batch);
            model.loss(v.weights, data, std::span<const std::size_t>(rows).subspan(lo, hi - lo), grad);
            if (!std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
                throw std::runtime_error("non-finite gradient on device " + std::to_string(device) + ", batch " +
                                         std::to_string(batch_index));
            }
            for (std::size_t j = 0; j < grad.size(); ++j) {
                v.weights[j] -= lr * grad[j];
            }
        }
    }
    return v;
}

std::vector<int> schedule(int n_devices, int m_blocks, Rng& rng)
{
    if (m_blocks < 1 || m_blocks > n_devices) {
        throw std::invalid_argument("schedule: need 1 <= M <= N");
    }
    std::vector<int> all(static_cast<std::size_t>(n_devices));
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(m_blocks));
    std::sample(all.begin(), all.end(), std::back_inserter(picked), m_blocks, rng);
    return picked;
}

ModelState aggregate(const ModelState& global, std::span<const ModelState> updates, const RoundChannel& channel,
                     std::span<const SuccessProfile> profiles, std::span<const double> weights, double q,
                     AggregatorKind kind)
{
    if (updates.size() != channel.size()) {
        throw std::invalid_argument("aggregate: one update per scheduled device required");
    }
    if (!(q > 0.0 && q <= 1.0)) {
        throw std::invalid_argument("aggregate: scheduling probability must lie in (0, 1]");
    }
    const std::size_t dim = global.weights.size();
    ModelState next{global.weights, global.round + 1};
    std::vector<double> delta(dim, 0.0);
    double survivor_weight = 0.0;

    for (std::size_t i = 0; i < channel.size(); ++i) {
        const auto k = static_cast<std::size_t>(channel[i].device);
        if (k >= profiles.size() || k >= weights.size()) {
            throw std::out_of_range("aggregate: device " + std::to_string(k) + " has no profile or weight");
        }
        double coeff = weights[k];
        if (kind != AggregatorKind::FedAvg) {
            const double j = kind == AggregatorKind::Joint ? profiles[k].joint : profiles[k].ul;
            if (!(j > 0.0)) {
                throw std::domain_error("aggregate: zero success probability for device " + std::to_string(k));
            }
            coeff /= q * j;
        }
        if (!channel[i].success()) {
            continue;
        }
        if (updates[i].weights.size() != dim) {
            throw std::invalid_argument("aggregate: update dimension mismatch for device " + std::to_string(k));
        }
        survivor_weight += weights[k];
        for (std::size_t j = 0; j < dim; ++j) {
            delta[j] += coeff * (updates[i].weights[j] - global.weights[j]);
        }
    }
    if (kind == AggregatorKind::FedAvg) {
        if (survivor_weight == 0.0) {
            return next;
        }
        for (double& d : delta) {
            d /= survivor_weight;
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        next.weights[j] += delta[j];
    }
    return next;
}

double global_loss(const Model& model, std::span<const double> w, const Dataset& data,
                   std::span<const DeviceData> partitions)
{
    double total = 0.0;
    for (const auto& d : partitions) {
        if (!d.rows.empty()) {
            total += d.weight * model.loss(w, data, d.rows, {});
        }
    }
    return total;
}

std::vector<SuccessProfile> device_profiles(const Topology& topology, const NetworkParams& params,
                                            const QuadratureSpec& quad, bool ideal_channel)
{
    std::vector<SuccessProfile> out(topology.serving_distances.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double r = topology.serving_distances[k];
        if (ideal_channel) {
            out[k] = {r, 1.0, 1.0, 1.0, 1.0, params.scheduling_probability(), 1.0, 1.0};
        } else {
            out[k] = joint_success_probability(r, params, quad);
        }
    }
    return out;
}

FederatedSetup make_federated_setup(const Dataset& train, const TrainConfig& cfg, const NetworkParams& params,
                                    const QuadratureSpec& quad)
{
    params.validate();
    cfg.validate();
    FederatedSetup s;
    Rng topo_rng = make_stream(cfg.seed, {stream_tag::topology});
    s.topology = sample_topology(params, topo_rng);
    Rng part_rng = make_stream(cfg.seed, {stream_tag::partition});
    s.partitions = partition_noniid(train, params.devices_per_cluster, cfg.shards_per_device, part_rng);
    s.profiles = device_profiles(s.topology, params, quad, cfg.ideal_channel);
    return s;
}

namespace {

RoundMetrics measure(int round, const Model& model, const ModelState& w, const FederatedSetup& setup,
                     const Dataset& train, const Dataset& test)
{
    RoundMetrics m;
    m.round = round;
    m.loss = global_loss(model, w.weights, train, setup.partitions);
    m.train_accuracy = accuracy(model, w.weights, train);
    m.test_accuracy = accuracy(model, w.weights, test);
    return m;
}

} // namespace

std::vector<RoundMetrics> train(const TrainConfig& cfg, const NetworkParams& params, const QuadratureSpec& quad,
                                AggregatorKind kind, const Model& model, const FederatedSetup& setup,
                                const Dataset& train, const Dataset& test)
{
    params.validate();
    cfg.validate();
    const int n = params.devices_per_cluster;
    const int m = params.resource_blocks;
    const double q = params.scheduling_probability();
    if (setup.partitions.size() != static_cast<std::size_t>(n) ||
        setup.profiles.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("train: setup does not match devices_per_cluster");
    }

    Rng init_rng = make_stream(cfg.seed, {stream_tag::init});
    ModelState w{model.initial_weights(init_rng), 0};
    std::vector<RoundMetrics> history;
    history.push_back(measure(0, model, w, setup, train, test));

    const Topology* topology = &setup.topology;
    const std::vector<SuccessProfile>* profiles = &setup.profiles;
    Topology moving_topology;
    std::vector<SuccessProfile> moving_profiles;

    for (int t = 0; t < cfg.rounds; ++t) {
        const auto round = static_cast<std::uint64_t>(t);
        try {
            if (cfg.resample_topology && t > 0) {
                Rng topo_rng = make_stream(cfg.seed, {stream_tag::topology, round});
                moving_topology = sample_topology(params, topo_rng);
                moving_profiles = device_profiles(moving_topology, params, quad, cfg.ideal_channel);
                topology = &moving_topology;
                profiles = &moving_profiles;
            }
            Rng sched_rng = make_stream(cfg.seed, {stream_tag::schedule, round});
            const std::vector<int> scheduled = schedule(n, m, sched_rng);

            RoundChannel channel;
            if (cfg.ideal_channel) {
                for (int k : scheduled) {
                    channel.push_back({k, true, true, topology->serving_distances[static_cast<std::size_t>(k)]});
                }
            } else {
                Rng ch_rng = make_stream(cfg.seed, {stream_tag::channel, round});
                channel = realize_round(*topology, scheduled, params, ch_rng);
            }

            // A device whose update is lost contributes nothing, so its local
            // run is skipped; every device has its own stream, so skipping
            // does not perturb the others.
            std::vector<ModelState> updates(channel.size());
            std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
            for (std::size_t i = 0; i < channel.size(); ++i) {
                if (!channel[i].success()) {
                    continue;
                }
                try {
                    const int k = channel[i].device;
                    Rng local_rng = make_stream(cfg.seed, {stream_tag::local, round, static_cast<std::uint64_t>(k)});
                    updates[i] = local_update(k, w, model, train, setup.partitions[static_cast<std::size_t>(k)], cfg,
                                              local_rng);
                } catch (...) {
#pragma omp critical(aerialfl_train_failure)
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
            if (failure) {
                std::rethrow_exception(failure);
            }

            std::vector<double> weights(setup.partitions.size());
            for (std::size_t k = 0; k < weights.size(); ++k) {
                weights[k] = setup.partitions[k].weight;
            }
            w = aggregate(w, updates, channel, *profiles, weights, q, kind);

            RoundMetrics row = measure(t + 1, model, w, setup, train, test);
            row.scheduled = static_cast<int>(channel.size());
            row.delivered =
                static_cast<int>(std::count_if(channel.begin(), channel.end(), [](const DeviceChannel& c) {
                    return c.success();
                }));
            history.push_back(row);
        } catch (const std::exception& e) {
            throw std::runtime_error("round " + std::to_string(t + 1) + ": " + e.what());
        }
    }
    return history;
}

} // namespace aerialfl
