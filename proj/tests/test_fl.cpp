#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include <omp.h>
#include <zlib.h>

#include "aerialfl/fl.hpp"

using namespace aerialfl;
namespace fs = std::filesystem;

namespace {

// f(w, x) = (w - x)^2 / 2 on a one-dimensional feature.
class ScalarSquaredLoss final : public Model {
public:
    std::size_t parameter_count() const override { return 1; }
    std::vector<double> initial_weights(Rng&) const override { return {0.0}; }
    double loss(std::span<const double> w, const Dataset& data, std::span<const std::size_t> rows,
                std::span<double> grad) const override
    {
        double total = 0.0;
        double g = 0.0;
        for (std::size_t r : rows) {
            const double d = w[0] - data.features[r];
            total += 0.5 * d * d;
            g += d;
        }
        if (!grad.empty()) {
            grad[0] = g / static_cast<double>(rows.size());
        }
        return total / static_cast<double>(rows.size());
    }
    int predict(std::span<const double>, std::span<const float>) const override { return 0; }
};

Dataset scalar_data(std::vector<float> xs)
{
    Dataset d;
    d.dim = 1;
    d.classes = 1;
    d.features = std::move(xs);
    d.labels.assign(d.features.size(), 0);
    return d;
}

Dataset labelled(int per_class, int classes)
{
    Dataset d;
    d.dim = 1;
    d.classes = classes;
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < per_class; ++i) {
            d.labels.push_back(c);
            d.features.push_back(static_cast<float>(c * 1000 + i));
        }
    }
    return d;
}

SuccessProfile profile(double joint, double ul)
{
    SuccessProfile p;
    p.joint = joint;
    p.ul = ul;
    p.dl = joint / ul;
    return p;
}

double relative_fd_error(const Model& model, const Dataset& data, std::span<const std::size_t> rows,
                         std::vector<double> w)
{
    std::vector<double> grad(w.size());
    model.loss(w, data, rows, grad);
    double worst_diff = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double keep = w[j];
        w[j] = keep + 1e-5;
        const double up = model.loss(w, data, rows, {});
        w[j] = keep - 1e-5;
        const double down = model.loss(w, data, rows, {});
        w[j] = keep;
        worst_diff = std::max(worst_diff, std::abs((up - down) / 2e-5 - grad[j]));
        scale = std::max(scale, std::abs(grad[j]));
    }
    return worst_diff / scale;
}

void write_idx(const fs::path& path, const std::vector<unsigned char>& header, const std::vector<unsigned char>& body,
               bool gzip)
{
    std::vector<unsigned char> bytes = header;
    bytes.insert(bytes.end(), body.begin(), body.end());
    if (gzip) {
        gzFile f = gzopen(path.string().c_str(), "wb");
        gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
        gzclose(f);
    } else {
        std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                    static_cast<std::streamsize>(bytes.size()));
    }
}

std::vector<unsigned char> be32(std::initializer_list<std::uint32_t> words)
{
    std::vector<unsigned char> out;
    for (auto w : words) {
        out.push_back(static_cast<unsigned char>(w >> 24));
        out.push_back(static_cast<unsigned char>(w >> 16));
        out.push_back(static_cast<unsigned char>(w >> 8));
        out.push_back(static_cast<unsigned char>(w));
    }
    return out;
}

} // namespace

TEST_CASE("partition_noniid")
{
    const Dataset data = labelled(100, 10);
    SUBCASE("label skew and conservation")
    {
        Rng rng = make_stream(1, {});
        const auto parts = partition_noniid(data, 5, 2, rng);
        REQUIRE(parts.size() == 5);
        std::multiset<std::size_t> seen;
        double weight = 0.0;
        for (const auto& p : parts) {
            std::set<int> labels;
            for (auto r : p.rows) {
                labels.insert(data.labels[r]);
                seen.insert(r);
            }
            CHECK(labels.size() <= 4);
            CHECK(p.weight == doctest::Approx(static_cast<double>(p.rows.size()) / data.size()));
            weight += p.weight;
        }
        CHECK(std::abs(weight - 1.0) <= 1e-12);
        std::multiset<std::size_t> all;
        for (std::size_t i = 0; i < data.size(); ++i) {
            all.insert(i);
        }
        CHECK(seen == all);
    }
    SUBCASE("one device owns everything")
    {
        Rng rng = make_stream(2, {});
        const auto parts = partition_noniid(data, 1, 10, rng);
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].rows.size() == data.size());
        CHECK(parts[0].weight == 1.0);
    }
    SUBCASE("too little data")
    {
        Rng rng = make_stream(3, {});
        const Dataset tiny = labelled(1, 3);
        CHECK_THROWS_WITH_AS(partition_noniid(tiny, 2, 2, rng), doctest::Contains("need at least 4"),
                             std::invalid_argument);
    }
}

TEST_CASE("local_update")
{
    ScalarSquaredLoss model;
    TrainConfig cfg;
    cfg.local_epochs = 1;
    cfg.batch_size = 1;
    cfg.learning_rate = 0.1;
    const Dataset one = scalar_data({1.0f});
    const DeviceData local{{0}, 1.0};
    Rng rng = make_stream(4, {});
    const ModelState w{{0.0}, 3};
    const auto v = local_update(0, w, model, one, local, cfg, rng);
    CHECK(v.weights[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(v.round == 3);

    cfg.learning_rate = 0.0;
    cfg.local_epochs = 4;
    const Dataset many = scalar_data({1.0f, -2.0f, 5.0f});
    const DeviceData all{{0, 1, 2}, 1.0};
    CHECK(local_update(0, ModelState{{0.7}, 0}, model, many, all, cfg, rng).weights[0] == 0.7);

    cfg.learning_rate = 0.1;
    const Dataset bad = scalar_data({1.0f, std::numeric_limits<float>::infinity()});
    const DeviceData both{{0, 1}, 1.0};
    CHECK_THROWS_WITH_AS(local_update(7, ModelState{{0.0}, 0}, model, bad, both, cfg, rng),
                         doctest::Contains("device 7"), std::runtime_error);
    CHECK_THROWS_AS(local_update(0, w, model, one, DeviceData{}, cfg, rng), std::invalid_argument);
}

TEST_CASE("softmax regression")
{
    Rng rng = make_stream(5, {});
    const DataSplit split = make_synthetic_split(20, 5, 10, 30, 2.0, 5);
    const SoftmaxRegression model(30, 10);
    std::vector<std::size_t> rows(split.train.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto w0 = model.initial_weights(rng);
    CHECK(model.loss(w0, split.train, rows, {}) == doctest::Approx(std::log(10.0)).epsilon(1e-12));

    std::normal_distribution<double> normal(0.0, 0.3);
    for (int point = 0; point < 10; ++point) {
        std::vector<double> w(model.parameter_count());
        for (auto& x : w) {
            x = normal(rng);
        }
        CHECK(relative_fd_error(model, split.train, rows, w) <= 1e-6);
    }
}

TEST_CASE("mlp gradient")
{
    Rng rng = make_stream(6, {});
    const DataSplit split = make_synthetic_split(6, 1, 4, 12, 2.0, 6);
    const Mlp model(12, 8, 4);
    std::vector<std::size_t> rows(split.train.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    for (int point = 0; point < 10; ++point) {
        CHECK(relative_fd_error(model, split.train, rows, model.initial_weights(rng)) <= 1e-6);
    }
}

TEST_CASE("schedule")
{
    Rng rng = make_stream(7, {});
    const auto all = schedule(10, 10, rng);
    CHECK(all == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK_THROWS_AS(schedule(10, 11, rng), std::invalid_argument);
    CHECK_THROWS_AS(schedule(10, 0, rng), std::invalid_argument);

    NetworkParams params;
    CHECK(params.scheduling_probability() == 0.9);

    const int n = 20;
    const int m = 18;
    const int rounds = 100000;
    std::vector<int> hits(n, 0);
    for (int t = 0; t < rounds; ++t) {
        const auto s = schedule(n, m, rng);
        CHECK(s.size() == static_cast<std::size_t>(m));
        CHECK(std::is_sorted(s.begin(), s.end()));
        for (int k : s) {
            ++hits[static_cast<std::size_t>(k)];
        }
    }
    const double q = static_cast<double>(m) / n;
    const double sigma = std::sqrt(q * (1.0 - q) / rounds);
    for (int h : hits) {
        CHECK(std::abs(static_cast<double>(h) / rounds - q) <= 3.0 * sigma);
    }
}

TEST_CASE("aggregate")
{
    const ModelState w{{0.0}, 4};
    const std::vector<double> p{0.5, 0.5};
    const std::vector<ModelState> v{{{1.0}, 4}, {{2.0}, 4}};
    SUBCASE("all links lost")
    {
        const RoundChannel lost{{0, false, true, 10.0}, {1, true, false, 20.0}};
        const std::vector<SuccessProfile> prof{profile(0.5, 0.9), profile(0.7, 0.9)};
        for (auto kind : {AggregatorKind::Joint, AggregatorKind::UlOnly, AggregatorKind::FedAvg}) {
            const auto next = aggregate(w, v, lost, prof, p, 1.0, kind);
            CHECK(next.weights[0] == 0.0);
            CHECK(next.round == 5);
        }
    }
    SUBCASE("perfect channel reduces to averaging")
    {
        const RoundChannel ok{{0, true, true, 10.0}, {1, true, true, 20.0}};
        const std::vector<SuccessProfile> prof{profile(1.0, 1.0), profile(1.0, 1.0)};
        CHECK(aggregate(w, v, ok, prof, p, 1.0, AggregatorKind::Joint).weights[0] == doctest::Approx(1.5));
        CHECK(aggregate(w, v, ok, prof, p, 1.0, AggregatorKind::FedAvg).weights[0] == doctest::Approx(1.5));
    }
    SUBCASE("inverse-probability weights")
    {
        const RoundChannel ok{{0, true, true, 10.0}, {1, true, true, 20.0}};
        const std::vector<SuccessProfile> prof{profile(0.5, 0.8), profile(1.0, 1.0)};
        CHECK(aggregate(w, v, ok, prof, p, 1.0, AggregatorKind::Joint).weights[0] == doctest::Approx(2.0));
        CHECK(aggregate(w, v, ok, prof, p, 1.0, AggregatorKind::UlOnly).weights[0] ==
              doctest::Approx(0.5 / 0.8 + 1.0));
    }
    SUBCASE("zero success probability is rejected")
    {
        const RoundChannel ok{{0, true, true, 10.0}, {1, true, true, 20.0}};
        const std::vector<SuccessProfile> prof{profile(0.0, 0.5), profile(1.0, 1.0)};
        CHECK_THROWS_WITH_AS(aggregate(w, v, ok, prof, p, 1.0, AggregatorKind::Joint), doctest::Contains("device 0"),
                             std::domain_error);
    }
}

namespace {

// Mean aggregation increment of a scalar two-device system over many rounds.
double mean_increment(AggregatorKind kind, std::uint64_t seed, int rounds)
{
    const std::vector<double> p{0.5, 0.5};
    const std::vector<SuccessProfile> prof{profile(0.3, 0.6), profile(0.9, 0.95)};
    const ModelState w{{0.0}, 0};
    const std::vector<ModelState> local{{{1.0}, 0}, {{2.0}, 0}};
    Rng rng = make_stream(seed, {});
    double total = 0.0;
    for (int t = 0; t < rounds; ++t) {
        const auto s = schedule(2, 1, rng);
        RoundChannel ch;
        std::vector<ModelState> updates;
        for (int k : s) {
            const bool ok = uniform_open01(rng) < prof[static_cast<std::size_t>(k)].joint;
            ch.push_back({k, ok, ok, 0.0});
            updates.push_back(local[static_cast<std::size_t>(k)]);
        }
        total += aggregate(w, updates, ch, prof, p, 0.5, kind).weights[0];
    }
    return total / rounds;
}

} // namespace

TEST_CASE("joint aggregation is unbiased, FedAvg is not")
{
    const double target = 0.5 * 1.0 + 0.5 * 2.0;
    CHECK(mean_increment(AggregatorKind::Joint, 8, 100000) == doctest::Approx(target).epsilon(0.01));
    CHECK(std::abs(mean_increment(AggregatorKind::FedAvg, 8, 100000) - target) / target > 0.05);
}

TEST_CASE("global_loss weighting identity")
{
    ScalarSquaredLoss model;
    const Dataset data = labelled(7, 6);
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const std::vector<double> w{123.0};
    const double pooled = model.loss(w, data, rows, {});
    for (int devices : {1, 3, 7}) {
        Rng rng = make_stream(9, {static_cast<std::uint64_t>(devices)});
        const auto parts = partition_noniid(data, devices, 2, rng);
        CHECK(global_loss(model, w, data, parts) == doctest::Approx(pooled).epsilon(1e-10));
    }
    Rng rng = make_stream(10, {});
    const auto single = partition_noniid(data, 1, 1, rng);
    CHECK(global_loss(model, w, data, single) == model.loss(w, data, single[0].rows, {}));
}

TEST_CASE("IDX loader")
{
    const fs::path dir = fs::temp_directory_path() / "aerialfl_idx_test";
    fs::create_directories(dir);
    const std::vector<unsigned char> pixels{0, 255, 51, 102, 0, 0, 255, 255};
    for (bool gz : {false, true}) {
        const fs::path img = dir / (gz ? "img.gz" : "img");
        const fs::path lab = dir / (gz ? "lab.gz" : "lab");
        write_idx(img, be32({0x803, 2, 2, 2}), pixels, gz);
        write_idx(lab, be32({0x801, 2}), {3, 9}, gz);
        const Dataset d = load_idx(img, lab);
        CHECK(d.size() == 2);
        CHECK(d.dim == 4);
        CHECK(d.labels == std::vector<int>{3, 9});
        CHECK(d.features[1] == 1.0f);
        CHECK(d.features[2] == doctest::Approx(0.2));
        CHECK(d.sample(1)[3] == 1.0f);
    }
    write_idx(dir / "bad", be32({0x802, 2, 2, 2}), pixels, false);
    CHECK_THROWS_WITH_AS(load_idx(dir / "bad", dir / "lab"), doctest::Contains("magic"), std::runtime_error);
    write_idx(dir / "short", be32({0x803, 3, 2, 2}), pixels, false);
    CHECK_THROWS_AS(load_idx(dir / "short", dir / "lab"), std::runtime_error);
    write_idx(dir / "lab3", be32({0x801, 3}), {1, 2, 3}, false);
    CHECK_THROWS_WITH_AS(load_idx(dir / "img", dir / "lab3"), doctest::Contains("count"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("bundled MNIST subset")
{
    const DataSplit s = load_mnist(AERIALFL_DATA_DIR);
    CHECK(s.train.size() == 4000);
    CHECK(s.test.size() == 1000);
    CHECK(s.train.dim == 784);
    std::map<int, int> counts;
    for (int y : s.train.labels) {
        ++counts[y];
    }
    CHECK(counts.size() == 10);
    for (const auto& [label, n] : counts) {
        CHECK(n == 400);
    }
    const auto [lo, hi] = std::minmax_element(s.train.features.begin(), s.train.features.end());
    CHECK(*lo == 0.0f);
    CHECK(*hi == 1.0f);
    CHECK(load_mnist(AERIALFL_DATA_DIR, 1000).train.size() == 1000);
}

TEST_CASE("synthetic blobs")
{
    Rng rng = make_stream(11, {});
    const Dataset d = make_synthetic_blobs(30, 4, 16, 3.0, rng);
    CHECK(d.size() == 120);
    CHECK(d.features.size() == 120 * 16);
    for (int c = 0; c < 4; ++c) {
        CHECK(std::count(d.labels.begin(), d.labels.end(), c) == 30);
    }
}

TEST_CASE("training")
{
    const DataSplit split = make_synthetic_split(40, 10, 10, 20, 3.0, 12);
    NetworkParams params;
    params.devices_per_cluster = 10;
    params.resource_blocks = 8;
    params.height = 50.0;
    QuadratureSpec quad;
    TrainConfig cfg;
    cfg.rounds = 8;
    cfg.batch_size = 16;
    cfg.seed = 3;
    const SoftmaxRegression model(20, 10);

    SUBCASE("ideal channel: joint and FedAvg coincide")
    {
        cfg.ideal_channel = true;
        const auto setup = make_federated_setup(split.train, cfg, params, quad);
        const auto joint = train(cfg, params, quad, AggregatorKind::Joint, model, setup, split.train, split.test);
        const auto avg = train(cfg, params, quad, AggregatorKind::FedAvg, model, setup, split.train, split.test);
        REQUIRE(joint.size() == avg.size());
        for (std::size_t t = 0; t < joint.size(); ++t) {
            CHECK(joint[t].loss == doctest::Approx(avg[t].loss).epsilon(1e-12));
            CHECK(joint[t].test_accuracy == avg[t].test_accuracy);
        }
        CHECK(joint.back().loss < joint.front().loss);
    }
    SUBCASE("deterministic for a seed and any thread count")
    {
        const auto setup = make_federated_setup(split.train, cfg, params, quad);
        const auto a = train(cfg, params, quad, AggregatorKind::Joint, model, setup, split.train, split.test);
        omp_set_num_threads(3);
        const auto b = train(cfg, params, quad, AggregatorKind::Joint, model, setup, split.train, split.test);
        omp_set_num_threads(1);
        REQUIRE(a.size() == static_cast<std::size_t>(cfg.rounds + 1));
        for (std::size_t t = 0; t < a.size(); ++t) {
            CHECK(a[t].round == static_cast<int>(t));
            CHECK(a[t].loss == b[t].loss);
            CHECK(a[t].delivered == b[t].delivered);
        }
        CHECK(a[0].loss == doctest::Approx(std::log(10.0)));
        CHECK(a[1].scheduled == 8);
    }
    SUBCASE("zero rounds report the initial model")
    {
        cfg.rounds = 0;
        const auto setup = make_federated_setup(split.train, cfg, params, quad);
        const auto h = train(cfg, params, quad, AggregatorKind::UlOnly, model, setup, split.train, split.test);
        REQUIRE(h.size() == 1);
        CHECK(h[0].round == 0);
    }
}
