#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>

#include "aerialfl/config.hpp"
#include "aerialfl/experiments.hpp"

using namespace aerialfl;

namespace {

std::string coverage_csv(const ExperimentConfig& cfg)
{
    std::ostringstream out;
    write_coverage_csv(out, cfg, run_coverage_sweep(cfg));
    return out.str();
}

std::vector<std::string> data_lines(const std::string& csv)
{
    std::vector<std::string> lines;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] != '#') {
            lines.push_back(line);
        }
    }
    return lines;
}

} // namespace

TEST_CASE("config defaults")
{
    const ExperimentConfig cfg = parse_config("{}");
    CHECK(cfg.network.height == 120.0);
    CHECK(cfg.network.devices_per_cluster == 100);
    CHECK(cfg.network.resource_blocks == 90);
    CHECK(cfg.network.tau_dl == doctest::Approx(std::pow(10.0, 1.5)));
    CHECK(cfg.trials == 5000);
    CHECK(cfg.aggregators.size() == 3);
    CHECK(cfg.train.seed == cfg.seed);
    CHECK(cfg.fl_network().devices_per_cluster == cfg.fl_devices);
    CHECK(cfg.fl_network().resource_blocks == cfg.fl_blocks);
}

TEST_CASE("config parsing")
{
    SUBCASE("dB keys are converted")
    {
        const auto cfg = parse_config(R"({"network": {"tau_dl_db": 10, "uav_main_gain_db": 0}})");
        CHECK(cfg.network.tau_dl == doctest::Approx(10.0));
        CHECK(cfg.network.uav_main_gain == doctest::Approx(1.0));
    }
    SUBCASE("environment preset")
    {
        const auto cfg = parse_config(R"({"network": {"environment": "high-rise"}})");
        CHECK(cfg.network.env_a == 27.23);
        CHECK(cfg.network.env_b == 0.08);
        CHECK_THROWS_AS(parse_config(R"({"network": {"environment": "lunar"}})"), std::invalid_argument);
    }
    SUBCASE("seed propagates to training")
    {
        const auto cfg = parse_config(R"({"seed": 42, "train": {"aggregators": ["fedavg"], "rounds": 0}})");
        CHECK(cfg.train.seed == 42);
        CHECK(cfg.train.rounds == 0);
        REQUIRE(cfg.aggregators.size() == 1);
        CHECK(cfg.aggregators[0] == AggregatorKind::FedAvg);
    }
    SUBCASE("rejections")
    {
        CHECK_THROWS_WITH_AS(parse_config(R"({"network": {"hieght": 50}})"), doctest::Contains("network.hieght"),
                             std::invalid_argument);
        CHECK_THROWS_WITH_AS(parse_config(R"({"colour": 1})"), doctest::Contains("colour"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(parse_config(R"({"network": {"m_los": 2.5}})"), doctest::Contains("integer"),
                             std::invalid_argument);
        CHECK_THROWS_AS(parse_config(R"({"network": {"height": -1}})"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config(R"({"network": {"resource_blocks": 101}})"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config(R"({"trials": -1})"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config(R"({"train": {"aggregators": ["median"]}})"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config("[1, 2]"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config("{"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(parse_config(R"({"sweep": {"parameter": "colour", "values": [1]}})"),
                             doctest::Contains("colour"), std::invalid_argument);
    }
}

TEST_CASE("config round trip and hash")
{
    const auto a = parse_config(R"({"network": {"height": 45}, "trials": 100})");
    const auto b = parse_config(to_json(a));
    CHECK(to_json(a) == to_json(b));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(parse_config("{}")));
    auto c = a;
    c.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(c));
}

TEST_CASE("sweep axis names")
{
    NetworkParams p;
    set_network_parameter(p, "height", 77.0);
    CHECK(p.height == 77.0);
    set_network_parameter(p, "tau_dl_db", 10.0);
    CHECK(p.tau_dl == doctest::Approx(10.0));
    CHECK_THROWS_AS(set_network_parameter(p, "colour", 1.0), std::invalid_argument);
}

TEST_CASE("coverage csv")
{
    auto cfg = parse_config(R"({"sweep": {"values": [45, 120]}, "trials": 256, "seed": 5})");
    SUBCASE("byte-identical across runs")
    {
        const std::string first = coverage_csv(cfg);
        CHECK(first == coverage_csv(cfg));
        CHECK(first.rfind("# aerialfl coverage", 0) == 0);
        CHECK(first.find("seed=5") != std::string::npos);
        const auto lines = data_lines(first);
        REQUIRE(lines.size() == 3);
        CHECK(lines[0] == "h,analytic_joint,analytic_ul,analytic_dl,mc_joint,mc_ul,mc_dl,mc_halfwidth");
    }
    SUBCASE("zero trials leaves simulation columns empty")
    {
        cfg.trials = 0;
        const auto lines = data_lines(coverage_csv(cfg));
        REQUIRE(lines.size() == 3);
        CHECK(lines[1].substr(lines[1].size() - 4) == ",,,,");
    }
}

TEST_CASE("training csv at zero rounds")
{
    auto cfg = parse_config(R"({"train": {"rounds": 0, "aggregators": ["joint"]}, "data": {"source": "synthetic",
        "train_per_class": 20, "test_per_class": 5, "dim": 16}})");
    const auto data = load_data(cfg);
    const auto runs = run_training(cfg, cfg.fl_network(), cfg.aggregators, data);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].error.empty());
    std::ostringstream out;
    write_training_csv(out, cfg, runs);
    const auto lines = data_lines(out.str());
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "round,kind,loss,train_acc,test_acc");
    CHECK(lines[1].rfind("0,joint,", 0) == 0);
}
