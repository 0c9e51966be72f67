#include "aerialfl/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace aerialfl {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& section, std::initializer_list<const char*> known)
{
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            ok = ok || key == k;
        }
        if (!ok) {
            throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
        }
    }
}

template <class T>
void read(const json& obj, const char* key, T& out)
{
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) {
            throw std::invalid_argument(std::string("config: '") + key + "' must be a boolean");
        }
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
            throw std::invalid_argument(std::string("config: '") + key + "' must be an integer");
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) {
            throw std::invalid_argument(std::string("config: '") + key + "' must be a number");
        }
    }
    out = v.get<T>();
}

void read_db(const json& obj, const char* key, double& out)
{
    if (obj.contains(key)) {
        double db = 0.0;
        read(obj, key, db);
        out = db_to_linear(db);
    }
}

void parse_network(const json& j, NetworkParams& p)
{
    reject_unknown(j, "network",
                   {"uav_density", "devices_per_cluster", "resource_blocks", "cluster_radius", "height", "uav_power",
                    "device_power", "alpha_los", "alpha_nlos", "m_los", "m_nlos", "noise_power", "environment",
                    "env_a", "env_b", "tau_dl", "tau_ul", "uav_main_gain", "device_main_gain", "uav_side_gain",
                    "device_side_gain", "tau_dl_db", "tau_ul_db", "uav_main_gain_db", "device_main_gain_db",
                    "uav_side_gain_db", "device_side_gain_db", "uav_beamwidth", "device_beamwidth",
                    "window_radius"});
    read(j, "uav_density", p.uav_density);
    read(j, "devices_per_cluster", p.devices_per_cluster);
    read(j, "resource_blocks", p.resource_blocks);
    read(j, "cluster_radius", p.cluster_radius);
    read(j, "height", p.height);
    read(j, "uav_power", p.uav_power);
    read(j, "device_power", p.device_power);
    read(j, "alpha_los", p.alpha_los);
    read(j, "alpha_nlos", p.alpha_nlos);
    read(j, "m_los", p.m_los);
    read(j, "m_nlos", p.m_nlos);
    read(j, "noise_power", p.noise_power);
    if (j.contains("environment")) {
        const auto& env = find_environment(j.at("environment").get<std::string>());
        p.env_a = env.a;
        p.env_b = env.b;
    }
    read(j, "env_a", p.env_a);
    read(j, "env_b", p.env_b);
    // Linear keys are what to_json writes; the _db forms win when both appear.
    read(j, "tau_dl", p.tau_dl);
    read(j, "tau_ul", p.tau_ul);
    read(j, "uav_main_gain", p.uav_main_gain);
    read(j, "device_main_gain", p.device_main_gain);
    read(j, "uav_side_gain", p.uav_side_gain);
    read(j, "device_side_gain", p.device_side_gain);
    read_db(j, "tau_dl_db", p.tau_dl);
    read_db(j, "tau_ul_db", p.tau_ul);
    read_db(j, "uav_main_gain_db", p.uav_main_gain);
    read_db(j, "device_main_gain_db", p.device_main_gain);
    read_db(j, "uav_side_gain_db", p.uav_side_gain);
    read_db(j, "device_side_gain_db", p.device_side_gain);
    read(j, "uav_beamwidth", p.uav_beamwidth);
    read(j, "device_beamwidth", p.device_beamwidth);
    read(j, "window_radius", p.window_radius_override);
}

void parse_quad(const json& j, QuadratureSpec& q)
{
    reject_unknown(j, "quadrature", {"rel_tol", "abs_tol", "truncation_radius", "max_subdivisions"});
    read(j, "rel_tol", q.rel_tol);
    read(j, "abs_tol", q.abs_tol);
    read(j, "truncation_radius", q.truncation_radius);
    read(j, "max_subdivisions", q.max_subdivisions);
}

void parse_train(const json& j, ExperimentConfig& c)
{
    reject_unknown(j, "train",
                   {"local_epochs", "batch_size", "learning_rate", "lr_decay", "rounds", "model", "shards_per_device",
                    "ideal_channel", "resample_topology", "devices", "resource_blocks", "aggregators",
                    "local_epoch_values"});
    TrainConfig& t = c.train;
    read(j, "local_epochs", t.local_epochs);
    read(j, "batch_size", t.batch_size);
    read(j, "learning_rate", t.learning_rate);
    read(j, "lr_decay", t.lr_decay);
    read(j, "rounds", t.rounds);
    if (j.contains("model")) {
        t.model = parse_model_kind(j.at("model").get<std::string>());
    }
    read(j, "shards_per_device", t.shards_per_device);
    read(j, "ideal_channel", t.ideal_channel);
    read(j, "resample_topology", t.resample_topology);
    read(j, "devices", c.fl_devices);
    read(j, "resource_blocks", c.fl_blocks);
    if (j.contains("aggregators")) {
        c.aggregators.clear();
        for (const auto& a : j.at("aggregators")) {
            c.aggregators.push_back(parse_aggregator(a.get<std::string>()));
        }
    }
    if (j.contains("local_epoch_values")) {
        c.local_epoch_values = j.at("local_epoch_values").get<std::vector<int>>();
    }
}

void parse_data(const json& j, DataConfig& d)
{
    reject_unknown(j, "data",
                   {"source", "mnist_dir", "max_train", "train_per_class", "test_per_class", "classes", "dim",
                    "separation"});
    if (j.contains("source")) {
        const auto s = j.at("source").get<std::string>();
        if (s == "mnist") {
            d.source = DataSource::Mnist;
        } else if (s == "synthetic") {
            d.source = DataSource::Synthetic;
        } else {
            throw std::invalid_argument("config: data.source must be mnist or synthetic");
        }
    }
    if (j.contains("mnist_dir")) {
        d.mnist_dir = j.at("mnist_dir").get<std::string>();
    }
    read(j, "max_train", d.max_train);
    read(j, "train_per_class", d.synthetic_train_per_class);
    read(j, "test_per_class", d.synthetic_test_per_class);
    read(j, "classes", d.synthetic_classes);
    read(j, "dim", d.synthetic_dim);
    read(j, "separation", d.synthetic_separation);
}

const std::map<std::string, std::function<void(NetworkParams&, double)>>& network_setters()
{
    static const std::map<std::string, std::function<void(NetworkParams&, double)>> setters{
        {"height", [](NetworkParams& p, double v) { p.height = v; }},
        {"uav_density", [](NetworkParams& p, double v) { p.uav_density = v; }},
        {"cluster_radius", [](NetworkParams& p, double v) { p.cluster_radius = v; }},
        {"uav_power", [](NetworkParams& p, double v) { p.uav_power = v; }},
        {"device_power", [](NetworkParams& p, double v) { p.device_power = v; }},
        {"alpha_los", [](NetworkParams& p, double v) { p.alpha_los = v; }},
        {"alpha_nlos", [](NetworkParams& p, double v) { p.alpha_nlos = v; }},
        {"noise_power", [](NetworkParams& p, double v) { p.noise_power = v; }},
        {"env_a", [](NetworkParams& p, double v) { p.env_a = v; }},
        {"env_b", [](NetworkParams& p, double v) { p.env_b = v; }},
        {"tau_dl_db", [](NetworkParams& p, double v) { p.tau_dl = db_to_linear(v); }},
        {"tau_ul_db", [](NetworkParams& p, double v) { p.tau_ul = db_to_linear(v); }},
        {"uav_beamwidth", [](NetworkParams& p, double v) { p.uav_beamwidth = v; }},
        {"device_beamwidth", [](NetworkParams& p, double v) { p.device_beamwidth = v; }},
    };
    return setters;
}

} // namespace

NetworkParams ExperimentConfig::fl_network() const
{
    NetworkParams p = network;
    p.devices_per_cluster = fl_devices;
    p.resource_blocks = fl_blocks;
    return p;
}

void ExperimentConfig::validate() const
{
    network.validate();
    fl_network().validate();
    train.validate();
    if (!(quad.rel_tol > 0.0) || !(quad.abs_tol > 0.0)) {
        throw std::invalid_argument("quadrature tolerances must be positive");
    }
    if (quad.truncation_radius != 0.0 && !(quad.truncation_radius > network.cluster_radius)) {
        throw std::invalid_argument("truncation_radius must exceed the cluster radius");
    }
    if (quad.max_subdivisions < 1) {
        throw std::invalid_argument("max_subdivisions must be >= 1");
    }
    if (trials < 0) {
        throw std::invalid_argument("trials must be >= 0");
    }
    NetworkParams probe = network;
    set_network_parameter(probe, sweep.parameter, network.height);
    for (int e : local_epoch_values) {
        if (e < 1) {
            throw std::invalid_argument("local_epoch_values must be >= 1");
        }
    }
    for (const auto& env : environments) {
        find_environment(env);
    }
}

void set_network_parameter(NetworkParams& params, const std::string& name, double value)
{
    const auto& setters = network_setters();
    const auto it = setters.find(name);
    if (it == setters.end()) {
        throw std::invalid_argument("unknown sweep parameter '" + name + "'");
    }
    it->second(params, value);
}

ExperimentConfig parse_config(const std::string& json_text)
{
    ExperimentConfig c;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("config: top level must be an object");
    }
    reject_unknown(j, "",
                   {"network", "quadrature", "train", "data", "sweep", "environments", "environment_heights", "trials",
                    "seed", "output_dir"});
    try {
        if (j.contains("network")) {
            parse_network(j.at("network"), c.network);
        }
        if (j.contains("quadrature")) {
            parse_quad(j.at("quadrature"), c.quad);
        }
        if (j.contains("train")) {
            parse_train(j.at("train"), c);
        }
        if (j.contains("data")) {
            parse_data(j.at("data"), c.data);
        }
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            reject_unknown(s, "sweep", {"parameter", "values"});
            if (s.contains("parameter")) {
                c.sweep.parameter = s.at("parameter").get<std::string>();
            }
            if (s.contains("values")) {
                c.sweep.values = s.at("values").get<std::vector<double>>();
            }
        }
        if (j.contains("environments")) {
            c.environments = j.at("environments").get<std::vector<std::string>>();
        }
        if (j.contains("environment_heights")) {
            c.environment_heights = j.at("environment_heights").get<std::vector<double>>();
        }
        read(j, "trials", c.trials);
        read(j, "seed", c.seed);
        if (j.contains("output_dir")) {
            c.output_dir = j.at("output_dir").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.train.seed = c.seed;
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string to_json(const ExperimentConfig& c)
{
    const NetworkParams& p = c.network;
    json j;
    j["network"] = {{"uav_density", p.uav_density},
                    {"devices_per_cluster", p.devices_per_cluster},
                    {"resource_blocks", p.resource_blocks},
                    {"cluster_radius", p.cluster_radius},
                    {"height", p.height},
                    {"uav_power", p.uav_power},
                    {"device_power", p.device_power},
                    {"alpha_los", p.alpha_los},
                    {"alpha_nlos", p.alpha_nlos},
                    {"m_los", p.m_los},
                    {"m_nlos", p.m_nlos},
                    {"noise_power", p.noise_power},
                    {"env_a", p.env_a},
                    {"env_b", p.env_b},
                    {"tau_dl", p.tau_dl},
                    {"tau_ul", p.tau_ul},
                    {"uav_main_gain", p.uav_main_gain},
                    {"device_main_gain", p.device_main_gain},
                    {"uav_side_gain", p.uav_side_gain},
                    {"device_side_gain", p.device_side_gain},
                    {"uav_beamwidth", p.uav_beamwidth},
                    {"device_beamwidth", p.device_beamwidth},
                    {"window_radius", p.window_radius()}};
    j["quadrature"] = {{"rel_tol", c.quad.rel_tol},
                       {"abs_tol", c.quad.abs_tol},
                       {"truncation_radius", c.quad.truncation_radius},
                       {"max_subdivisions", c.quad.max_subdivisions}};
    json aggs = json::array();
    for (auto k : c.aggregators) {
        aggs.push_back(std::string(to_string(k)));
    }
    const TrainConfig& t = c.train;
    j["train"] = {{"local_epochs", t.local_epochs},
                  {"batch_size", t.batch_size},
                  {"learning_rate", t.learning_rate},
                  {"lr_decay", t.lr_decay},
                  {"rounds", t.rounds},
                  {"model", std::string(to_string(t.model))},
                  {"shards_per_device", t.shards_per_device},
                  {"ideal_channel", t.ideal_channel},
                  {"resample_topology", t.resample_topology},
                  {"devices", c.fl_devices},
                  {"resource_blocks", c.fl_blocks},
                  {"aggregators", aggs},
                  {"local_epoch_values", c.local_epoch_values}};
    const DataConfig& d = c.data;
    j["data"] = {{"source", d.source == DataSource::Mnist ? "mnist" : "synthetic"},
                 {"mnist_dir", d.mnist_dir.string()},
                 {"max_train", d.max_train},
                 {"train_per_class", d.synthetic_train_per_class},
                 {"test_per_class", d.synthetic_test_per_class},
                 {"classes", d.synthetic_classes},
                 {"dim", d.synthetic_dim},
                 {"separation", d.synthetic_separation}};
    j["sweep"] = {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}};
    j["environments"] = c.environments;
    j["environment_heights"] = c.environment_heights;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : to_json(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace aerialfl
