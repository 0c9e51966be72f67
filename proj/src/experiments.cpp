#include "aerialfl/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace aerialfl {
namespace {

std::vector<double> default_heights(double lo, double hi, double step)
{
    std::vector<double> h;
    for (double v = lo; v <= hi + 1e-9; v += step) {
        h.push_back(v);
    }
    return h;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string axis_label(const std::string& parameter)
{
    return parameter == "height" ? "h" : parameter;
}

double mean_joint(const FederatedSetup& setup)
{
    double sum = 0.0;
    for (const auto& p : setup.profiles) {
        sum += p.joint;
    }
    return setup.profiles.empty() ? 0.0 : sum / static_cast<double>(setup.profiles.size());
}

struct KindOutcome {
    TrainingRun run;
    double mean_joint = 0.0;
};

std::vector<KindOutcome> train_kinds(const ExperimentConfig& cfg, const TrainConfig& train_cfg,
                                     const NetworkParams& params, std::span<const AggregatorKind> kinds,
                                     const DataSplit& data)
{
    std::vector<KindOutcome> out;
    const auto model = make_model(train_cfg.model, data.train.dim, data.train.classes);
    FederatedSetup setup;
    std::string setup_error;
    try {
        setup = make_federated_setup(data.train, train_cfg, params, cfg.quad);
    } catch (const std::exception& e) {
        setup_error = e.what();
    }
    for (AggregatorKind kind : kinds) {
        KindOutcome o;
        o.run.kind = kind;
        if (!setup_error.empty()) {
            o.run.error = setup_error;
            out.push_back(o);
            continue;
        }
        o.mean_joint = mean_joint(setup);
        try {
            o.run.history = train(train_cfg, params, cfg.quad, kind, *model, setup, data.train, data.test);
        } catch (const std::exception& e) {
            o.run.error = e.what();
        }
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<TrendRow> trend_rows(const ExperimentConfig& cfg, const std::string& environment,
                                 const NetworkParams& base, std::span<const double> heights, const DataSplit& data)
{
    std::vector<TrendRow> rows;
    for (double h : heights) {
        NetworkParams params = base;
        params.height = h;
        for (const auto& o : train_kinds(cfg, cfg.train, params, cfg.aggregators, data)) {
            TrendRow row;
            row.environment = environment;
            row.height = h;
            row.kind = o.run.kind;
            row.mean_joint_success = o.mean_joint;
            row.error = o.run.error;
            if (row.error.empty()) {
                row.final_train_accuracy = o.run.history.back().train_accuracy;
                row.final_test_accuracy = o.run.history.back().test_accuracy;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace

std::vector<CoverageRow> run_coverage_sweep(const ExperimentConfig& cfg)
{
    cfg.validate();
    const std::vector<double> values =
        cfg.sweep.values.empty() ? default_heights(20.0, 145.0, 5.0) : cfg.sweep.values;
    std::vector<CoverageRow> rows(values.size());
    // Points are independent; rows land in sweep order whatever the schedule.
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < values.size(); ++i) {
        CoverageRow& row = rows[i];
        row.value = values[i];
        try {
            NetworkParams params = cfg.network;
            set_network_parameter(params, cfg.sweep.parameter, values[i]);
            params.validate();
            row.analytic = cluster_average_success(params, cfg.quad);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    }
    if (cfg.trials > 0) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!rows[i].error.empty()) {
                continue;
            }
            NetworkParams params = cfg.network;
            set_network_parameter(params, cfg.sweep.parameter, values[i]);
            rows[i].mc = estimate_coverage(params, cfg.trials, cfg.seed + i);
        }
    }
    return rows;
}

DataSplit load_data(const ExperimentConfig& cfg)
{
    const DataConfig& d = cfg.data;
    if (d.source == DataSource::Synthetic) {
        return make_synthetic_split(d.synthetic_train_per_class, d.synthetic_test_per_class, d.synthetic_classes,
                                    d.synthetic_dim, d.synthetic_separation, cfg.seed);
    }
    const std::filesystem::path dir = d.mnist_dir.empty() ? std::filesystem::path(AERIALFL_DEFAULT_MNIST_DIR)
                                                          : d.mnist_dir;
    return load_mnist(dir, d.max_train);
}

std::vector<TrainingRun> run_training(const ExperimentConfig& cfg, const NetworkParams& params,
                                      std::span<const AggregatorKind> kinds, const DataSplit& data)
{
    std::vector<TrainingRun> runs;
    for (auto& o : train_kinds(cfg, cfg.train, params, kinds, data)) {
        runs.push_back(std::move(o.run));
    }
    return runs;
}

std::vector<ESweepRow> run_e_sweep(const ExperimentConfig& cfg, const DataSplit& data)
{
    std::vector<ESweepRow> rows;
    for (int e : cfg.local_epoch_values) {
        TrainConfig train_cfg = cfg.train;
        train_cfg.local_epochs = e;
        for (const auto& o : train_kinds(cfg, train_cfg, cfg.fl_network(), cfg.aggregators, data)) {
            ESweepRow row;
            row.local_epochs = e;
            row.kind = o.run.kind;
            row.error = o.run.error;
            if (row.error.empty()) {
                row.test_accuracy = o.run.history.back().test_accuracy;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<TrendRow> run_height_sweep(const ExperimentConfig& cfg, const DataSplit& data)
{
    const std::vector<double> heights = cfg.sweep.values.empty() ? std::vector<double>{25.0, 50.0, 120.0}
                                                                  : cfg.sweep.values;
    return trend_rows(cfg, "custom", cfg.fl_network(), heights, data);
}

std::vector<TrendRow> run_env_compare(const ExperimentConfig& cfg, const DataSplit& data)
{
    std::vector<TrendRow> rows;
    for (const auto& name : cfg.environments) {
        const auto& env = find_environment(name);
        NetworkParams base = cfg.fl_network();
        base.env_a = env.a;
        base.env_b = env.b;
        auto part = trend_rows(cfg, name, base, cfg.environment_heights, data);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::vector<ValidationCheck> run_validation(const ExperimentConfig& cfg)
{
    cfg.validate();
    std::vector<ValidationCheck> checks;
    const long trials = cfg.trials > 0 ? cfg.trials : 5000;

    ExperimentConfig sweep_cfg = cfg;
    sweep_cfg.sweep.parameter = "height";
    sweep_cfg.trials = trials;
    for (const auto& row : run_coverage_sweep(sweep_cfg)) {
        ValidationCheck c;
        c.name = "coverage h=" + fmt(row.value);
        if (!row.error.empty() || !row.analytic || !row.mc) {
            c.detail = row.error;
            checks.push_back(c);
            continue;
        }
        const double hw_joint = binomial_half_width_95(row.mc->p_joint, row.mc->trials);
        const double hw_ul = binomial_half_width_95(row.mc->p_ul, row.mc->trials);
        const double d_joint = std::abs(row.analytic->joint - row.mc->p_joint);
        const double d_ul = std::abs(row.analytic->ul - row.mc->p_ul);
        c.passed = d_joint <= 0.02 + hw_joint && d_ul <= 0.02 + hw_ul;
        c.detail = "joint analytic " + fmt(row.analytic->joint) + " mc " + fmt(row.mc->p_joint) + " (|d| " +
                   fmt(d_joint) + " <= " + fmt(0.02 + hw_joint) + "), ul analytic " + fmt(row.analytic->ul) +
                   " mc " + fmt(row.mc->p_ul) + " (|d| " + fmt(d_ul) + " <= " + fmt(0.02 + hw_ul) + ")";
        checks.push_back(c);
    }

    // Transforms at s = j eta_z tau / (P G_0 d^-alpha_z) for a device at R/2.
    for (double h : {45.0, 120.0}) {
        NetworkParams params = cfg.network;
        params.height = h;
        const double r = 0.5 * params.cluster_radius;
        const double d_sq = r * r + h * h;
        for (Direction dir : {Direction::Downlink, Direction::Uplink}) {
            const bool dl = dir == Direction::Downlink;
            const double power = dl ? params.uav_power : params.device_power;
            const double tau = dl ? params.tau_dl : params.tau_ul;
            std::vector<double> s_values;
            std::vector<std::string> labels;
            for (LinkType z : {LinkType::Los, LinkType::Nlos}) {
                const int m = params.nakagami_m(z);
                const double signal = power * params.desired_gain() * std::pow(d_sq, -params.path_loss_exponent(z) / 2);
                for (int j = 1; j <= m; ++j) {
                    s_values.push_back(j * eta(m) * tau / signal);
                    labels.push_back(std::string(z == LinkType::Los ? "L" : "N") + " j=" + std::to_string(j));
                }
            }
            const auto mc = laplace_oracle(params, dir, s_values, 100000, cfg.seed);
            for (std::size_t i = 0; i < s_values.size(); ++i) {
                ValidationCheck c;
                c.name = std::string("laplace ") + (dl ? "dl" : "ul") + " h=" + fmt(h) + " " + labels[i];
                try {
                    const double an =
                        dl ? laplace_dl(s_values[i], params, cfg.quad) : laplace_ul(s_values[i], params, cfg.quad);
                    const double rel = std::abs(mc[i].value - an) / an;
                    c.passed = rel <= 0.01;
                    c.detail = "s " + fmt(s_values[i]) + " analytic " + fmt(an) + " mc " + fmt(mc[i].value) + " +- " +
                               fmt(mc[i].half_width) + " rel " + fmt(rel);
                } catch (const std::exception& e) {
                    c.detail = e.what();
                }
                checks.push_back(c);
            }
        }
    }
    return checks;
}

void write_metadata(std::ostream& out, const std::string& command, const ExperimentConfig& cfg)
{
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    out << "# aerialfl " << command << "\n";
    out << "# config_hash=" << hash << " seed=" << cfg.seed << "\n";
    out << "# config=" << to_json(cfg) << "\n";
}

void write_coverage_csv(std::ostream& out, const ExperimentConfig& cfg, std::span<const CoverageRow> rows)
{
    write_metadata(out, "coverage", cfg);
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            out << "# failed " << axis_label(cfg.sweep.parameter) << "=" << fmt(r.value) << ": " << r.error << "\n";
        }
    }
    out << axis_label(cfg.sweep.parameter)
        << ",analytic_joint,analytic_ul,analytic_dl,mc_joint,mc_ul,mc_dl,mc_halfwidth\n";
    for (const auto& r : rows) {
        out << fmt(r.value);
        if (r.analytic) {
            out << ',' << fmt(r.analytic->joint) << ',' << fmt(r.analytic->ul) << ',' << fmt(r.analytic->dl);
        } else {
            out << ",,,";
        }
        if (r.mc) {
            out << ',' << fmt(r.mc->p_joint) << ',' << fmt(r.mc->p_ul) << ',' << fmt(r.mc->p_dl) << ','
                << fmt(r.mc->half_width_joint);
        } else {
            out << ",,,,";
        }
        out << '\n';
    }
}

void write_training_csv(std::ostream& out, const ExperimentConfig& cfg, std::span<const TrainingRun> runs)
{
    write_metadata(out, "train", cfg);
    for (const auto& run : runs) {
        if (!run.error.empty()) {
            out << "# failed kind=" << to_string(run.kind) << ": " << run.error << "\n";
        }
    }
    out << "round,kind,loss,train_acc,test_acc\n";
    for (const auto& run : runs) {
        for (const auto& m : run.history) {
            out << m.round << ',' << to_string(run.kind) << ',' << fmt(m.loss) << ',' << fmt(m.train_accuracy) << ','
                << fmt(m.test_accuracy) << '\n';
        }
    }
}

void write_e_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, std::span<const ESweepRow> rows)
{
    write_metadata(out, "sweep-e", cfg);
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            out << "# failed E=" << r.local_epochs << " kind=" << to_string(r.kind) << ": " << r.error << "\n";
        }
    }
    out << "E,kind,test_acc\n";
    for (const auto& r : rows) {
        out << r.local_epochs << ',' << to_string(r.kind) << ',' << (r.error.empty() ? fmt(r.test_accuracy) : "")
            << '\n';
    }
}

void write_trend_csv(std::ostream& out, const std::string& command, const ExperimentConfig& cfg,
                     std::span<const TrendRow> rows)
{
    write_metadata(out, command, cfg);
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            out << "# failed env=" << r.environment << " h=" << fmt(r.height) << " kind=" << to_string(r.kind)
                << ": " << r.error << "\n";
        }
    }
    out << "environment,h,kind,mean_joint_success,train_acc,test_acc\n";
    for (const auto& r : rows) {
        out << r.environment << ',' << fmt(r.height) << ',' << to_string(r.kind) << ',' << fmt(r.mean_joint_success)
            << ',';
        if (r.error.empty()) {
            out << fmt(r.final_train_accuracy) << ',' << fmt(r.final_test_accuracy);
        } else {
            out << ',';
        }
        out << '\n';
    }
}

} // namespace aerialfl
