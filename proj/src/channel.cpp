#include "aerialfl/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aerialfl {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

LinkType sample_link_type(double horizontal_distance, const NetworkParams& params, Rng& rng)
{
    return uniform_open01(rng) < los_probability(horizontal_distance, params) ? LinkType::Los : LinkType::Nlos;
}

double interferer_power(double tx_power, double uav_distance, double link_distance_sq, const NetworkParams& params,
                        const GainPattern& pattern, Rng& rng)
{
    const LinkType z = sample_link_type(uav_distance, params, rng);
    const double gain = pattern.gains[static_cast<std::size_t>(pattern.sample_index(rng))];
    const double fading = sample_nakagami_power(params.nakagami_m(z), rng);
    return received_power({tx_power, gain, fading, link_distance_sq + params.height * params.height,
                           params.path_loss_exponent(z)});
}

} // namespace

int GainPattern::sample_index(Rng& rng) const
{
    const double u = uniform_open01(rng);
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
        acc += probs[static_cast<std::size_t>(i)];
        if (u < acc) {
            return i;
        }
    }
    return 3;
}

double los_probability(double r, double h, double a, double b)
{
    if (!(r >= 0.0) || !(h > 0.0) || !(a >= 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("los_probability: need r >= 0, h > 0, a >= 0, b > 0");
    }
    // atan2 gives 90 degrees at r = 0.
    const double elevation_deg = kRadToDeg * std::atan2(h, r);
    return 1.0 / (1.0 + a * std::exp(-b * (elevation_deg - a)));
}

GainPattern build_gain_pattern(const NetworkParams& params)
{
    const double fu = params.uav_beamwidth / (2.0 * std::numbers::pi);
    const double fd = params.device_beamwidth / (2.0 * std::numbers::pi);
    GainPattern g;
    g.gains = {params.uav_main_gain * params.device_main_gain, params.uav_main_gain * params.device_side_gain,
               params.uav_side_gain * params.device_main_gain, params.uav_side_gain * params.device_side_gain};
    g.probs = {fu * fd, fu * (1.0 - fd), (1.0 - fu) * fd, (1.0 - fu) * (1.0 - fd)};
    return g;
}

double sample_nakagami_power(int m, Rng& rng)
{
    if (m < 1) {
        throw std::invalid_argument("sample_nakagami_power: m must be >= 1");
    }
    // Gamma(m, 1/m) with integer m is a scaled sum of m unit exponentials.
    double log_sum = 0.0;
    for (int i = 0; i < m; ++i) {
        log_sum += std::log(uniform_open01(rng));
    }
    return -log_sum / m;
}

double gamma_ccdf_exact(int m, double x)
{
    if (m < 1 || !(x >= 0.0)) {
        throw std::invalid_argument("gamma_ccdf_exact: need m >= 1 and x >= 0");
    }
    const double mx = m * x;
    double term = 1.0;
    double sum = 1.0;
    for (int i = 1; i < m; ++i) {
        term *= mx / i;
        sum += term;
    }
    return std::exp(-mx) * sum;
}

double gamma_ccdf_alzer(int m, double eta, double x)
{
    if (m < 1 || !(eta > 0.0) || !(x >= 0.0)) {
        throw std::invalid_argument("gamma_ccdf_alzer: need m >= 1, eta > 0, x >= 0");
    }
    // 1 - (1 - e^{-eta x})^m, with the inner term as -expm1 for small x.
    return -std::expm1(m * std::log1p(-std::exp(-eta * x)));
}

double received_power(const LinkBudget& link)
{
    return link.tx_power * link.gain * link.fading_power * std::pow(link.distance_3d_sq, -0.5 * link.path_loss_exponent);
}

double compute_sinr(const LinkBudget& desired, double interference, double noise_power)
{
    return received_power(desired) / (interference + noise_power);
}

double sample_field_interference(std::span<const Point2> interferers, const NetworkParams& params,
                                 const GainPattern& pattern, Direction direction, Rng& rng)
{
    double total = 0.0;
    if (direction == Direction::Downlink) {
        for (const auto& u : interferers) {
            const double q_sq = norm_sq(u);
            total += interferer_power(params.uav_power, std::sqrt(q_sq), q_sq, params, pattern, rng);
        }
    } else {
        for (const auto& u : interferers) {
            const Point2 d = sample_uniform_disk(u, params.cluster_radius, rng);
            total += interferer_power(params.device_power, norm(u), norm_sq(d), params, pattern, rng);
        }
    }
    return total;
}

double sample_interference(const Topology& topology, const NetworkParams& params, Direction direction, Rng& rng)
{
    const GainPattern pattern = build_gain_pattern(params);
    double total = 0.0;
    for (std::size_t u = 1; u < topology.uav_positions.size(); ++u) {
        const Point2 uav = topology.uav_positions[u];
        if (direction == Direction::Downlink) {
            const double q_sq = norm_sq(uav);
            total += interferer_power(params.uav_power, std::sqrt(q_sq), q_sq, params, pattern, rng);
        } else {
            const auto& cluster = topology.clusters.at(u);
            if (cluster.empty()) {
                continue;
            }
            std::uniform_int_distribution<std::size_t> pick(0, cluster.size() - 1);
            const Point2 d = cluster[pick(rng)];
            total += interferer_power(params.device_power, norm(uav), norm_sq(d), params, pattern, rng);
        }
    }
    return total;
}

} // namespace aerialfl
