#include "aerialfl/montecarlo.hpp"

#include <cmath>
#include <stdexcept>


namespace aerialfl {

namespace {

long batch_count(long trials) { return (trials + kTrialsPerBatch - 1) / kTrialsPerBatch; }

long batch_size(long trials, long batch) { return std::min(kTrialsPerBatch, trials - batch * kTrialsPerBatch); }

struct LaplaceSums {
    std::vector<double> sum;
    std::vector<double> sum_sq;
};

double sample_serving_fading(int m, ServingFading law, Rng& rng)
{
    if (law == ServingFading::Gamma) {
        return sample_nakagami_power(m, rng);
    }
    const double rate = m * std::exp(-std::lgamma(m + 1.0) / m);
    double largest = 0.0;
    for (int i = 0; i < m; ++i) {
        largest = std::max(largest, -std::log(uniform_open01(rng)));
    }
    return largest / rate;
}

bool link_success(const NetworkParams& params, LinkType z, double d_sq, double tx_power, double interference,
                  double tau, Rng& rng, ServingFading law = ServingFading::Gamma)
{
    const double fading = sample_serving_fading(params.nakagami_m(z), law, rng);
    const LinkBudget link{tx_power, params.desired_gain(), fading, d_sq, params.path_loss_exponent(z)};
    return compute_sinr(link, interference, params.noise_power) > tau;
}

LaplaceSums laplace_batch(const NetworkParams& params, const GainPattern& pattern, Direction direction,
                          std::span<const double> s_values, std::uint64_t seed, long batch, long trials)
{
    Rng rng = make_stream(seed, {stream_tag::laplace, static_cast<std::uint64_t>(batch)});
    LaplaceSums out{std::vector<double>(s_values.size(), 0.0), std::vector<double>(s_values.size(), 0.0)};
    for (long t = 0; t < trials; ++t) {
        const auto field = sample_ppp(params.uav_density, params.window_radius(), rng);
        const double interference = sample_field_interference(field, params, pattern, direction, rng);
        for (std::size_t i = 0; i < s_values.size(); ++i) {
            const double v = std::exp(-s_values[i] * interference);
            out.sum[i] += v;
            out.sum_sq[i] += v * v;
        }
    }
    return out;
}

std::vector<LaplaceEstimate> finish_laplace(const std::vector<LaplaceSums>& batches, std::size_t n, long trials)
{
    std::vector<double> sum(n, 0.0);
    std::vector<double> sum_sq(n, 0.0);
    for (const auto& b : batches) {
        for (std::size_t i = 0; i < n; ++i) {
            sum[i] += b.sum[i];
            sum_sq[i] += b.sum_sq[i];
        }
    }
    std::vector<LaplaceEstimate> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = sum[i] / trials;
        const double var = std::max(0.0, sum_sq[i] / trials - mean * mean);
        out[i] = {mean, 1.96 * std::sqrt(var / trials)};
    }
    return out;
}

void check_trials(long trials)
{
    if (trials < 1) {
        throw std::invalid_argument("Monte-Carlo: trials must be >= 1");
    }
}

} // namespace

double binomial_half_width_95(double p, long trials)
{
    return trials > 0 ? 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) : 0.0;
}

CoverageEstimate CoverageEstimate::from_tally(const CoverageTally& t)
{
    CoverageEstimate e;
    e.trials = t.trials;
    if (t.trials == 0) {
        return e;
    }
    const double n = static_cast<double>(t.trials);
    e.p_joint = t.joint / n;
    e.p_ul = t.ul / n;
    e.p_dl = t.dl / n;
    e.half_width_joint = binomial_half_width_95(e.p_joint, t.trials);
    e.half_width_ul = binomial_half_width_95(e.p_ul, t.trials);
    e.half_width_dl = binomial_half_width_95(e.p_dl, t.trials);
    return e;
}

CoverageTally coverage_batch(const NetworkParams& params, std::uint64_t seed, long batch, long trials,
                             ServingFading fading)
{
    const GainPattern pattern = build_gain_pattern(params);
    Rng rng = make_stream(seed, {stream_tag::coverage, static_cast<std::uint64_t>(batch)});
    const double h2 = params.height * params.height;
    CoverageTally tally;
    for (long t = 0; t < trials; ++t) {
        const double r = norm(sample_uniform_disk({}, params.cluster_radius, rng));
        const LinkType z = uniform_open01(rng) < los_probability(r, params) ? LinkType::Los : LinkType::Nlos;
        const double d_sq = r * r + h2;
        const auto field = sample_ppp(params.uav_density, params.window_radius(), rng);
        const double i_dl = sample_field_interference(field, params, pattern, Direction::Downlink, rng);
        const double i_ul = sample_field_interference(field, params, pattern, Direction::Uplink, rng);
        const bool dl = link_success(params, z, d_sq, params.uav_power, i_dl, params.tau_dl, rng, fading);
        const bool ul = link_success(params, z, d_sq, params.device_power, i_ul, params.tau_ul, rng, fading);
        ++tally.trials;
        tally.dl += dl;
        tally.ul += ul;
        tally.joint += dl && ul;
    }
    return tally;
}

CoverageEstimate estimate_coverage(const NetworkParams& params, long trials, std::uint64_t seed, ServingFading fading)
{
    params.validate();
    check_trials(trials);
    const long batches = batch_count(trials);
    std::vector<CoverageTally> tallies(static_cast<std::size_t>(batches));
#pragma omp parallel for schedule(dynamic)
    for (long b = 0; b < batches; ++b) {
        tallies[static_cast<std::size_t>(b)] = coverage_batch(params, seed, b, batch_size(trials, b), fading);
    }
    CoverageTally total;
    for (const auto& t : tallies) {
        total += t;
    }
    return CoverageEstimate::from_tally(total);
}

CoverageEstimate estimate_coverage_serial(const NetworkParams& params, long trials, std::uint64_t seed,
                                          ServingFading fading)
{
    params.validate();
    check_trials(trials);
    CoverageTally total;
    for (long b = 0; b < batch_count(trials); ++b) {
        total += coverage_batch(params, seed, b, batch_size(trials, b), fading);
    }
    return CoverageEstimate::from_tally(total);
}

RoundChannel realize_round(const Topology& topology, std::span<const int> schedule, const NetworkParams& params,
                           Rng& rng, InterfererField field)
{
    const GainPattern pattern = build_gain_pattern(params);
    std::vector<Point2> interferers;
    if (field == InterfererField::Fresh) {
        interferers = sample_ppp(params.uav_density, params.window_radius(), rng);
    }
    const double h2 = params.height * params.height;
    RoundChannel out;
    out.reserve(schedule.size());
    for (int k : schedule) {
        if (k < 0 || static_cast<std::size_t>(k) >= topology.serving_distances.size()) {
            throw std::out_of_range("realize_round: scheduled device outside the typical cluster");
        }
        const double r = topology.serving_distances[static_cast<std::size_t>(k)];
        const LinkType z = uniform_open01(rng) < los_probability(r, params) ? LinkType::Los : LinkType::Nlos;
        double i_dl = 0.0;
        double i_ul = 0.0;
        if (field == InterfererField::Fresh) {
            i_dl = sample_field_interference(interferers, params, pattern, Direction::Downlink, rng);
            i_ul = sample_field_interference(interferers, params, pattern, Direction::Uplink, rng);
        } else {
            i_dl = sample_interference(topology, params, Direction::Downlink, rng);
            i_ul = sample_interference(topology, params, Direction::Uplink, rng);
        }
        const double d_sq = r * r + h2;
        DeviceChannel ch;
        ch.device = k;
        ch.serving_distance = r;
        ch.dl_success = link_success(params, z, d_sq, params.uav_power, i_dl, params.tau_dl, rng);
        ch.ul_success = link_success(params, z, d_sq, params.device_power, i_ul, params.tau_ul, rng);
        out.push_back(ch);
    }
    return out;
}

std::vector<LaplaceEstimate> laplace_oracle(const NetworkParams& params, Direction direction,
                                            std::span<const double> s_values, long trials, std::uint64_t seed)
{
    params.validate();
    check_trials(trials);
    const GainPattern pattern = build_gain_pattern(params);
    const long batches = batch_count(trials);
    std::vector<LaplaceSums> sums(static_cast<std::size_t>(batches));
#pragma omp parallel for schedule(dynamic)
    for (long b = 0; b < batches; ++b) {
        sums[static_cast<std::size_t>(b)] =
            laplace_batch(params, pattern, direction, s_values, seed, b, batch_size(trials, b));
    }
    return finish_laplace(sums, s_values.size(), trials);
}

std::vector<LaplaceEstimate> laplace_oracle_serial(const NetworkParams& params, Direction direction,
                                                   std::span<const double> s_values, long trials, std::uint64_t seed)
{
    params.validate();
    check_trials(trials);
    const GainPattern pattern = build_gain_pattern(params);
    std::vector<LaplaceSums> sums;
    for (long b = 0; b < batch_count(trials); ++b) {
        sums.push_back(laplace_batch(params, pattern, direction, s_values, seed, b, batch_size(trials, b)));
    }
    return finish_laplace(sums, s_values.size(), trials);
}

LaplaceEstimate laplace_oracle(const NetworkParams& params, Direction direction, double s, long trials,
                               std::uint64_t seed)
{
    if (!(s >= 0.0)) {
        throw std::invalid_argument("laplace_oracle: s must be non-negative");
    }
    const double one[] = {s};
    return laplace_oracle(params, direction, one, trials, seed).front();
}

} // namespace aerialfl
