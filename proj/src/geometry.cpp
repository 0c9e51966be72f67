#include "aerialfl/geometry.hpp"

#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace aerialfl {

namespace {

constexpr double kArccosSlack = 1e-12;

} // namespace

std::vector<Point2> sample_ppp(double density, double window_radius, Rng& rng)
{
    if (!std::isfinite(density) || !std::isfinite(window_radius)) {
        throw std::invalid_argument("sample_ppp: non-finite density or window radius");
    }
    if (density <= 0.0 || window_radius <= 0.0) {
        throw std::invalid_argument("sample_ppp: density and window radius must be positive");
    }
    const double mean = density * std::numbers::pi * window_radius * window_radius;
    std::poisson_distribution<long> count_dist(mean);
    const long count = count_dist(rng);
    std::vector<Point2> points;
    points.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        points.push_back(sample_uniform_disk({}, window_radius, rng));
    }
    return points;
}

Point2 sample_uniform_disk(Point2 center, double radius, Rng& rng)
{
    const double r = radius * std::sqrt(uniform_open01(rng));
    const double phi = 2.0 * std::numbers::pi * uniform_open01(rng);
    return {center.x + r * std::cos(phi), center.y + r * std::sin(phi)};
}

std::vector<Point2> sample_cluster(Point2 center, int n, double radius, Rng& rng)
{
    if (n < 1 || !(radius > 0.0)) {
        throw std::invalid_argument("sample_cluster: need n >= 1 and radius > 0");
    }
    std::vector<Point2> points;
    points.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Point2 p = sample_uniform_disk(center, radius, rng);
        // Rounding in the translation can put a point a few ulps outside.
        const Point2 d = p - center;
        const double len = norm(d);
        if (len > radius) {
            p = {center.x + d.x * (radius / len), center.y + d.y * (radius / len)};
        }
        points.push_back(p);
    }
    return points;
}

double conditional_distance_pdf(double g, double q, double radius)
{
    if (!(g >= 0.0) || !(q >= 0.0) || !(radius > 0.0)) {
        throw std::invalid_argument("conditional_distance_pdf: need g >= 0, q >= 0, R > 0");
    }
    const double norm_factor = 2.0 * g / (std::numbers::pi * radius * radius);
    double density = 0.0;
    // Arc term: the circle of radius g about the origin crosses the cluster disk.
    if (q > 0.0 && g > 0.0 && g >= std::abs(radius - q) && g <= radius + q) {
        double c = (g * g + q * q - radius * radius) / (2.0 * g * q);
        if (c > 1.0 || c < -1.0) {
            if (std::abs(c) - 1.0 > kArccosSlack) {
                throw std::domain_error("conditional_distance_pdf: arccos argument " + std::to_string(c) +
                                        " outside [-1, 1] inside the support");
            }
            c = c > 0.0 ? 1.0 : -1.0;
        }
        density += norm_factor * std::acos(c);
    }
    // Full-circle term: the circle lies entirely inside the cluster disk.
    if (g < radius - q) {
        density += 2.0 * g / (radius * radius);
    }
    return density;
}

double serving_distance_pdf(double r, double radius)
{
    if (!(radius > 0.0)) {
        throw std::invalid_argument("serving_distance_pdf: radius must be positive");
    }
    if (r < 0.0 || r > radius) {
        return 0.0;
    }
    return 2.0 * r / (radius * radius);
}

Topology sample_topology(const NetworkParams& params, Rng& rng)
{
    params.validate();
    Topology topo;
    topo.uav_positions.push_back({0.0, 0.0});
    for (const auto& p : sample_ppp(params.uav_density, params.window_radius(), rng)) {
        topo.uav_positions.push_back(p);
    }
    topo.clusters.reserve(topo.uav_positions.size());
    for (const auto& u : topo.uav_positions) {
        topo.clusters.push_back(sample_cluster(u, params.devices_per_cluster, params.cluster_radius, rng));
    }
    topo.serving_distances.reserve(topo.clusters.front().size());
    for (const auto& d : topo.clusters.front()) {
        topo.serving_distances.push_back(norm(d));
    }
    return topo;
}

} // namespace aerialfl
