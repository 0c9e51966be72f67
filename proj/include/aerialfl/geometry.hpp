#pragma once

#include <cmath>
#include <vector>

#include "aerialfl/params.hpp"
#include "aerialfl/rng.hpp"

namespace aerialfl {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(Point2, Point2) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double norm_sq(Point2 p) { return p.x * p.x + p.y * p.y; }

/// One realization of the clustered network seen from the typical UAV.
///
/// uav_positions[0] is the typical UAV at the origin; the rest are the PPP
/// sample inside the simulation window. clusters[u] holds the N devices of
/// UAV u, and serving_distances[k] is the horizontal distance of device k of
/// the typical cluster to the origin.
struct Topology {
    std::vector<Point2> uav_positions;
    std::vector<std::vector<Point2>> clusters;
    std::vector<double> serving_distances;

    std::size_t interferer_count() const { return uav_positions.empty() ? 0 : uav_positions.size() - 1; }
};

/// Homogeneous PPP of the given density on the disk of radius window_radius
/// centred at the origin.
std::vector<Point2> sample_ppp(double density, double window_radius, Rng& rng);

Point2 sample_uniform_disk(Point2 center, double radius, Rng& rng);

/// n iid points uniform on the disk of the given radius about center.
std::vector<Point2> sample_cluster(Point2 center, int n, double radius, Rng& rng);

/// Density of the distance g from the origin to a device uniform in a disk of
/// radius R whose centre lies at distance q from the origin.
double conditional_distance_pdf(double g, double q, double radius);

/// Density 2r/R^2 of a device's distance to its own cluster centre.
double serving_distance_pdf(double r, double radius);

/// Typical UAV at the origin plus PPP interferers in the window, each with a
/// full cluster of devices_per_cluster devices.
Topology sample_topology(const NetworkParams& params, Rng& rng);

} // namespace aerialfl
