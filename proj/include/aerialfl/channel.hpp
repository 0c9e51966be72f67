#pragma once

#include <array>
#include <span>

#include "aerialfl/geometry.hpp"
#include "aerialfl/params.hpp"
#include "aerialfl/rng.hpp"

namespace aerialfl {

enum class Direction { Downlink, Uplink };

/// Directionality gain of an interfering link: gains[i] occurs with probs[i].
/// Index 0 is main lobe at both ends (G_0 = M_u M_d), then M_u m_d, m_u M_d,
/// m_u m_d.
struct GainPattern {
    std::array<double, 4> gains{};
    std::array<double, 4> probs{};

    /// Index drawn from probs.
    int sample_index(Rng& rng) const;
};

struct LinkBudget {
    double tx_power = 0.0;
    double gain = 0.0;
    double fading_power = 0.0;
    double distance_3d_sq = 0.0;
    double path_loss_exponent = 0.0;
};

/// Probability that a ground device at horizontal distance r sees a UAV at
/// height h in line of sight; the elevation angle is in degrees.
double los_probability(double r, double h, double a, double b);

inline double los_probability(double r, const NetworkParams& params)
{
    return los_probability(r, params.height, params.env_a, params.env_b);
}

GainPattern build_gain_pattern(const NetworkParams& params);

/// Unit-mean Gamma(m, 1/m) power gain of Nakagami-m fading.
double sample_nakagami_power(int m, Rng& rng);

/// P[X > x] for X ~ Gamma(m, 1/m), by the finite Erlang series.
double gamma_ccdf_exact(int m, double x);

/// 1 - (1 - e^{-eta x})^m, the bound used to linearise the gamma CCDF.
double gamma_ccdf_alzer(int m, double eta, double x);

double received_power(const LinkBudget& link);

double compute_sinr(const LinkBudget& desired, double interference, double noise_power);

/// Aggregate interference at the typical cluster's UAV (uplink) or at a
/// typical-cluster device (downlink) from every other cluster in topology.
///
/// Each interferer independently draws its LOS class from los_probability at
/// the distance q of its UAV, a gain from the four-lobe pattern and unit-mean
/// fading. Uplink uses one uniformly chosen active device per cluster.
double sample_interference(const Topology& topology, const NetworkParams& params, Direction direction, Rng& rng);

/// Same draw for a bare list of interfering UAV positions; the uplink active
/// device of each is drawn uniformly in its cluster disk.
double sample_field_interference(std::span<const Point2> interferers, const NetworkParams& params,
                                 const GainPattern& pattern, Direction direction, Rng& rng);

} // namespace aerialfl
