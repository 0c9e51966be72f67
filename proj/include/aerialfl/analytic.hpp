#pragma once

#include "aerialfl/channel.hpp"
#include "aerialfl/params.hpp"
#include "aerialfl/quadrature.hpp"

namespace aerialfl {

/// Success probabilities of a typical-cluster device, conditioned on being
/// scheduled. joint = p_los * joint_los + (1 - p_los) * joint_nlos; ul and dl
/// are the single-link success probabilities (the other link's factor set
/// to one).
struct SuccessProfile {
    double serving_distance = 0.0;
    double joint = 0.0;
    double joint_los = 0.0;
    double joint_nlos = 0.0;
    double p_los = 0.0;
    double scheduling_prob = 0.0;
    double ul = 0.0;
    double dl = 0.0;
};

enum class ClusterRegion {
    Overlap, // interfering cluster centre within R of the origin (q <= R)
    Faraway, // cluster disk does not cover the origin (q >= R)
};

/// eta = m (m!)^{-1/m}.
double eta(int m);

/// Laplace transform E[exp(-s I_DL)] of the downlink interference from all
/// other UAVs, split by their LOS class.
double laplace_dl(double s, const NetworkParams& params, const QuadratureSpec& quad);

/// Laplace transform E[exp(-s I_UL)] of the inter-cluster uplink interference
/// with one active device per interfering cluster.
double laplace_ul(double s, const NetworkParams& params, const QuadratureSpec& quad);

/// Average of sum_i p_i (1 + s P_d G_i (g^2+h^2)^{-alpha_z/2} / m_z)^{-m_z}
/// over the device distance g of a cluster centred at distance q.
double o_e_inner(double s, double q, ClusterRegion region, LinkType z, const NetworkParams& params,
                 const QuadratureSpec& quad);

/// Upper bound on -log of the factor the truncated distance integral drops,
/// i.e. the relative change of the transform if the network extended to
/// infinity.
double laplace_tail_bound(double s, Direction direction, const NetworkParams& params, const QuadratureSpec& quad);

/// Joint DL/UL success probability of a scheduled device at horizontal
/// distance r from its UAV. Throws std::invalid_argument for r outside
/// [0, R] and QuadratureError when an integral does not converge.
SuccessProfile joint_success_probability(double r, const NetworkParams& params, const QuadratureSpec& quad);

/// joint_success_probability averaged over the serving distance density
/// 2r/R^2. serving_distance holds the mean distance 2R/3.
SuccessProfile cluster_average_success(const NetworkParams& params, const QuadratureSpec& quad);

} // namespace aerialfl
