#include "aerialfl/analytic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace aerialfl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<LinkType, 2> kLinkTypes{LinkType::Los, LinkType::Nlos};

double truncation_radius(const NetworkParams& params, const QuadratureSpec& quad)
{
    const double t = quad.truncation_radius > 0.0 ? quad.truncation_radius : params.window_radius();
    if (!(t > params.cluster_radius)) {
        throw std::invalid_argument("truncation radius must exceed the cluster radius");
    }
    return t;
}

QuadratureSpec inner_spec(const QuadratureSpec& quad)
{
    QuadratureSpec inner = quad;
    inner.rel_tol = 0.1 * quad.rel_tol;
    inner.abs_tol = 0.1 * quad.abs_tol;
    return inner;
}

double link_probability(LinkType z, double r, const NetworkParams& params)
{
    const double p = los_probability(r, params);
    return z == LinkType::Los ? p : 1.0 - p;
}

/// Gain-averaged Nakagami MGF of one interferer at squared 3-D distance d_sq,
///   sum_i p_i (1 + s P G_i d^{-alpha} / m)^{-m},
/// and its complement, evaluated without cancellation.
struct InterfererMgf {
    GainPattern pattern;
    double s_times_power;
    double alpha;
    int m;

    double complement(double d_sq) const
    {
        const double base = s_times_power * std::pow(d_sq, -0.5 * alpha) / m;
        double acc = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            acc -= pattern.probs[i] * std::expm1(-m * std::log1p(base * pattern.gains[i]));
        }
        return acc;
    }

    double value(double d_sq) const
    {
        const double base = s_times_power * std::pow(d_sq, -0.5 * alpha) / m;
        double acc = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            acc += pattern.probs[i] * std::exp(-m * std::log1p(base * pattern.gains[i]));
        }
        return acc;
    }
};

InterfererMgf make_mgf(double s, double tx_power, LinkType z, const NetworkParams& params)
{
    return {build_gain_pattern(params), s * tx_power, params.path_loss_exponent(z), params.nakagami_m(z)};
}

/// Breakpoints 0 = b0 < first < ... < t, growing geometrically.
std::vector<double> distance_breaks(double first, double t)
{
    std::vector<double> breaks{0.0};
    for (double x = first; x < t; x *= 2.5) {
        breaks.push_back(x);
    }
    breaks.push_back(t);
    return breaks;
}

/// Expectation of phi(g) under the conditional distance density of a cluster
/// centred at distance q, restricted to one region. The arc part uses
/// g = centre + half_width * sin(theta), which removes the square-root
/// behaviour of the density at both ends of its support.
template <class Phi>
double cluster_expectation(const Phi& phi, double q, ClusterRegion region, double radius, const QuadratureSpec& quad)
{
    const double r2 = radius * radius;
    double total = 0.0;

    // Arc part: support [|R - q|, R + q].
    if (q > 0.0) {
        const double centre = region == ClusterRegion::Overlap ? radius : q;
        const double half = region == ClusterRegion::Overlap ? q : radius;
        auto arc = [&](double theta) {
            const double sn = std::sin(theta);
            const double g = centre + half * sn;
            if (!(g > 0.0)) {
                return 0.0;
            }
            // The arc angle is acos(c), c = (g^2 + q^2 - R^2) / (2gq). Near
            // c = 1 (far clusters, tiny R) acos loses every digit, so use
            // acos(c) = 2 asin(sqrt((1 - c) / 2)) with 1 - c in closed form.
            const double gap = region == ClusterRegion::Overlap ? q * (1.0 - sn) * (2.0 * radius - q * (1.0 - sn))
                                                               : r2 * (1.0 - sn) * (1.0 + sn);
            const double one_minus_c = std::clamp(gap / (2.0 * g * q), 0.0, 2.0);
            const double angle = 2.0 * std::asin(std::sqrt(0.5 * one_minus_c));
            const double density = 2.0 * g / (kPi * r2) * angle;
            return phi(g) * density * half * std::cos(theta);
        };
        total += integrate(arc, -0.5 * kPi, 0.5 * kPi, quad, "cluster arc integral");
    }

    // Disk part: the whole circle of radius g lies inside the cluster.
    if (region == ClusterRegion::Overlap && q < radius) {
        auto disk = [&](double g) { return phi(g) * 2.0 * g / r2; };
        total += integrate(disk, 0.0, radius - q, quad, "cluster disk integral");
    }
    return total;
}

double laplace_dl_exponent(double s, LinkType z, const NetworkParams& params, const QuadratureSpec& quad)
{
    const InterfererMgf mgf = make_mgf(s, params.uav_power, z, params);
    const double h2 = params.height * params.height;
    auto integrand = [&](double q) { return mgf.complement(q * q + h2) * q * link_probability(z, q, params); };
    const auto breaks = distance_breaks(params.height, truncation_radius(params, quad));
    return 2.0 * kPi * params.uav_density * integrate(integrand, std::span<const double>(breaks), quad, "laplace_dl");
}

double laplace_ul_exponent(double s, LinkType z, const NetworkParams& params, const QuadratureSpec& quad)
{
    const InterfererMgf mgf = make_mgf(s, params.device_power, z, params);
    const double h2 = params.height * params.height;
    const double radius = params.cluster_radius;
    const QuadratureSpec inner = inner_spec(quad);
    auto complement = [&](double g) { return mgf.complement(g * g + h2); };

    auto overlap = [&](double q) {
        return cluster_expectation(complement, q, ClusterRegion::Overlap, radius, inner) * q *
               link_probability(z, q, params);
    };
    auto faraway = [&](double q) {
        return cluster_expectation(complement, q, ClusterRegion::Faraway, radius, inner) * q *
               link_probability(z, q, params);
    };
    const double near_part = integrate(overlap, 0.0, radius, quad, "laplace_ul overlap");
    const auto breaks = distance_breaks(2.0 * radius, truncation_radius(params, quad));
    std::vector<double> far_breaks{radius};
    far_breaks.insert(far_breaks.end(), breaks.begin() + 1, breaks.end());
    const double far_part = integrate(faraway, std::span<const double>(far_breaks), quad, "laplace_ul faraway");
    return 2.0 * kPi * params.uav_density * (near_part + far_part);
}

void require_nonnegative_s(double s, const char* what)
{
    if (!(s >= 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument(std::string(what) + ": s must be finite and non-negative");
    }
}

double binomial(int n, int k)
{
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

/// Binomial-expanded success probability of one link given the serving
/// class z. laplace is the interference transform of that link.
template <class Laplace>
double link_success(double tau, double tx_power, double d_sq, LinkType z, const NetworkParams& params,
                    const Laplace& laplace)
{
    const int m = params.nakagami_m(z);
    const double e = eta(m);
    const double signal = tx_power * params.desired_gain() * std::pow(d_sq, -0.5 * params.path_loss_exponent(z));
    double sum = 0.0;
    for (int j = 1; j <= m; ++j) {
        // Transforms are taken at positive arguments s = j eta tau / signal.
        const double s = j * e * tau / signal;
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        sum += sign * binomial(m, j) * std::exp(-s * params.noise_power) * laplace(s);
    }
    return sum;
}

} // namespace

double eta(int m)
{
    if (m < 1) {
        throw std::invalid_argument("eta: m must be >= 1");
    }
    return m * std::exp(-std::lgamma(m + 1.0) / m);
}

double laplace_dl(double s, const NetworkParams& params, const QuadratureSpec& quad)
{
    require_nonnegative_s(s, "laplace_dl");
    if (s == 0.0) {
        return 1.0;
    }
    double exponent = 0.0;
    for (LinkType z : kLinkTypes) {
        exponent += laplace_dl_exponent(s, z, params, quad);
    }
    return std::exp(-exponent);
}

double laplace_ul(double s, const NetworkParams& params, const QuadratureSpec& quad)
{
    require_nonnegative_s(s, "laplace_ul");
    if (s == 0.0) {
        return 1.0;
    }
    double exponent = 0.0;
    for (LinkType z : kLinkTypes) {
        exponent += laplace_ul_exponent(s, z, params, quad);
    }
    return std::exp(-exponent);
}

double o_e_inner(double s, double q, ClusterRegion region, LinkType z, const NetworkParams& params,
                 const QuadratureSpec& quad)
{
    require_nonnegative_s(s, "o_e_inner");
    const double radius = params.cluster_radius;
    if (!(q >= 0.0)) {
        throw std::invalid_argument("o_e_inner: q must be non-negative");
    }
    if (region == ClusterRegion::Overlap && q > radius) {
        throw std::invalid_argument("o_e_inner: overlap region requires q <= R");
    }
    if (region == ClusterRegion::Faraway && q < radius) {
        throw std::invalid_argument("o_e_inner: faraway region requires q >= R");
    }
    const InterfererMgf mgf = make_mgf(s, params.device_power, z, params);
    const double h2 = params.height * params.height;
    auto value = [&](double g) { return mgf.value(g * g + h2); };
    return cluster_expectation(value, q, region, radius, quad);
}

double laplace_tail_bound(double s, Direction direction, const NetworkParams& params, const QuadratureSpec& quad)
{
    require_nonnegative_s(s, "laplace_tail_bound");
    const double t = truncation_radius(params, quad);
    const GainPattern pattern = build_gain_pattern(params);
    double mean_gain = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        mean_gain += pattern.probs[i] * pattern.gains[i];
    }
    const double h2 = params.height * params.height;
    double bound = 0.0;
    for (LinkType z : kLinkTypes) {
        const double alpha = params.path_loss_exponent(z);
        // 1 - (1 + x/m)^{-m} <= x, P_z <= 1, then integrate q (q^2+h^2)^{-alpha/2}.
        if (direction == Direction::Downlink) {
            bound += s * params.uav_power * mean_gain * std::pow(t * t + h2, 1.0 - 0.5 * alpha) / (alpha - 2.0);
        } else {
            const double u = t - params.cluster_radius;
            bound += s * params.device_power * mean_gain * (t / u) * std::pow(u * u + h2, 1.0 - 0.5 * alpha) /
                     (alpha - 2.0);
        }
    }
    return 2.0 * kPi * params.uav_density * bound;
}

SuccessProfile joint_success_probability(double r, const NetworkParams& params, const QuadratureSpec& quad)
{
    params.validate();
    if (!(r >= 0.0) || r > params.cluster_radius) {
        throw std::invalid_argument("joint_success_probability: serving distance must lie in [0, R]");
    }
    const double d_sq = r * r + params.height * params.height;
    auto dl_transform = [&](double s) { return laplace_dl(s, params, quad); };
    auto ul_transform = [&](double s) { return laplace_ul(s, params, quad); };

    SuccessProfile out;
    out.serving_distance = r;
    out.p_los = los_probability(r, params);
    out.scheduling_prob = params.scheduling_probability();
    std::array<double, 2> joint{};
    std::array<double, 2> dl{};
    std::array<double, 2> ul{};
    for (std::size_t i = 0; i < 2; ++i) {
        const LinkType z = kLinkTypes[i];
        dl[i] = link_success(params.tau_dl, params.uav_power, d_sq, z, params, dl_transform);
        ul[i] = link_success(params.tau_ul, params.device_power, d_sq, z, params, ul_transform);
        joint[i] = dl[i] * ul[i];
    }
    const double p_nlos = 1.0 - out.p_los;
    out.joint_los = joint[0];
    out.joint_nlos = joint[1];
    out.joint = out.p_los * joint[0] + p_nlos * joint[1];
    out.dl = out.p_los * dl[0] + p_nlos * dl[1];
    out.ul = out.p_los * ul[0] + p_nlos * ul[1];
    return out;
}

SuccessProfile cluster_average_success(const NetworkParams& params, const QuadratureSpec& quad)
{
    params.validate();
    const double radius = params.cluster_radius;
    auto integrand = [&](double r) {
        const SuccessProfile p = joint_success_probability(r, params, quad);
        const double w = serving_distance_pdf(r, radius);
        return std::array<double, 6>{w * p.joint, w * p.p_los * p.joint_los, w * (1.0 - p.p_los) * p.joint_nlos,
                                     w * p.p_los, w * p.ul,                 w * p.dl};
    };
    QuadratureSpec outer = quad;
    outer.rel_tol = std::max(quad.rel_tol, 1e-7);
    const std::array<double, 2> breaks{0.0, radius};
    const auto avg = integrate_vec<6>(integrand, std::span<const double>(breaks), outer, "cluster average");

    SuccessProfile out;
    out.serving_distance = 2.0 * radius / 3.0;
    // Class-conditional averages, so joint = p_los * joint_los + (1 - p_los) * joint_nlos.
    out.p_los = avg[3];
    out.joint_los = out.p_los > 0.0 ? avg[1] / out.p_los : 0.0;
    out.joint_nlos = out.p_los < 1.0 ? avg[2] / (1.0 - out.p_los) : 0.0;
    out.joint = out.p_los * out.joint_los + (1.0 - out.p_los) * out.joint_nlos;
    out.ul = avg[4];
    out.dl = avg[5];
    out.scheduling_prob = params.scheduling_probability();
    return out;
}

} // namespace aerialfl
