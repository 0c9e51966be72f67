#include "doctest.h"

#include <cmath>
#include <vector>

#include "aerialfl/analytic.hpp"
#include "aerialfl/geometry.hpp"
#include "aerialfl/montecarlo.hpp"

using namespace aerialfl;

namespace {

// Argument of the transform in the j-th binomial term for class z.
double theorem_argument(const NetworkParams& p, Direction dir, LinkType z, int j, double r)
{
    const double power = dir == Direction::Downlink ? p.uav_power : p.device_power;
    const double tau = dir == Direction::Downlink ? p.tau_dl : p.tau_ul;
    const double signal =
        power * p.desired_gain() * std::pow(r * r + p.height * p.height, -p.path_loss_exponent(z) / 2.0);
    return j * eta(p.nakagami_m(z)) * tau / signal;
}

double pattern_average(const NetworkParams& p, double s, double d_sq, LinkType z)
{
    const auto pattern = build_gain_pattern(p);
    const int m = p.nakagami_m(z);
    double v = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        v += pattern.probs[i] *
             std::pow(1.0 + s * p.device_power * pattern.gains[i] * std::pow(d_sq, -p.path_loss_exponent(z) / 2.0) / m,
                      -m);
    }
    return v;
}

} // namespace

TEST_CASE("eta")
{
    CHECK(eta(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eta(2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(eta(3) == doctest::Approx(3.0 * std::pow(6.0, -1.0 / 3.0)).epsilon(1e-14));
    CHECK(eta(3) == doctest::Approx(1.65096).epsilon(1e-5));
    CHECK_THROWS_AS(eta(0), std::invalid_argument);
}

TEST_CASE("Laplace transforms: value at zero, bounds and monotonicity")
{
    NetworkParams params;
    QuadratureSpec quad;
    for (double h : {45.0, 120.0}) {
        params.height = h;
        CHECK(std::abs(laplace_dl(0.0, params, quad) - 1.0) <= 1e-9);
        CHECK(std::abs(laplace_ul(0.0, params, quad) - 1.0) <= 1e-9);
        double prev_dl = 1.0;
        double prev_ul = 1.0;
        for (double s = 1e3; s <= 1e7; s *= 3.0) {
            const double dl = laplace_dl(s, params, quad);
            const double ul = laplace_ul(s, params, quad);
            CHECK(dl > 0.0);
            CHECK(ul > 0.0);
            CHECK(dl <= prev_dl);
            CHECK(ul <= prev_ul);
            // One device at 0.1 W per cluster interferes less than one UAV at 0.25 W.
            CHECK(ul >= dl);
            prev_dl = dl;
            prev_ul = ul;
        }
    }
    CHECK_THROWS_AS(laplace_dl(-1.0, params, quad), std::invalid_argument);
}

TEST_CASE("Laplace transforms agree with the brute-force oracle")
{
    NetworkParams params;
    params.height = 45.0;
    QuadratureSpec quad;
    for (Direction dir : {Direction::Downlink, Direction::Uplink}) {
        const double s = theorem_argument(params, dir, LinkType::Los, 1, 50.0);
        const auto mc = laplace_oracle(params, dir, s, 20000, 21);
        const double an = dir == Direction::Downlink ? laplace_dl(s, params, quad) : laplace_ul(s, params, quad);
        CHECK(std::abs(mc.value - an) <= 3.0 * mc.half_width / 1.96 + 1e-12);
        CHECK(std::abs(mc.value - an) <= 0.01 * an);
    }
}

TEST_CASE("o_e_inner limits")
{
    NetworkParams params;
    QuadratureSpec quad;
    const double s = 5e4;
    const double radius = params.cluster_radius;
    for (LinkType z : {LinkType::Los, LinkType::Nlos}) {
        CHECK(o_e_inner(0.0, 40.0, ClusterRegion::Overlap, z, params, quad) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(o_e_inner(0.0, 300.0, ClusterRegion::Faraway, z, params, quad) == doctest::Approx(1.0).epsilon(1e-9));

        const double q = 100.0 * radius;
        const double point = pattern_average(params, s, q * q + params.height * params.height, z);
        CHECK(o_e_inner(s, q, ClusterRegion::Faraway, z, params, quad) == doctest::Approx(point).epsilon(1e-3));

        QuadratureSpec fine;
        fine.rel_tol = 1e-11;
        const double disk = integrate(
            [&](double g) {
                return pattern_average(params, s, g * g + params.height * params.height, z) * 2.0 * g /
                       (radius * radius);
            },
            0.0, radius, fine, "disk");
        CHECK(o_e_inner(s, 0.0, ClusterRegion::Overlap, z, params, quad) == doctest::Approx(disk).epsilon(1e-7));
    }
    CHECK_THROWS_AS(o_e_inner(s, 150.0, ClusterRegion::Overlap, LinkType::Los, params, quad), std::invalid_argument);
    CHECK_THROWS_AS(o_e_inner(s, 50.0, ClusterRegion::Faraway, LinkType::Los, params, quad), std::invalid_argument);
}

TEST_CASE("truncated tail stays within its bound")
{
    NetworkParams params;
    params.height = 45.0;
    QuadratureSpec quad;
    QuadratureSpec doubled = quad;
    doubled.truncation_radius = 2.0 * params.window_radius();
    for (Direction dir : {Direction::Downlink, Direction::Uplink}) {
        const double s = theorem_argument(params, dir, LinkType::Los, 1, 50.0);
        const auto eval = [&](const QuadratureSpec& qs) {
            return dir == Direction::Downlink ? laplace_dl(s, params, qs) : laplace_ul(s, params, qs);
        };
        const double change = std::log(eval(quad)) - std::log(eval(doubled));
        CHECK(change >= 0.0);
        CHECK(change <= laplace_tail_bound(s, dir, params, quad));
    }

    // Without LOS interferers the path loss decays fast enough for the
    // truncation to be invisible.
    NetworkParams nlos = params;
    nlos.env_a = 1e9;
    for (Direction dir : {Direction::Downlink, Direction::Uplink}) {
        const double s = theorem_argument(nlos, dir, LinkType::Los, 1, 50.0);
        const double a = dir == Direction::Downlink ? laplace_dl(s, nlos, quad) : laplace_ul(s, nlos, quad);
        const double b = dir == Direction::Downlink ? laplace_dl(s, nlos, doubled) : laplace_ul(s, nlos, doubled);
        CHECK(std::abs(a - b) / a < 1e-4);
    }
}

TEST_CASE("joint_success_probability identities")
{
    NetworkParams params;
    QuadratureSpec quad;
    SUBCASE("zero thresholds always succeed")
    {
        params.tau_dl = 0.0;
        params.tau_ul = 0.0;
        for (double r : {0.0, 50.0, 100.0}) {
            const auto p = joint_success_probability(r, params, quad);
            CHECK(std::abs(p.joint - 1.0) <= 1e-9);
        }
    }
    SUBCASE("profile consistency")
    {
        for (double r : {0.0, 30.0, 75.0, 100.0}) {
            const auto p = joint_success_probability(r, params, quad);
            CHECK(std::abs(p.joint - (p.p_los * p.joint_los + (1.0 - p.p_los) * p.joint_nlos)) <= 1e-12);
            CHECK(p.scheduling_prob == static_cast<double>(params.resource_blocks) / params.devices_per_cluster);
            CHECK(p.p_los == los_probability(r, params));
            for (double v : {p.joint, p.joint_los, p.joint_nlos, p.ul, p.dl}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            CHECK(p.joint <= std::min(p.ul, p.dl) + 1e-12);
        }
    }
    SUBCASE("serving distance outside the cluster is rejected")
    {
        CHECK_THROWS_AS(joint_success_probability(100.5, params, quad), std::invalid_argument);
        CHECK_THROWS_AS(joint_success_probability(-1.0, params, quad), std::invalid_argument);
    }
}

TEST_CASE("joint success is non-increasing in the thresholds")
{
    NetworkParams params;
    params.height = 70.0;
    QuadratureSpec quad;
    double prev = 1.0;
    for (double db = -5.0; db <= 20.0; db += 5.0) {
        params.tau_dl = db_to_linear(db);
        const double j = joint_success_probability(60.0, params, quad).joint;
        CHECK(j <= prev + 1e-12);
        prev = j;
    }
    params.tau_dl = db_to_linear(15.0);
    prev = 1.0;
    for (double db = -10.0; db <= 10.0; db += 5.0) {
        params.tau_ul = db_to_linear(db);
        const double j = joint_success_probability(60.0, params, quad).joint;
        CHECK(j <= prev + 1e-12);
        prev = j;
    }
}

TEST_CASE("without interferers success is the noise-only closed form")
{
    NetworkParams params;
    params.uav_density = 1e-18;
    params.m_los = 1;
    params.m_nlos = 1;
    QuadratureSpec quad;
    const double r = 60.0;
    const double d_sq = r * r + params.height * params.height;
    const double p_los = los_probability(r, params);
    auto closed = [&](double power, double tau) {
        double j = 0.0;
        for (LinkType z : {LinkType::Los, LinkType::Nlos}) {
            const double signal = power * params.desired_gain() * std::pow(d_sq, -params.path_loss_exponent(z) / 2.0);
            j += (z == LinkType::Los ? p_los : 1.0 - p_los) * std::exp(-tau * params.noise_power / signal);
        }
        return j;
    };
    NetworkParams dl_only = params;
    dl_only.tau_ul = 0.0;
    CHECK(std::abs(joint_success_probability(r, dl_only, quad).joint - closed(params.uav_power, params.tau_dl)) <=
          1e-9);
    NetworkParams ul_only = params;
    ul_only.tau_dl = 0.0;
    CHECK(std::abs(joint_success_probability(r, ul_only, quad).joint - closed(params.device_power, params.tau_ul)) <=
          1e-9);
}

TEST_CASE("cluster average")
{
    NetworkParams params;
    QuadratureSpec quad;
    SUBCASE("a collapsing cluster reduces to the centre")
    {
        params.cluster_radius = 1e-3;
        const auto avg = cluster_average_success(params, quad);
        const auto centre = joint_success_probability(0.0, params, quad);
        CHECK(std::abs(avg.joint - centre.joint) <= 1e-6);
        CHECK(std::abs(avg.ul - centre.ul) <= 1e-6);
    }
    SUBCASE("averaged profile stays consistent")
    {
        params.height = 70.0;
        const auto avg = cluster_average_success(params, quad);
        CHECK(std::abs(avg.joint - (avg.p_los * avg.joint_los + (1.0 - avg.p_los) * avg.joint_nlos)) <= 1e-12);
        CHECK(avg.serving_distance == doctest::Approx(200.0 / 3.0));
    }
    SUBCASE("reference heights")
    {
        params.height = 45.0;
        CHECK(std::abs(cluster_average_success(params, quad).joint - 0.5088) <= 0.015);
        params.height = 20.0;
        const auto low = cluster_average_success(params, quad);
        CHECK(std::abs(low.joint - 0.2894) <= 0.015);
        CHECK(std::abs(low.ul - 0.3488) <= 0.015);
    }
}
