#include "aerialfl/params.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aerialfl {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) {
        throw std::invalid_argument(std::string("invalid network parameters: ") + what);
    }
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

constexpr std::array<EnvironmentPreset, 4> kPresets{{
    {"suburban", 4.88, 0.43},
    {"urban", 9.61, 0.16},
    {"dense-urban", 12.08, 0.11},
    {"high-rise", 27.23, 0.08},
}};

} // namespace

double NetworkParams::window_radius() const
{
    if (window_radius_override > 0.0) {
        return window_radius_override;
    }
    return 30.0 / std::sqrt(std::numbers::pi * uav_density);
}

void NetworkParams::validate() const
{
    require(finite_positive(uav_density), "uav_density must be positive");
    require(devices_per_cluster >= 1, "devices_per_cluster must be >= 1");
    require(resource_blocks >= 1, "resource_blocks must be >= 1");
    require(resource_blocks <= devices_per_cluster, "resource_blocks must not exceed devices_per_cluster");
    require(finite_positive(cluster_radius), "cluster_radius must be positive");
    require(finite_positive(height), "height must be positive");
    require(finite_positive(uav_power) && finite_positive(device_power), "transmit powers must be positive");
    require(std::isfinite(alpha_los) && alpha_los > 2.0, "alpha_los must exceed 2");
    require(std::isfinite(alpha_nlos) && alpha_nlos > 2.0, "alpha_nlos must exceed 2");
    require(m_los >= 1 && m_nlos >= 1, "Nakagami m must be a positive integer");
    require(finite_positive(noise_power), "noise_power must be positive");
    require(std::isfinite(env_a) && env_a >= 0.0, "env_a must be non-negative");
    require(finite_positive(env_b), "env_b must be positive");
    require(std::isfinite(tau_dl) && tau_dl >= 0.0, "tau_dl must be non-negative");
    require(std::isfinite(tau_ul) && tau_ul >= 0.0, "tau_ul must be non-negative");
    require(finite_positive(uav_side_gain) && uav_main_gain >= uav_side_gain, "UAV gains need main >= side > 0");
    require(finite_positive(device_side_gain) && device_main_gain >= device_side_gain,
            "device gains need main >= side > 0");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    require(uav_beamwidth > 0.0 && uav_beamwidth <= two_pi, "uav_beamwidth must lie in (0, 2pi]");
    require(device_beamwidth > 0.0 && device_beamwidth <= two_pi, "device_beamwidth must lie in (0, 2pi]");
    require(std::isfinite(window_radius_override) && window_radius_override >= 0.0,
            "window radius must be non-negative");
    require(window_radius() > cluster_radius, "window radius must exceed cluster_radius");
}

std::span<const EnvironmentPreset> environment_presets() { return kPresets; }

const EnvironmentPreset& find_environment(std::string_view name)
{
    for (const auto& p : kPresets) {
        if (p.name == name) {
            return p;
        }
    }
    throw std::invalid_argument("unknown environment preset: " + std::string(name));
}

} // namespace aerialfl
