#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>

namespace aerialfl {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Line-of-sight class of an air-to-ground link.
enum class LinkType { Los, Nlos };

/// System parameters of the clustered UAV network. All quantities are SI and
/// linear scale; dB-valued inputs are converted once when a config is parsed.
///
/// Defaults reproduce the reference scenario: lambda = 2/(pi*150^2),
/// N = 100, M = 90, R = 100 m, h = 120 m, P_d = 0.1 W, P_u = 0.25 W,
/// alpha = (2.1, 3.6), m = (3, 1), n0^2 = 4.14e-6 W, (a, b) = (9.61, 0.16),
/// tau = (15, 0) dB, main lobes (10, 5) dB, side lobes (-1, -3) dB.
struct NetworkParams {
    double uav_density = 2.0 / (std::numbers::pi * 150.0 * 150.0);
    int devices_per_cluster = 100;
    int resource_blocks = 90;
    double cluster_radius = 100.0;
    double height = 120.0;
    double uav_power = 0.25;
    double device_power = 0.1;
    double alpha_los = 2.1;
    double alpha_nlos = 3.6;
    int m_los = 3;
    int m_nlos = 1;
    double noise_power = 4.14e-6;
    double env_a = 9.61;
    double env_b = 0.16;
    double tau_dl = db_to_linear(15.0);
    double tau_ul = db_to_linear(0.0);
    double uav_main_gain = db_to_linear(10.0);
    double device_main_gain = db_to_linear(5.0);
    double uav_side_gain = db_to_linear(-1.0);
    double device_side_gain = db_to_linear(-3.0);
    double uav_beamwidth = std::numbers::pi / 7.0;
    double device_beamwidth = std::numbers::pi / 7.0;
    // Radius of the simulated network disk around the typical UAV. Zero
    // selects 30 / sqrt(pi * lambda).
    double window_radius_override = 0.0;

    double window_radius() const;
    double desired_gain() const { return uav_main_gain * device_main_gain; }
    double scheduling_probability() const
    {
        return static_cast<double>(resource_blocks) / devices_per_cluster;
    }
    double path_loss_exponent(LinkType z) const { return z == LinkType::Los ? alpha_los : alpha_nlos; }
    int nakagami_m(LinkType z) const { return z == LinkType::Los ? m_los : m_nlos; }

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
};

struct EnvironmentPreset {
    std::string_view name;
    double a;
    double b;
};

/// LOS-model constants for the four standard environments.
std::span<const EnvironmentPreset> environment_presets();

/// Throws std::invalid_argument for an unknown name.
const EnvironmentPreset& find_environment(std::string_view name);

} // namespace aerialfl
