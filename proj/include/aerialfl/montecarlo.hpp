#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aerialfl/channel.hpp"
#include "aerialfl/geometry.hpp"
#include "aerialfl/params.hpp"

namespace aerialfl {

/// Trials are processed in fixed-size batches; batch b always draws from
/// make_stream(seed, {tag, b}), so results do not depend on the number of
/// worker threads.
inline constexpr long kTrialsPerBatch = 128;

struct CoverageTally {
    long trials = 0;
    long joint = 0;
    long ul = 0;
    long dl = 0;

    CoverageTally& operator+=(const CoverageTally& o)
    {
        trials += o.trials;
        joint += o.joint;
        ul += o.ul;
        dl += o.dl;
        return *this;
    }
    friend bool operator==(const CoverageTally&, const CoverageTally&) = default;
};

/// Empirical coverage with normal-approximation 95% half-widths.
struct CoverageEstimate {
    double p_joint = 0.0;
    double p_ul = 0.0;
    double p_dl = 0.0;
    long trials = 0;
    double half_width_joint = 0.0;
    double half_width_ul = 0.0;
    double half_width_dl = 0.0;

    static CoverageEstimate from_tally(const CoverageTally& t);
    friend bool operator==(const CoverageEstimate&, const CoverageEstimate&) = default;
};

double binomial_half_width_95(double p, long trials);

/// Outcome of one scheduled device in one communication round.
struct DeviceChannel {
    int device = 0;
    bool dl_success = false;
    bool ul_success = false;
    double serving_distance = 0.0;

    bool success() const { return dl_success && ul_success; }
    friend bool operator==(const DeviceChannel&, const DeviceChannel&) = default;
};

using RoundChannel = std::vector<DeviceChannel>;

struct LaplaceEstimate {
    double value = 0.0;
    double half_width = 0.0;
};

/// Fading law of the serving link. Gamma is the physical Nakagami-m power.
/// AlzerMatched draws the maximum of m iid Exp(eta) variables, whose CCDF is
/// exactly 1 - (1 - e^{-eta x})^m; it isolates the error of that
/// approximation in the analytic model. Interferers always fade as Gamma.
enum class ServingFading { Gamma, AlzerMatched };

enum class InterfererField {
    Fresh,  // new PPP realization of interfering UAVs every round
    Frozen, // interfering UAVs of the topology, only marks redrawn
};

/// Coverage of a typical device: sample the serving distance, the serving
/// LOS class (shared by DL and UL) and the interfering network, then test
/// both SINR thresholds with independent fading per direction.
CoverageTally coverage_batch(const NetworkParams& params, std::uint64_t seed, long batch, long trials,
                             ServingFading fading = ServingFading::Gamma);

/// OpenMP over batches.
CoverageEstimate estimate_coverage(const NetworkParams& params, long trials, std::uint64_t seed,
                                   ServingFading fading = ServingFading::Gamma);

/// Single-threaded reference for estimate_coverage; bit-identical output.
CoverageEstimate estimate_coverage_serial(const NetworkParams& params, long trials, std::uint64_t seed,
                                          ServingFading fading = ServingFading::Gamma);

/// Fresh fading and interference for each scheduled device of the typical
/// cluster. schedule holds device indices into topology.serving_distances.
RoundChannel realize_round(const Topology& topology, std::span<const int> schedule, const NetworkParams& params,
                           Rng& rng, InterfererField field = InterfererField::Fresh);

/// Brute-force E[exp(-s I)] for every s in s_values, sharing interference
/// draws across s. OpenMP over batches.
std::vector<LaplaceEstimate> laplace_oracle(const NetworkParams& params, Direction direction,
                                            std::span<const double> s_values, long trials, std::uint64_t seed);

std::vector<LaplaceEstimate> laplace_oracle_serial(const NetworkParams& params, Direction direction,
                                                   std::span<const double> s_values, long trials, std::uint64_t seed);

LaplaceEstimate laplace_oracle(const NetworkParams& params, Direction direction, double s, long trials,
                               std::uint64_t seed);

} // namespace aerialfl
