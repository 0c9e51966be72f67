#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace aerialfl {

/// Every stochastic routine takes an explicit stream; nothing reads global state.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent substream keyed by a master seed and a path of indices
/// (e.g. {purpose, round, device}). Equal keys give equal streams.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

/// Uniform draw on the open interval (0, 1).
inline double uniform_open01(Rng& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Stream tags, so substreams for different purposes never collide.
namespace stream_tag {
inline constexpr std::uint64_t coverage = 0xC0;
inline constexpr std::uint64_t laplace = 0x1A;
inline constexpr std::uint64_t topology = 0x70;
inline constexpr std::uint64_t partition = 0x9A;
inline constexpr std::uint64_t schedule = 0x5C;
inline constexpr std::uint64_t channel = 0xC4;
inline constexpr std::uint64_t local = 0x10;
inline constexpr std::uint64_t init = 0x11;
inline constexpr std::uint64_t data = 0xDA;
} // namespace stream_tag

} // namespace aerialfl
