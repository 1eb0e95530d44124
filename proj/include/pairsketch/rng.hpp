#pragma once

#include <cstdint>

// Counter-based random streams.
//
// Every random quantity in the library is a pure function of a 64-bit seed
// and a counter, so results never depend on evaluation order or threading:
//
//   splitmix64(x)      the SplitMix64 output function applied to x
//   derive(seed, tag)  splitmix64(seed ^ splitmix64(tag)), used to split a
//                      master seed into independent substreams
//   uniform(seed, i)   the i-th standard-uniform variate of stream `seed`,
//                      the top 53 bits of derive(seed, i) scaled to [0, 1)
namespace pairsketch::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) noexcept
{
    return splitmix64(seed ^ splitmix64(tag));
}

constexpr double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t seed, std::uint64_t index) noexcept
{
    return to_unit(derive(seed, index));
}

// Unbiased-enough integer in [0, bound) via the multiply-high reduction.
inline std::uint64_t bounded(std::uint64_t bits, std::uint64_t bound) noexcept
{
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * bound) >> 64);
}

// Named substream tags.
inline constexpr std::uint64_t matrix_stream = 0x6D61747269780001ULL;
inline constexpr std::uint64_t pairing_stream = 0x70616972696E6702ULL;
inline constexpr std::uint64_t trial_stream = 0x747269616C730003ULL;

} // namespace pairsketch::rng
