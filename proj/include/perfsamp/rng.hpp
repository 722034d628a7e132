#ifndef PERFSAMP_RNG_HPP
#define PERFSAMP_RNG_HPP

#include <cstdint>
#include <random>

namespace perfsamp {

/// Random engine used by every sampler. std::mt19937_64 is fully specified
/// by the standard, so a given seed yields the same stream on every platform.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Seed of the stream used by replica @p replica under @p master_seed:
 *
 *   stream_seed = mix64(master_seed + 0x9E3779B97F4A7C15 * (replica + 1))
 *
 * with mix64 the SplitMix64 finalizer and arithmetic modulo 2^64. Each replica
 * is therefore reproducible on its own, independent of scheduling.
 */
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t replica) noexcept
{
    return mix64(master_seed + 0x9E3779B97F4A7C15ULL * (replica + 1));
}

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t replica)
{
    return Rng(stream_seed(master_seed, replica));
}

/// Uniform variate on the open interval (0,1) with 53 random bits.
inline double uniform_open01(Rng& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Fair ±1.
inline int fair_sign(Rng& rng)
{
    return (rng() >> 63) ? -1 : 1;
}

} // namespace perfsamp

#endif // PERFSAMP_RNG_HPP
