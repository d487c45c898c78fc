#ifndef GCDR_RANDOM_HPP
#define GCDR_RANDOM_HPP

#include <cstdint>
#include <random>

/**
 * @file random.hpp
 *
 * @brief Seeded random streams.
 *
 * Every Monte-Carlo sample draws from its own stream derived from
 * `(master seed, sample index)`, which keeps parallel sampling reproducible.
 */

namespace gcdr {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream number `index` under `master`.
inline Rng derive_stream(std::uint64_t master, std::uint64_t index) {
    const std::uint64_t a = splitmix64(master);
    const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

} // namespace gcdr

#endif
