#pragma once

#include <cstdint>
#include <random>

namespace eigenmood {

// SplitMix64 step, used to spread a user seed into well-mixed substream
// seeds. Substreams keyed by (seed, index) make parallel and serial
// replicate execution agree bit for bit.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 1));
}

// Bounded draw with Lemire's multiply-shift plus rejection. The standard
// library's uniform_int_distribution mapping is implementation-defined;
// this one is byte-stable across toolchains.
inline std::uint64_t bounded_draw(std::mt19937_64& eng, std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(eng()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(eng()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace eigenmood
