#pragma once

#include <cstdint>
#include <random>

namespace mesonbell {

/// splitmix64 step; used to derive independent per-block seeds from a
/// run seed so that parallel generation is reproducible regardless of
/// scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(stream_index + 1)));
}

} // namespace mesonbell
