#pragma once

#include <cstdint>
#include <random>

namespace jellium {

using RngStream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the stream with index `stream_id` under `base_seed`. Depends only on
/// the pair, so streams can be created in any order and on any thread.
inline std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t stream_id) {
    return splitmix64(splitmix64(base_seed) ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL));
}

inline RngStream make_stream(std::uint64_t base_seed, std::uint64_t stream_id) {
    return RngStream(derive_stream_seed(base_seed, stream_id));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(RngStream& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1].
inline double uniform01_open_left(RngStream& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace jellium
