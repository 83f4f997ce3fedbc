#pragma once

#include <cstdint>
#include <random>

namespace fregime {

// All randomness flows through std::mt19937_64 engines keyed by (seed, stream).
// Streams never overlap between subsystems: the generator draws from
// kSynthgenStream, EM restart r draws from kHmmRestartStreamBase + r.
inline constexpr std::uint64_t kSynthgenStream = 1;
inline constexpr std::uint64_t kMonteCarloStream = 2;
inline constexpr std::uint64_t kHmmRestartStreamBase = 1ULL << 32;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)),
                      static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                      static_cast<std::uint32_t>(splitmix64(stream ^ 0xD1B54A32D192ED03ULL)),
                      static_cast<std::uint32_t>(splitmix64(stream ^ 0xD1B54A32D192ED03ULL) >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace fregime
