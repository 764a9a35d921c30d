#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nnkr {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed and a list of keys. Streams are a
/// pure function of (seed, keys), so the work partition cannot change results.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(seed);
    for (const std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    return Engine(derive_seed(seed, keys));
}

// Domain tags for derive_seed so different consumers never share a stream.
namespace stream {
inline constexpr std::uint64_t kEnsembleVector = 0x01;
inline constexpr std::uint64_t kSignal = 0x02;
inline constexpr std::uint64_t kNoise = 0x03;
inline constexpr std::uint64_t kTrial = 0x04;
inline constexpr std::uint64_t kFading = 0x05;
inline constexpr std::uint64_t kNsp = 0x06;
inline constexpr std::uint64_t kSupports = 0x07;
inline constexpr std::uint64_t kTail = 0x08;
}  // namespace stream

}  // namespace nnkr
