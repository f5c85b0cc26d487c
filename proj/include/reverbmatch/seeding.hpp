#pragma once

#include <cstdint>

namespace reverbmatch {

// Counter-based seed derivation. Every random stream in the library is
// addressed by (global seed, stream tag, counter), so the value a draw sees
// does not depend on evaluation order or on how work is split across threads:
//
//   derive_seed(seed, stream, counter)
//     = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter)
//
// Stream tags are fixed constants below; counters are draw or iteration
// indices.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

namespace streams {
inline constexpr std::uint64_t kLossDraw = 0x4c4f5353;     // "LOSS"
inline constexpr std::uint64_t kSolverIter = 0x49544552;   // "ITER"
inline constexpr std::uint64_t kDrrGrid = 0x47524944;      // "GRID"
inline constexpr std::uint64_t kBench = 0x42454e43;        // "BENC"
inline constexpr std::uint64_t kPolackNoise = 0x4e4f4953;  // "NOIS"
}  // namespace streams

}  // namespace reverbmatch
