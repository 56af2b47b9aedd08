#pragma once

#include <cstdint>
#include <random>

namespace pursuit {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the (stream, index) substream of `seed`. Every path row, pursuer
/// stream and sweep cell draws from its own substream, so results do not
/// depend on how work is split across chunks or workers.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (stream * 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ (index * 0x8cb92ba72f3d8dd7ULL));
  return h;
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return Engine(derive_seed(seed, stream, index));
}

}  // namespace pursuit
