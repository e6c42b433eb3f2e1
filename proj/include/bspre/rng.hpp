#pragma once

#include <cstdint>

namespace bspre {

// splitmix64: the engine's portable RNG. State is a single u64 so it can be
// snapshotted and restored bit-exactly.
inline std::uint64_t rng_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in [0, 1).
inline double rng_unit(std::uint64_t& state) {
  return static_cast<double>(rng_next(state) >> 11) * 0x1.0p-53;
}

// Uniform in [0, bound). bound must be > 0; modulo bias is irrelevant at the
// bounds used here (all << 2^32).
inline std::uint64_t rng_below(std::uint64_t& state, std::uint64_t bound) {
  return rng_next(state) % bound;
}

}  // namespace bspre
