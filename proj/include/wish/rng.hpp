#pragma once

#include <cstdint>
#include <random>

namespace wish {

// All randomized components draw from this engine so that a seed pins the
// exact byte-level output everywhere.
using Rng = std::mt19937_64;

// splitmix64 finalizer; a cheap, well-mixed 64->64 permutation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for one work item derived from a master seed and two indices.
// Pure function of its arguments, so parallel scheduling cannot change
// which random stream an item sees.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(mix64(master) ^ (a + 1)) ^ (b + 1));
}

// Uniform double in [0, 1) built from the top 53 bits of one draw.
// Avoids std::uniform_real_distribution, whose output differs across
// standard library implementations.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

}  // namespace wish
