#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace adaptthink {

/// All randomness flows through explicitly seeded mt19937_64 streams so that
/// every run is reproducible and parallel workers can own disjoint streams.
using RngStream = std::mt19937_64;

/// splitmix64 finalizer; good avalanche for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Derives a child seed from a root seed and a path of indices, e.g.
/// (run seed, step, problem id). Deterministic and order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(root);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p));
  return s;
}

inline RngStream make_stream(std::uint64_t root,
                             std::initializer_list<std::uint64_t> path) {
  return RngStream(derive_seed(root, path));
}

/// Uniform double in [0, 1) with 53 random bits. Hand-rolled instead of
/// uniform_real_distribution so the draw sequence is identical across
/// standard library implementations.
inline double uniform01(RngStream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace adaptthink
