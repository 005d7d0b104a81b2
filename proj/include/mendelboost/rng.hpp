#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mendelboost {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to turn structured (seed, index) pairs into
// well-separated generator seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent stream identified by a path of indices below a root
// seed, e.g. stream_seed(seed, {dataset, replicate}). Depends only on the
// arguments, never on scheduling.
inline std::uint64_t stream_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(root);
  for (std::uint64_t p : path) s = mix64(s ^ p);
  return s;
}

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(stream_seed(root, path));
}

}  // namespace mendelboost
