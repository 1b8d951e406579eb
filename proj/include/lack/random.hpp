#pragma once

#include <cstdint>
#include <random>

namespace lack {

// Every stochastic operation takes its stream explicitly; streams are never
// shared between calls.
using RandomStream = std::mt19937_64;

// splitmix64 finalizer. Stable across platforms, used to derive per-call and
// per-purpose seeds from an experiment seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix_seed(mix_seed(seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

// Uniform on the half-open interval (0, 1]; safe to pass to log().
inline double uniform_open_zero(RandomStream& rng) {
  double u = 0.0;
  do {
    u = 1.0 - std::generate_canonical<double, 53>(rng);
  } while (u <= 0.0);
  return u;
}

}  // namespace lack
