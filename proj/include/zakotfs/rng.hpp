#pragma once

#include <cstdint>
#include <random>

#include "core.hpp"

namespace zakotfs {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for (seed, index, lane); trials never share a generator.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t lane = 0) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  const std::uint64_t c = splitmix64(b ^ splitmix64(lane + 0x8cb92ba72f3d8dd7ULL));
  std::seed_seq seq{std::uint32_t(c), std::uint32_t(c >> 32), std::uint32_t(b), std::uint32_t(b >> 32)};
  return Rng(seq);
}

// circularly symmetric complex Gaussian with E|z|^2 = var
inline cplx complex_normal(Rng& rng, double var) {
  std::normal_distribution<double> nd(0.0, std::sqrt(var / 2.0));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

}  // namespace zakotfs
