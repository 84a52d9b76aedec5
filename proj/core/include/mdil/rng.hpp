// rng.hpp
// Counter-based random streams: each variate is a pure function of
// (seed, stream, step), so simulation output is bit-identical for a fixed
// seed regardless of scheduling, trajectory count, or platform.  std::
// engines are not used because distribution output is not bit-stable
// across standard library implementations.

#pragma once

#include <cstdint>
#include <vector>

#include "mdil/errors.hpp"

namespace mdil {

// Fibonacci-hash finalizer (splitmix64 step function).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keyed variate for (seed, stream, step).
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t step) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ step);
}

// Uniform double in [0, 1) with 53 random bits.
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t step) {
  return static_cast<double>(counter_bits(seed, stream, step) >> 11) *
         0x1.0p-53;
}

// Inverse-CDF draw: smallest index whose cumulative weight exceeds u.
// Falls back to the last positive-weight index when u lands in the
// rounding gap above the total mass.
inline int sample_index(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  int last_positive = -1;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    double w = weights[static_cast<size_t>(i)];
    if (w <= 0.0) continue;
    last_positive = i;
    acc += w;
    if (u < acc) return i;
  }
  if (last_positive < 0) throw BadInput("sampling from a zero distribution");
  return last_positive;
}

}  // namespace mdil
