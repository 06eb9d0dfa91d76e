#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace vqmimo {

using Rng = std::mt19937_64;

/// Independent sub-stream seed for (seed, stream) via a splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Circularly-symmetric complex Gaussian of the given total variance.
inline std::complex<double> complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace vqmimo
