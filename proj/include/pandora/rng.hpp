#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pandora {

/// splitmix64 scrambler. Used for deriving independent per-trial seeds; the
/// exact function is part of the reproducibility contract.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Per-trial seed: mix_seed(seed, t) = splitmix64(seed ^ ((t+1) * golden)).
/// Independent of trial execution order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(seed ^ ((trial + 1) * 0x9E3779B97F4A7C15ULL));
}

/// Uniform double in [0,1) from the top 53 bits of the generator. Avoids
/// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Samples an index from a probability vector by inverse CDF.
inline int sample_index(std::mt19937_64& rng, const std::vector<double>& probs) {
  double u = uniform01(rng);
  double acc = 0.0;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace pandora
