#pragma once

#include <cstdint>
#include <random>

namespace activemap {

using Rng = std::mt19937_64;

// Derives an independent deterministic stream from (seed, stream id).
// Every consumer draws from its own stream so unrelated features do not
// perturb each other's sequences.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream};
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double mean, double sigma) {
  return std::normal_distribution<double>(mean, sigma)(rng);
}

}  // namespace activemap
