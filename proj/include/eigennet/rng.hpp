#pragma once

#include <cstdint>
#include <random>

#include "eigennet/types.hpp"

namespace eigennet {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-trial seed: splitmix64(master ^ splitmix64(trial + 1)).
/// Stable across platforms, so ports can reproduce the trial partitioning.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed,
                                   std::uint64_t trial_index) noexcept {
  return splitmix64(master_seed ^ splitmix64(trial_index + 1));
}

/// Derives a named sub-stream seed (e.g. topology vs. signal vs. failures).
constexpr std::uint64_t substream_seed(std::uint64_t seed,
                                       std::uint64_t stream) noexcept {
  return splitmix64(seed + 0x632be59bd9b4e019ULL * (stream + 1));
}

/// Draws CN(0, variance): real and imaginary parts i.i.d. N(0, variance/2).
inline Complex complex_gaussian(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

inline CMatrix complex_gaussian_matrix(Rng& rng, Eigen::Index rows,
                                       Eigen::Index cols,
                                       double variance = 1.0) {
  CMatrix out(rows, cols);
  // Row-major fill so that row k depends only on the stream position.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = complex_gaussian(rng, variance);
    }
  }
  return out;
}

}  // namespace eigennet
