#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace bangbang {

// Deterministic generator for all optimization randomness: std::mt19937_64
// (fully specified by the standard) with the variate transforms below written
// out here, so a seed reproduces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }

  // 53 random mantissa bits: uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n) by rejection; n > 0.
  std::size_t index(std::size_t n);
  bool coin() { return (next() >> 63) != 0; }
  double sign() { return coin() ? 1.0 : -1.0; }

  // Independent child stream.
  Rng fork() { return Rng(mix_seed(next(), 0x9e3779b97f4a7c15ULL)); }

  // SplitMix64 finalizer over the seed and two stream labels.
  static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace bangbang
