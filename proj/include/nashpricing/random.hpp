#pragma once

#include <cstdint>
#include <random>

namespace nashpricing {

// Seeded generator with platform-independent draws. The standard library
// distributions are implementation-defined, so every variate used by the
// simulator is derived here from the raw mt19937_64 stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n); n > 0.
  std::uint64_t uniform_int(std::uint64_t n);
  // Standard normal via Box-Muller (one variate per call, no caching).
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  // Poisson: inversion for lambda < 30, rounded normal approximation above.
  std::int64_t poisson(double lambda);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent child seed (SplitMix64 finalizer over seed and stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace nashpricing
