#include "nashpricing/random.hpp"

#include <cmath>
#include <numbers>

namespace nashpricing {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return draw % n;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t Rng::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda < 30.0) {
    const double u = uniform();
    std::int64_t k = 0;
    double p = std::exp(-lambda);
    double cdf = p;
    while (u >= cdf) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
      // Guards against cdf stalling below u from rounding.
      if (p == 0.0 && k > lambda) break;
    }
    return k;
  }
  const double draw = std::round(lambda + std::sqrt(lambda) * normal());
  return draw < 0.0 ? 0 : static_cast<std::int64_t>(draw);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace nashpricing
