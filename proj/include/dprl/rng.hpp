#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace dprl {

// Laplace quantile with location 0: maps u in (0,1) to a sample of
// Lap(scale). u = 0.5 gives the median 0.
inline double laplace_quantile(double u, double scale) {
  if (scale <= 0.0) {
    throw std::invalid_argument("laplace_quantile: scale must be > 0");
  }
  if (u <= 0.0 || u >= 1.0) {
    throw std::invalid_argument("laplace_quantile: u must lie in (0,1)");
  }
  if (u < 0.5) {
    return scale * std::log(2.0 * u);
  }
  return -scale * std::log(2.0 - 2.0 * u);
}

// Random source used throughout. All draws are derived from raw 64-bit
// engine output, so streams are bit-reproducible regardless of how the
// standard library implements its distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0,1), 53-bit resolution.
  double uniform01() {
    const std::uint64_t i = engine_() >> 11;
    return (static_cast<double>(i) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index sampled from a probability row (entries >= 0, summing to ~1).
  int categorical(std::span<const double> probs) {
    const double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    // u can exceed the accumulated mass only through rounding.
    return static_cast<int>(probs.size()) - 1;
  }

  // Laplace(scale) via inverse CDF from a single uniform draw.
  double laplace(double scale) { return laplace_quantile(uniform01(), scale); }

 private:
  std::mt19937_64 engine_;
};

inline double laplace_sample(double scale, Rng& rng) { return rng.laplace(scale); }

// Decorrelated child seed for stream `stream` of a base seed (splitmix64
// finalizer). Used so that e.g. environment and privatizer noise streams
// of one run never overlap.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dprl
