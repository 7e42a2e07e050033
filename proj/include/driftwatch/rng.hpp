#pragma once

#include <cstdint>
#include <random>

#include "driftwatch/math.hpp"

namespace driftwatch {

/// Deterministic random source for the simulators. Normal draws go through
/// the inverse CDF so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    // 53-bit mantissa uniform in (0,1); never exactly 0 or 1.
    const std::uint64_t bits = gen_() >> 11;
    return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal(double mu = 0.0, double sigma = 1.0) {
    return mu + sigma * math::normal_quantile(uniform());
  }

  double lognormal(double log_mu, double log_sigma) {
    return std::exp(normal(log_mu, log_sigma));
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return gen_() % n;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace driftwatch
