#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace driftwatch::math {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kSqrt2Pi = 2.5066282746310002;
inline constexpr double kInvSqrtPi = 0.5641895835477563;
inline constexpr double kLn2Pi = 1.8378770664093453;

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

/// Inverse standard normal CDF (Acklam's rational approximation, one
/// Halley refinement). Accurate to ~1e-15 over (0,1).
double normal_quantile(double p);

inline double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double logsumexp(std::span<const double> xs);

inline double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// logit with the argument pulled into the representable open interval;
/// output clamped to [-bound, bound].
inline double clamped_logit(double p, double bound = 30.0) {
  const double lo = sigmoid(-bound);
  const double hi = sigmoid(bound);
  p = std::clamp(p, lo, hi);
  return std::clamp(std::log(p / (1.0 - p)), -bound, bound);
}

/// Median of a copy of xs. Empty input returns NaN.
double median(std::vector<double> xs);

/// Scaled median absolute deviation (consistent for the normal: 1.4826 * MAD).
double mad_scale(const std::vector<double>& xs);

/// Linear-interpolation quantile (type 7) of an already sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// FNV-1a 64-bit hash, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view data);

std::string hex64(std::uint64_t v);

}  // namespace driftwatch::math
