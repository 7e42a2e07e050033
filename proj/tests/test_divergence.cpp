#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"

#include <cmath>

#include "driftwatch/divergence.hpp"
#include "driftwatch/rng.hpp"

using namespace driftwatch;
using namespace driftwatch::divergence;

namespace {

using ED = EmpiricalDistribution;

ED hist(std::vector<double> edges, std::vector<double> masses,
        ED::Provenance prov = ED::Provenance::recent) {
  return ED::from_histogram(std::move(edges), std::move(masses), prov);
}

ED samples(std::vector<double> xs, ED::Provenance prov = ED::Provenance::recent) {
  return ED::from_samples(std::move(xs), prov);
}

}  // namespace

TEST_CASE("l1: identity, maximal disagreement, frozen arithmetic") {
  const auto p = hist({0, 1, 2}, {0.6, 0.4});
  CHECK(l1_distance(p, p) == doctest::Approx(0.0));

  const auto a = hist({0, 1}, {1.0});
  const auto b = hist({5, 6}, {1.0});
  CHECK(l1_distance(a, b) == doctest::Approx(2.0));

  const auto q = hist({0, 1, 2}, {0.4, 0.6});
  CHECK(l1_distance(p, q) == doctest::Approx(0.4));
  CHECK(l1_distance(q, p) == doctest::Approx(0.4));  // symmetric
}

TEST_CASE("kl: identity, frozen bernoulli value, non-negativity, asymmetry") {
  const auto p = hist({0, 1, 2}, {0.5, 0.5});
  const auto q = hist({0, 1, 2}, {0.25, 0.75});
  CHECK(kl_divergence(p, p, 1e-9) == abs_approx(0.0, 1e-7));
  // 0.5 ln 2 + 0.5 ln(2/3), epsilon -> 0
  CHECK(kl_divergence(p, q, 1e-12) ==
        abs_approx(0.14384103622589045, 1e-9));
  CHECK(kl_divergence(p, q, 1e-12) != doctest::Approx(kl_divergence(q, p, 1e-12)));

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> pm(4), qm(4);
    double ps = 0, qs = 0;
    for (int k = 0; k < 4; ++k) {
      pm[k] = rng.uniform();
      qm[k] = rng.uniform();
      ps += pm[k];
      qs += qm[k];
    }
    for (int k = 0; k < 4; ++k) {
      pm[k] /= ps;
      qm[k] /= qs;
    }
    const auto dp = hist({0, 1, 2, 3, 4}, pm);
    const auto dq = hist({0, 1, 2, 3, 4}, qm);
    CHECK(kl_divergence(dp, dq, 1e-9) >= 0.0);  // Gibbs' inequality
  }
}

TEST_CASE("wasserstein1: point masses, identity, sorted-difference samples") {
  CHECK(wasserstein1(samples({0.0}), samples({1.0})) == doctest::Approx(1.0));
  CHECK(wasserstein1(samples({0, 0, 0, 0}), samples({2, 2, 2, 2})) == doctest::Approx(2.0));
  const auto p = samples({1.0, 3.0, 5.0});
  CHECK(wasserstein1(p, p) == doctest::Approx(0.0));
  // Unequal sizes via the step-CDF integral: {0,1} vs {0.5}.
  CHECK(wasserstein1(samples({0.0, 1.0}), samples({0.5})) == doctest::Approx(0.5));
}

TEST_CASE("wasserstein1 translation covariance on point masses") {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.normal(0, 5);
    const double b = rng.normal(0, 5);
    const double c = std::fabs(rng.normal(0, 3));
    const double base = wasserstein1(samples({a}), samples({b}));
    // Shifting both leaves the distance unchanged.
    CHECK(wasserstein1(samples({a + c}), samples({b + c})) ==
          abs_approx(base, 1e-12));
    // Shifting the larger one outward changes it by exactly c.
    if (a <= b) {
      CHECK(wasserstein1(samples({a}), samples({b + c})) ==
            abs_approx(base + c, 1e-12));
    }
  }
}

TEST_CASE("wasserstein1 on histograms matches the piecewise-linear CDF integral") {
  // Uniform [0,1] vs uniform [1,2]: transport distance exactly 1.
  CHECK(wasserstein1(hist({0, 1}, {1.0}), hist({1, 2}, {1.0})) == doctest::Approx(1.0));
  // Uniform [0,2] vs uniform [0,1]: integral of |x/2 - min(x,1)| dx = 1/2.
  CHECK(wasserstein1(hist({0, 2}, {1.0}), hist({0, 1}, {1.0})) == doctest::Approx(0.5));
}

TEST_CASE("rebinning preserves mass within 1e-9 and splits by overlap") {
  const std::vector<double> edges{0.0, 1.0, 3.0};
  const std::vector<double> masses{0.3, 0.7};
  const std::vector<double> target{0.0, 0.5, 1.0, 2.0, 3.0};
  const auto out = rebin(edges, masses, target);
  double total = 0.0;
  for (double m : out) total += m;
  CHECK(total == abs_approx(1.0, 1e-9));
  CHECK(out[0] == doctest::Approx(0.15));
  CHECK(out[1] == doctest::Approx(0.15));
  CHECK(out[2] == doctest::Approx(0.35));
  CHECK(out[3] == doctest::Approx(0.35));
}

TEST_CASE("identity of indiscernibles up to smoothing") {
  Rng rng(4);
  const double eps = 1e-6;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> pm{0.25, 0.25, 0.25, 0.25};
    std::vector<double> qm = pm;
    const auto dp = hist({0, 1, 2, 3, 4}, pm);
    CHECK(l1_distance(dp, dp) == doctest::Approx(0.0));
    CHECK(kl_divergence(dp, dp, eps) == abs_approx(0.0, 1e-12));
    CHECK(wasserstein1(dp, dp) == doctest::Approx(0.0));
    // Perturb one bin by more than 10 * epsilon: all three move off zero.
    qm[1] += 2e-4;
    qm[2] -= 2e-4;
    const auto dq = hist({0, 1, 2, 3, 4}, qm);
    CHECK(l1_distance(dp, dq) > 0.0);
    CHECK(kl_divergence(dp, dq, eps) > 0.0);
    CHECK(wasserstein1(dp, dq) > 0.0);
  }
}

TEST_CASE("incompatible supports after rebinning raise an error") {
  CHECK_THROWS_AS(rebin({0.0, 1.0}, {1.0}, {5.0, 6.0}), FieldError);
}

TEST_CASE("leadtime divergence: identity, positivity, sentinel") {
  BookedCurve baseline{{7, 14, 21, 28}, {0.9, 0.8, 0.7, 0.62}};
  CHECK(*leadtime_divergence(baseline, baseline) == doctest::Approx(0.0));

  BookedCurve shifted{{7, 14, 21, 28}, {0.8, 0.65, 0.5, 0.42}};
  CHECK(*leadtime_divergence(baseline, shifted) > 0.0);

  BookedCurve empty;
  CHECK(!leadtime_divergence(baseline, empty).has_value());

  BookedCurve misaligned{{7, 14}, {0.9, 0.8}};
  CHECK_THROWS_AS(leadtime_divergence(baseline, misaligned), FieldError);
}

TEST_CASE("leadtime divergence equals the trapezoid of the fraction gap") {
  // Constant gap of 0.1 from lead 0 anchor: trapezoid over {0->10, 10->20}.
  BookedCurve baseline{{10, 20}, {0.8, 0.6}};
  BookedCurve recent{{10, 20}, {0.7, 0.5}};
  // Segment 0..10 ramps 0 -> 0.1 (0.5), segment 10..20 flat 0.1 (1.0).
  CHECK(*leadtime_divergence(baseline, recent) == doctest::Approx(1.5));
}
