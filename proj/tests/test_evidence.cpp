#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"

#include <cmath>

#include "driftwatch/evidence.hpp"
#include "driftwatch/math.hpp"
#include "driftwatch/rng.hpp"

using namespace driftwatch;
using namespace driftwatch::evidence;

namespace {

SignalReading reading(const std::string& id, double z, double weight) {
  SignalReading r;
  r.signal_id = id;
  r.raw = z;  // raw value present; z supplied directly for pooling tests
  r.z = z;
  r.weight = weight;
  return r;
}

EvidenceConfig default_evidence() { return Config{}.evidence; }

}  // namespace

TEST_CASE("quiet baseline: constant history flags degenerate with the floor") {
  const auto b = quiet_baseline_fit(std::vector<double>(50, 5.0));
  CHECK(b.mean == doctest::Approx(5.0));
  CHECK(b.sd == doctest::Approx(1e-9));
  CHECK(b.degenerate);
}

TEST_CASE("quiet baseline: recovers N(0,1) location and scale") {
  Rng rng(31);
  std::vector<double> hist;
  for (int i = 0; i < 1000; ++i) hist.push_back(rng.normal(0, 1));
  const auto b = quiet_baseline_fit(hist);
  CHECK(std::fabs(b.mean) < 0.1);
  CHECK(std::fabs(b.sd - 1.0) < 0.15);
  CHECK(!b.degenerate);
}

TEST_CASE("quiet baseline: 1% outliers barely perturb the scale, unlike plain sd") {
  Rng rng(32);
  std::vector<double> hist;
  for (int i = 0; i < 1000; ++i) hist.push_back(rng.normal(0, 1));
  for (int i = 0; i < 10; ++i) hist[static_cast<std::size_t>(i * 97)] = 100.0;
  const auto b = quiet_baseline_fit(hist);
  CHECK(std::fabs(b.sd - 1.0) < 0.2);

  double mean = 0.0;
  for (double x : hist) mean += x;
  mean /= hist.size();
  double ss = 0.0;
  for (double x : hist) ss += (x - mean) * (x - mean);
  const double plain_sd = std::sqrt(ss / (hist.size() - 1));
  CHECK(plain_sd > 5.0);  // poisoned; the robust scale is not
}

TEST_CASE("pooling: z-scores at or below the dead zone leave bocd_p unchanged") {
  auto cfg = default_evidence();
  std::vector<SignalReading> readings = {reading("a", 2.0, 1.0), reading("b", -3.0, 5.0),
                                         reading("c", 1.9, 100.0)};
  for (double p : {0.01, 0.3, 0.77}) {
    CHECK(pool_evidence(readings, p, cfg) == abs_approx(p, 1e-12));
  }
}

TEST_CASE("pooling: frozen arithmetic case from the dead-zone map") {
  auto cfg = default_evidence();
  std::vector<SignalReading> readings = {reading("a", 4.0, 1.0)};
  // logit(0.5) = 0, g(4) = (4-2)*0.5 = 1.0, sigmoid(1) = 0.731...
  CHECK(pool_evidence(readings, 0.5, cfg) ==
        doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(readings[0].contribution == doctest::Approx(1.0));
}

TEST_CASE("pooling: zero weights reduce to bocd_p for any readings") {
  auto cfg = default_evidence();
  std::vector<SignalReading> readings = {reading("a", 50.0, 0.0), reading("b", 8.0, 0.0)};
  CHECK(pool_evidence(readings, 0.42, cfg) == abs_approx(0.42, 1e-12));
}

TEST_CASE("pooling: monotone in every z and in bocd_p; strictly inside (0,1)") {
  auto cfg = default_evidence();
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = 0.02 + 0.9 * rng.uniform();
    std::vector<SignalReading> readings = {reading("a", rng.normal(2, 2), 1.0),
                                           reading("b", rng.normal(2, 2), 0.5)};
    const double base = pool_evidence(readings, p, cfg);
    CHECK(base > 0.0);
    CHECK(base < 1.0);

    auto bumped = readings;
    bumped[0].z += std::fabs(rng.normal(0, 1));
    CHECK(pool_evidence(bumped, p, cfg) >= base - 1e-12);

    auto hotter = readings;
    CHECK(pool_evidence(hotter, std::min(0.999, p + 0.05), cfg) >= base - 1e-12);
  }
}

TEST_CASE("pooling: contributions decompose logit(pooled) - logit(bocd)") {
  auto cfg = default_evidence();
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = 0.05 + 0.8 * rng.uniform();
    std::vector<SignalReading> readings = {reading("a", rng.normal(3, 2), 1.0),
                                           reading("b", rng.normal(3, 2), 0.7),
                                           reading("c", rng.normal(0, 1), 0.3)};
    const double pooled = pool_evidence(readings, p, cfg);
    double total = 0.0;
    for (const auto& r : readings) total += r.contribution;
    CHECK(total == abs_approx(math::clamped_logit(pooled) - math::clamped_logit(p), 1e-9));
  }
}

TEST_CASE("pooling: extreme inputs clamp at logit 30 and stay below one") {
  auto cfg = default_evidence();
  std::vector<SignalReading> readings;
  for (int i = 0; i < 40; ++i) readings.push_back(reading("s" + std::to_string(i), 50.0, 1.0));
  const double pooled = pool_evidence(readings, 0.999999, cfg);
  CHECK(pooled < 1.0);
  CHECK(pooled == doctest::Approx(math::sigmoid(30.0)).epsilon(1e-12));
}

TEST_CASE("readings without a raw value contribute nothing") {
  auto cfg = default_evidence();
  SignalReading missing;
  missing.signal_id = "gone";
  missing.weight = 5.0;
  missing.z = 40.0;  // would dominate if counted
  std::vector<SignalReading> readings = {missing};
  CHECK(pool_evidence(readings, 0.25, cfg) == abs_approx(0.25, 1e-12));
}
