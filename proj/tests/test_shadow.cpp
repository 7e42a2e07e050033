#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"

#include <cmath>

#include "driftwatch/rng.hpp"
#include "driftwatch/shadow.hpp"

using namespace driftwatch;
using namespace driftwatch::shadow;

namespace {

ShadowConfig cfg() {
  ShadowConfig c;
  c.min_fit = 8;
  return c;
}

ShadowObservation obs(Tick t, double pred_mean, double outcome) {
  ShadowObservation o;
  o.tick = t;
  o.pred_mean = pred_mean;
  o.pred_sd = 1.0;
  o.outcome = outcome;
  return o;
}

}  // namespace

TEST_CASE("linear refit recovers outcome = 2x exactly, variance floored") {
  std::vector<ShadowObservation> window;
  for (int i = 1; i <= 10; ++i) {
    window.push_back(obs(i, static_cast<double>(i), 2.0 * i));
  }
  const auto model = shadow_refit(window, ShadowForm::linear, cfg());
  REQUIRE(model.params.size() == 2);
  CHECK(model.params[0] == abs_approx(0.0, 1e-9));
  CHECK(model.params[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(model.residual_sd == doctest::Approx(std::sqrt(1e-6)));
  CHECK(!model.fallback);
}

TEST_CASE("constant outcomes give a mean model with the floor sd") {
  std::vector<ShadowObservation> window;
  for (int i = 0; i < 12; ++i) window.push_back(obs(i, 5.0, 7.5));
  const auto model = shadow_refit(window, ShadowForm::mean, cfg());
  CHECK(model.params[0] == doctest::Approx(7.5));
  CHECK(model.residual_sd == doctest::Approx(std::sqrt(1e-6)));
  const Gaussian g = model.predict(window.front());
  CHECK(g.mu == doctest::Approx(7.5));
}

TEST_CASE("refit is deterministic: identical windows give identical parameters") {
  Rng rng(3);
  std::vector<ShadowObservation> window;
  for (int i = 0; i < 30; ++i) {
    auto o = obs(i, rng.normal(10, 2), rng.normal(20, 3));
    o.promo = (i % 4 == 0);
    window.push_back(o);
  }
  const auto a = shadow_refit(window, ShadowForm::promo_multiplier, cfg());
  const auto b = shadow_refit(window, ShadowForm::promo_multiplier, cfg());
  REQUIRE(a.params.size() == b.params.size());
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    CHECK(a.params[i] == b.params[i]);  // bitwise
  }
  CHECK(a.residual_sd == b.residual_sd);
}

TEST_CASE("under-determined fits fall back to the global mean, flagged") {
  // Linear fit on a constant feature is singular.
  std::vector<ShadowObservation> window;
  for (int i = 0; i < 10; ++i) window.push_back(obs(i, 3.0, static_cast<double>(i)));
  const auto model = shadow_refit(window, ShadowForm::linear, cfg());
  CHECK(model.fallback);
  CHECK(model.form == ShadowForm::mean);
  CHECK(model.params[0] == doctest::Approx(4.5));
}

TEST_CASE("window below the minimum fit size refuses to fit") {
  std::vector<ShadowObservation> window;
  for (int i = 0; i < 5; ++i) window.push_back(obs(i, 1.0, 1.0));
  CHECK_THROWS_AS(shadow_refit(window, ShadowForm::mean, cfg()), FieldError);
}

TEST_CASE("promo multiplier model recovers the generating multiplier") {
  Rng rng(17);
  const double mult = 1.6;
  const double sigma = 0.08;
  std::vector<ShadowObservation> window;
  for (int i = 0; i < 56; ++i) {
    const bool promo = (i % 25) < 5;
    const double seasonal = 1.0 + 0.05 * std::sin(2.0 * M_PI * i / 7.0);
    const double mean = 100.0 * seasonal * (promo ? mult : 1.0);
    auto o = obs(i, mean, mean * rng.lognormal(-0.5 * sigma * sigma, sigma));
    o.promo = promo;
    window.push_back(o);
  }
  const auto model = shadow_refit(window, ShadowForm::promo_multiplier, cfg());
  REQUIRE(model.promo_multiplier().has_value());
  CHECK(*model.promo_multiplier() == doctest::Approx(mult).epsilon(0.12));
}

TEST_CASE("booking curve refit averages per-lead fraction observations") {
  ShadowConfig c = cfg();
  std::vector<ShadowObservation> window;
  for (int rep = 0; rep < 4; ++rep) {
    for (std::int64_t lead : {7, 14, 21}) {
      ShadowObservation o;
      o.tick = rep * 3 + lead / 7;
      o.pred_mean = 50.0;
      o.pred_sd = 3.0;
      o.lead = lead;
      o.booked_fraction = 0.5 + 0.01 * static_cast<double>(lead) + 0.001 * rep;
      o.on_the_books = 30.0;
      window.push_back(o);
    }
  }
  const auto model = shadow_refit(window, ShadowForm::booking_curve, c);
  REQUIRE(model.leads.size() == 3);
  // Mean of the four reps for lead 7: 0.57 + 0.0015
  CHECK(model.fractions[0] == doctest::Approx(0.5715));
  const Gaussian g = model.predict(window.front());
  CHECK(g.mu == doctest::Approx(30.0 / 0.5715).epsilon(1e-6));
}

TEST_CASE("disagreement: identical shadow and deployed reports zeros") {
  std::vector<ShadowObservation> window;
  for (int i = 0; i < 20; ++i) {
    auto o = obs(i, 10.0, 10.0);
    o.pred_sd = std::sqrt(1e-6);  // matches the floored shadow sd
    window.push_back(o);
  }
  const auto model = shadow_refit(window, ShadowForm::mean, cfg());
  const auto rep = disagreement(window, model);
  CHECK(rep.predictive_divergence == abs_approx(0.0, 1e-6));
  CHECK(rep.skill_differential == abs_approx(0.0, 1e-9));
}

TEST_CASE("disagreement: shadow that learned the new level wins on skill") {
  Rng rng(8);
  std::vector<ShadowObservation> window;
  for (int i = 0; i < 30; ++i) {
    // Deployed believes 10; the world moved to 20.
    auto o = obs(i, 10.0, rng.normal(20.0, 1.0));
    o.pred_sd = 1.0;
    window.push_back(o);
  }
  const auto model = shadow_refit(window, ShadowForm::mean, cfg());
  const auto rep = disagreement(window, model);
  CHECK(rep.skill_differential > 5.0);
  CHECK(rep.predictive_divergence > 5.0);
}

TEST_CASE("gaussian W1: closed form sanity") {
  CHECK(gaussian_w1(Gaussian{0, 1}, Gaussian{3, 1}) == doctest::Approx(3.0));
  CHECK(gaussian_w1(Gaussian{0, 1}, Gaussian{0, 1}) == doctest::Approx(0.0));
  // Same mean, different sd: E|(s1-s2) Z| = |s1-s2| sqrt(2/pi)
  CHECK(gaussian_w1(Gaussian{0, 2}, Gaussian{0, 1}) ==
        doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-9));
}

TEST_CASE("failure mode classification") {
  ShadowConfig c = cfg();
  TrendInputs t;
  CHECK(classify_failure_mode(t, c) == FailureMode::unknown);

  t.deployed_z = 0.2;
  t.shadow_z = 0.1;
  t.skill_z = 0.0;
  CHECK(classify_failure_mode(t, c) == FailureMode::healthy);

  // Deployed degrades, shadow stays good, shadow materially better: drift.
  t.deployed_z = 8.0;
  t.shadow_z = 0.5;
  t.skill_z = 6.0;
  CHECK(classify_failure_mode(t, c) == FailureMode::drift);

  // Both degrade by 5 quiet sds with no skill gap: pipeline suspect.
  t.deployed_z = 5.0;
  t.shadow_z = 5.0;
  t.skill_z = 0.0;
  CHECK(classify_failure_mode(t, c) == FailureMode::pipeline_suspect);

  // Both at baseline: healthy.
  t.deployed_z = 0.0;
  t.shadow_z = 0.0;
  t.skill_z = 0.0;
  CHECK(classify_failure_mode(t, c) == FailureMode::healthy);
}
