#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "driftwatch/policy.hpp"
#include "driftwatch/rng.hpp"

using namespace driftwatch;
using namespace driftwatch::policy;

namespace {
CostModel costs(double churn, double rate, double duration) {
  return CostModel{churn, rate, 0.0, duration};
}
}  // namespace

TEST_CASE("threshold: the worked break-even and derived variants") {
  CHECK(threshold(costs(1000, 500, 2)) == 1.0);  // exact
  CHECK(threshold(costs(1000, 500, 4)) == doctest::Approx(0.5));
  CHECK(threshold(costs(0, 500, 4)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(threshold(costs(1000, 0, 4)), FieldError);
  CHECK_THROWS_AS(threshold(costs(1000, 500, 0)), FieldError);
}

TEST_CASE("threshold above one is reported as unreachable, not clamped") {
  const auto d = decide(0.999, costs(3000, 500, 2));
  CHECK(d.threshold == doctest::Approx(3.0));
  CHECK(d.action == Action::hold);
  bool flagged = false;
  for (const auto& f : d.flags) flagged = flagged || f == "unreachable_threshold";
  CHECK(flagged);
}

TEST_CASE("decide: hold below, retrain above, hold at the exact threshold") {
  CHECK(decide(0.6, costs(1000, 500, 3)).action == Action::hold);     // thr 0.667
  CHECK(decide(0.8, costs(1000, 500, 3)).action == Action::retrain);
  const auto tie = decide(0.5, costs(1000, 500, 4));
  CHECK(tie.threshold == doctest::Approx(0.5));
  CHECK(tie.action == Action::hold);  // strict inequality

  DecisionConfig gte;
  gte.strict_inequality = false;
  CHECK(decide(0.5, costs(1000, 500, 4), gte).action == Action::retrain);
}

TEST_CASE("decision record carries the audit fields") {
  const auto d = decide(0.6, costs(1000, 500, 4));
  CHECK(d.p_shift == doctest::Approx(0.6));
  CHECK(d.threshold == doctest::Approx(0.5));
  CHECK(d.expected_bias_exposure == doctest::Approx(0.6 * 500 * 4));
  CHECK(d.churn_cost == doctest::Approx(1000));
}

TEST_CASE("inequality fidelity on 10k random tuples") {
  Rng rng(55);
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform();
    const CostModel c = costs(2000 * rng.uniform(), 1.0 + 999 * rng.uniform(),
                              0.5 + 13.5 * rng.uniform());
    const auto d = decide(p, c);
    const double direct = c.churn_cost / (c.bias_cost_rate * c.expected_stale_duration);
    CHECK(d.threshold == direct);
    CHECK((d.action == Action::retrain) == (p > direct));
    // The record re-derives from its own stored fields.
    CHECK((d.action == Action::retrain) == (d.p_shift > d.threshold));
  }
}

TEST_CASE("decision JSONL round-trips") {
  auto d = decide(0.73, costs(1000, 500, 14));
  d.tick = 42;
  d.series_id = "retail";
  d.config_hash = "abc123";
  evidence::SignalReading r;
  r.signal_id = "score_crps";
  r.raw = 1.5;
  r.z = 4.0;
  r.weight = 1.0;
  r.contribution = 1.0;
  d.signals.push_back(r);
  const auto parsed = RetrainDecision::from_jsonl(d.to_jsonl());
  CHECK(parsed.tick == 42);
  CHECK(parsed.series_id == "retail");
  CHECK(parsed.p_shift == doctest::Approx(0.73));
  CHECK(parsed.threshold == doctest::Approx(d.threshold));
  CHECK(parsed.action == d.action);
  REQUIRE(parsed.signals.size() == 1);
  CHECK(parsed.signals[0].signal_id == "score_crps");
  CHECK(*parsed.signals[0].raw == doctest::Approx(1.5));
}

TEST_CASE("sensitivity: robust case has no flips; grid matches the decide oracle") {
  const auto grid = sensitivity(0.99, costs(100, 500, 20));  // thr 0.01, robust
  CHECK(grid.flip_count == 0);
  CHECK(grid.center_action == Action::retrain);
  for (const auto& cell : grid.cells) {
    CostModel c = costs(100 * cell.churn_factor, 500 * cell.bias_factor,
                        20 * cell.duration_factor);
    const auto d = decide(0.99, c);
    CHECK(cell.threshold == d.threshold);
    CHECK(cell.action == d.action);
    CHECK(cell.flipped == (cell.action != grid.center_action));
  }
}

TEST_CASE("sensitivity: marginal case flips where the threshold rises") {
  // p just above the center threshold 0.5.
  const auto grid = sensitivity(0.55, costs(1000, 500, 4));
  CHECK(grid.center_action == Action::retrain);
  CHECK(grid.flip_count > 0);
  int checked = 0;
  for (const auto& cell : grid.cells) {
    if (cell.churn_factor == 2.0 && cell.bias_factor == 1.0 && cell.duration_factor == 1.0) {
      CHECK(cell.action == Action::hold);  // threshold 1.0 > 0.55
      CHECK(cell.flipped);
      ++checked;
    }
    if (cell.churn_factor == 1.0 && cell.bias_factor == 1.0 && cell.duration_factor == 1.0) {
      CHECK(cell.action == grid.center_action);  // center cell equals live decision
      CHECK(!cell.flipped);
      ++checked;
    }
  }
  CHECK(checked == 2);
}

TEST_CASE("cooldown gate: inside, outside, disabled") {
  auto trigger = decide(0.9, costs(1000, 500, 14));
  trigger.tick = 105;
  const auto gated = cooldown_gate(trigger, Tick{100}, 14);
  CHECK(gated.action == Action::hold);
  bool flagged = false;
  for (const auto& f : gated.flags) flagged = flagged || f == "cooldown";
  CHECK(flagged);

  auto later = decide(0.9, costs(1000, 500, 14));
  later.tick = 120;
  CHECK(cooldown_gate(later, Tick{100}, 14).action == Action::retrain);

  auto zero = decide(0.9, costs(1000, 500, 14));
  zero.tick = 101;
  CHECK(cooldown_gate(zero, Tick{100}, 0).action == Action::retrain);

  auto fresh = decide(0.9, costs(1000, 500, 14));
  fresh.tick = 5;
  CHECK(cooldown_gate(fresh, std::nullopt, 14).action == Action::retrain);
}
