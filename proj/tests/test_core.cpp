#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "driftwatch/config.hpp"
#include "driftwatch/engine.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/types.hpp"

using namespace driftwatch;

namespace {

Config test_config() {
  Config cfg;
  cfg.costs = CostModel{1000.0, 500.0, 0.0, 14.0};
  return cfg;
}

}  // namespace

TEST_CASE("ingest maps a gaussian record with inline outcome") {
  const auto event =
      ingest_event(R"({"ts":1,"series":"a","pred":{"gaussian":[10.0,2.0]},"outcome":11.0})");
  CHECK(event.timestamp == 1);
  CHECK(event.series_id == "a");
  REQUIRE(event.prediction.is_gaussian());
  CHECK(event.prediction.gaussian().mu == doctest::Approx(10.0));
  CHECK(event.prediction.gaussian().sigma == doctest::Approx(2.0));
  REQUIRE(event.outcome.has_value());
  CHECK(*event.outcome == doctest::Approx(11.0));
}

TEST_CASE("ingest rejects a non-positive sigma, naming the field") {
  try {
    ingest_event(R"({"ts":1,"series":"a","pred":{"gaussian":[10.0,-1.0]}})");
    FAIL("expected a FieldError");
  } catch (const FieldError& e) {
    CHECK(e.field() == "pred.gaussian.sigma");
    CHECK(std::string(e.what()).find("sigma must be > 0") != std::string::npos);
  }
}

TEST_CASE("ingest maps ensembles with group labels") {
  const auto event = ingest_event(
      R"({"ts":2,"series":"a","pred":{"ensemble":[1.0,2.0,3.0]},"groups":{"promo":"on"}})");
  REQUIRE(event.prediction.is_ensemble());
  CHECK(event.prediction.ensemble().members.size() == 3);
  CHECK(event.groups.at("promo") == "on");
}

TEST_CASE("unknown fields pass through ignored; unknown groups kept verbatim") {
  const auto event = ingest_event(
      R"({"ts":3,"series":"a","pred":{"gaussian":[0.0,1.0]},"mystery":42,"groups":{"segment":"smb"}})");
  CHECK(event.timestamp == 3);
  CHECK(event.groups.at("segment") == "smb");
}

TEST_CASE("outcome-only records parse as outcome records") {
  const auto rec = parse_record(R"({"ts":7,"series":"a","outcome":4.5})");
  REQUIRE(std::holds_alternative<OutcomeRecord>(rec));
  CHECK(std::get<OutcomeRecord>(rec).outcome == doctest::Approx(4.5));
}

TEST_CASE("malformed records name the offending field") {
  CHECK_THROWS_AS(parse_record("not json"), FieldError);
  CHECK_THROWS_AS(parse_record(R"({"series":"a","pred":{"gaussian":[0,1]}})"), FieldError);
  CHECK_THROWS_AS(parse_record(R"({"ts":1,"pred":{"gaussian":[0,1]}})"), FieldError);
  CHECK_THROWS_AS(
      parse_record(R"({"ts":1,"series":"a","pred":{"histogram":{"edges":[0,1],"masses":[0.5]}}})"),
      FieldError);
  CHECK_THROWS_AS(parse_record(R"({"ts":1,"series":"a","pred":{"gaussian":[0,1]},"outcome":"x"})"),
                  FieldError);
}

TEST_CASE("histogram invariants: edges increasing, masses to one") {
  CHECK_NOTHROW(ingest_event(
      R"({"ts":1,"series":"a","pred":{"histogram":{"edges":[0,1,2],"masses":[0.5,0.5]}}})"));
  CHECK_THROWS_AS(
      ingest_event(
          R"({"ts":1,"series":"a","pred":{"histogram":{"edges":[0,0,2],"masses":[0.5,0.5]}}})"),
      FieldError);
}

TEST_CASE("round trip through to_jsonl re-parses identically") {
  const auto event = ingest_event(
      R"({"ts":2,"series":"a","pred":{"ensemble":[1.5,2.5]},"groups":{"promo":"off"},"lead_time":14})");
  const auto again = ingest_event(to_jsonl(event));
  CHECK(again.timestamp == event.timestamp);
  CHECK(again.lead_time == event.lead_time);
  CHECK(again.groups == event.groups);
}

TEST_CASE("engine rejects non-monotone prediction timestamps") {
  MonitorEngine engine(test_config());
  engine.ingest_line(R"({"ts":5,"series":"a","pred":{"gaussian":[0,1]},"outcome":0.1})");
  CHECK_THROWS_AS(
      engine.ingest_line(R"({"ts":5,"series":"a","pred":{"gaussian":[0,1]},"outcome":0.2})"),
      FieldError);
  // A different series keeps its own clock.
  CHECK_NOTHROW(
      engine.ingest_line(R"({"ts":1,"series":"b","pred":{"gaussian":[0,1]},"outcome":0.0})"));
}

TEST_CASE("late outcomes match pending predictions by series and timestamp") {
  MonitorEngine engine(test_config());
  engine.ingest_line(R"({"ts":1,"series":"a","pred":{"gaussian":[0,1]}})");
  engine.ingest_line(R"({"ts":2,"series":"a","pred":{"gaussian":[0,1]}})");
  CHECK_NOTHROW(engine.ingest_line(R"({"ts":1,"series":"a","outcome":0.3})"));
  // No pending prediction at ts=9.
  CHECK_THROWS_AS(engine.ingest_line(R"({"ts":9,"series":"a","outcome":0.3})"), FieldError);
}

TEST_CASE("config: mandatory costs, defaults elsewhere") {
  const Config cfg = parse_config(R"({"costs":{"churn_cost":1000,"bias_cost_rate":500}})");
  CHECK(cfg.costs.churn_cost == doctest::Approx(1000));
  CHECK(cfg.costs.expected_stale_duration == doctest::Approx(14.0));
  CHECK(cfg.windows.score == 28);
  CHECK(cfg.hazard.base == doctest::Approx(0.004));
  CHECK(cfg.baseline.quiet_ticks == 84);
}

TEST_CASE("config validation lists every violated field") {
  try {
    parse_config(R"({"costs":{"churn_cost":-1,"bias_cost_rate":0},
                     "hazard":{"base":2.0},
                     "scoring":{"coverage_level":1.5}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.errors().size() >= 4);
    bool churn = false, hazard = false, coverage = false;
    for (const auto& msg : e.errors()) {
      churn = churn || msg.find("churn_cost") != std::string::npos;
      hazard = hazard || msg.find("hazard.base") != std::string::npos;
      coverage = coverage || msg.find("coverage_level") != std::string::npos;
    }
    CHECK(churn);
    CHECK(hazard);
    CHECK(coverage);
  }
}

TEST_CASE("config hash is stable and sensitive") {
  const Config a = parse_config(R"({"costs":{"churn_cost":1000,"bias_cost_rate":500}})");
  const Config b = parse_config(R"({"costs":{"churn_cost":1000,"bias_cost_rate":500}})");
  const Config c = parse_config(R"({"costs":{"churn_cost":999,"bias_cost_rate":500}})");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("snapshot: empty engine round-trips byte-identically") {
  MonitorEngine engine(test_config());
  const std::string snap = engine.save_snapshot();
  MonitorEngine restored = MonitorEngine::load_snapshot(snap, test_config());
  CHECK(restored.save_snapshot() == snap);
}

TEST_CASE("snapshot: corruption and version mismatch are named errors") {
  MonitorEngine engine(test_config());
  const std::string snap = engine.save_snapshot();
  CHECK_THROWS_AS(MonitorEngine::load_snapshot("garbage", test_config()), FieldError);
  std::string tampered = snap;
  const auto pos = tampered.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  tampered.replace(pos, 11, "\"version\":9");
  CHECK_THROWS_AS(MonitorEngine::load_snapshot(tampered, test_config()), FieldError);

  Config other = test_config();
  other.costs.churn_cost = 1.0;
  CHECK_THROWS_AS(MonitorEngine::load_snapshot(snap, other), FieldError);
}

TEST_CASE("distribution quantiles and intervals behave") {
  PredictiveDistribution g{Gaussian{0.0, 1.0}};
  auto [lo, hi] = g.central_interval(0.8);
  CHECK(lo == doctest::Approx(-1.2815515655446004).epsilon(1e-9));
  CHECK(hi == doctest::Approx(1.2815515655446004).epsilon(1e-9));

  PredictiveDistribution h{Histogram{{0.0, 1.0}, {1.0}}};
  CHECK(h.cdf(0.25) == doctest::Approx(0.25));
  CHECK(h.quantile(0.25) == doctest::Approx(0.25));

  PredictiveDistribution e{Ensemble{{1.0, 2.0, 3.0, 4.0}}};
  CHECK(e.cdf(2.5) == doctest::Approx(0.5));
}
