#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "driftwatch/backtest.hpp"
#include "driftwatch/engine.hpp"
#include "driftwatch/generators.hpp"
#include "driftwatch/scenario.hpp"

using namespace driftwatch;
using namespace driftwatch::sim;

namespace {

Config stable_config() {
  Config cfg;
  cfg.costs = CostModel{1000.0, 500.0, 0.0, 14.0};
  return cfg;
}

Config travel_config() {
  const auto spec = ScenarioSpec::travel_default();
  return default_config_for(spec, CostModel{1000.0, 500.0, 0.0, 14.0});
}

std::vector<std::string> run_stream(MonitorEngine& engine,
                                    const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  for (const auto& line : lines) {
    for (const auto& d : engine.ingest_line(line)) out.push_back(d.to_jsonl());
  }
  for (const auto& d : engine.finish()) out.push_back(d.to_jsonl());
  return out;
}

}  // namespace

TEST_CASE("stable replay: one decision per tick, warmup flags then live verdicts") {
  ScenarioSpec spec = ScenarioSpec::stable_default();
  spec.length = 200;
  MonitorEngine engine(stable_config());
  const auto lines = generate_jsonl(spec);
  const auto decisions = run_stream(engine, lines);
  REQUIRE(decisions.size() == 200);

  int warmup = 0;
  for (const auto& line : decisions) {
    const auto d = policy::RetrainDecision::from_jsonl(line);
    const bool flagged_warmup =
        std::find(d.flags.begin(), d.flags.end(), "warmup") != d.flags.end();
    if (flagged_warmup) ++warmup;
    CHECK(d.threshold == doctest::Approx(1000.0 / (500.0 * 14.0)));
    CHECK(!d.config_hash.empty());
  }
  CHECK(warmup == 84);
  // Post-warmup decisions carry the full signal breakdown.
  const auto live = policy::RetrainDecision::from_jsonl(decisions.back());
  CHECK(live.signals.size() == MonitorEngine::signal_ids().size());
}

TEST_CASE("snapshot split-resume reproduces the uninterrupted run exactly") {
  ScenarioSpec spec = ScenarioSpec::stable_default();
  spec.length = 200;
  const auto lines = generate_jsonl(spec);

  MonitorEngine full(stable_config());
  const auto uninterrupted = run_stream(full, lines);

  for (std::size_t split : {50u, 100u, 137u}) {
    MonitorEngine first(stable_config());
    std::vector<std::string> combined;
    for (std::size_t i = 0; i < split; ++i) {
      for (const auto& d : first.ingest_line(lines[i])) combined.push_back(d.to_jsonl());
    }
    const std::string snap = first.save_snapshot();
    MonitorEngine second = MonitorEngine::load_snapshot(snap, stable_config());
    for (std::size_t i = split; i < lines.size(); ++i) {
      for (const auto& d : second.ingest_line(lines[i])) combined.push_back(d.to_jsonl());
    }
    for (const auto& d : second.finish()) combined.push_back(d.to_jsonl());
    CHECK(combined == uninterrupted);
  }
}

TEST_CASE("snapshot split mid-tick on a multi-record stream") {
  ScenarioSpec spec = ScenarioSpec::travel_default();
  spec.length = 160;
  spec.shift_tick.reset();
  const auto lines = generate_jsonl(spec);

  MonitorEngine full(travel_config());
  const auto uninterrupted = run_stream(full, lines);

  // Split right after each of a few outcome records (mid-tick state).
  std::size_t splits = 0;
  for (std::size_t i = 60; i < lines.size() && splits < 3; ++i) {
    if (lines[i].find("\"pred\"") != std::string::npos) continue;
    ++splits;
    MonitorEngine first(travel_config());
    std::vector<std::string> combined;
    for (std::size_t k = 0; k <= i; ++k) {
      for (const auto& d : first.ingest_line(lines[k])) combined.push_back(d.to_jsonl());
    }
    MonitorEngine second =
        MonitorEngine::load_snapshot(first.save_snapshot(), travel_config());
    for (std::size_t k = i + 1; k < lines.size(); ++k) {
      for (const auto& d : second.ingest_line(lines[k])) combined.push_back(d.to_jsonl());
    }
    for (const auto& d : second.finish()) combined.push_back(d.to_jsonl());
    CHECK(combined == uninterrupted);
  }
  CHECK(splits == 3);
}

TEST_CASE("streaming monitor equals the backtest's internal replay on stable data") {
  ScenarioSpec spec = ScenarioSpec::stable_default();
  spec.length = 220;
  const Config cfg = stable_config();

  MonitorEngine engine(cfg);
  engine.set_reset_on_trigger(true);
  const auto streamed = run_stream(engine, generate_jsonl(spec));

  const auto report = run_backtest(spec, cfg, {PolicySpec::parse("learning_debt")});
  CHECK(streamed == report.policies[0].decision_log);
}

TEST_CASE("retrain execution resets monitors and discards in-flight outcomes") {
  MonitorEngine engine(stable_config());
  // Ticks 0..9 with inline outcomes, plus one outstanding prediction.
  for (int t = 0; t < 10; ++t) {
    engine.ingest_line(R"({"ts":)" + std::to_string(t) +
                       R"(,"series":"a","pred":{"gaussian":[0,1]},"outcome":0.5})");
  }
  engine.ingest_line(R"({"ts":10,"series":"a","pred":{"gaussian":[0,1]}})");
  engine.apply_retrain("a", 10);
  const SeriesState* st = engine.find_series("a");
  REQUIRE(st != nullptr);
  CHECK(st->ticks_seen == 0);
  CHECK(!st->warmed);
  CHECK(st->last_retrain == Tick{10});
  CHECK(st->crps_window.empty());
  // The outcome for the retired prediction is swallowed, not scored.
  CHECK_NOTHROW(engine.ingest_line(R"({"ts":10,"series":"a","outcome":99.0})"));
  CHECK(st->crps_window.empty());
}

TEST_CASE("distinct series keep independent state") {
  MonitorEngine engine(stable_config());
  engine.ingest_line(R"({"ts":5,"series":"a","pred":{"gaussian":[0,1]},"outcome":0.1})");
  engine.ingest_line(R"({"ts":1,"series":"b","pred":{"gaussian":[5,1]},"outcome":5.2})");
  REQUIRE(engine.find_series("a") != nullptr);
  REQUIRE(engine.find_series("b") != nullptr);
  CHECK(engine.find_series("a")->open_tick == 5);
  CHECK(engine.find_series("b")->open_tick == 1);
}

TEST_CASE("travel monitor populates lead rings and the lead divergence signal") {
  ScenarioSpec spec = ScenarioSpec::travel_default();
  spec.length = 120;
  spec.shift_tick.reset();
  MonitorEngine engine(travel_config());
  for (const auto& line : generate_jsonl(spec)) engine.ingest_line(line);
  const SeriesState* st = engine.find_series("travel");
  REQUIRE(st != nullptr);
  CHECK(st->lead_rings.size() == 6);
  CHECK(st->warmed);
  REQUIRE(st->baselines.count("lead_divergence") == 1);
  CHECK(!st->baselines.at("lead_divergence").degenerate);
}
