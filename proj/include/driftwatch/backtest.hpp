#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftwatch/config.hpp"
#include "driftwatch/scenario.hpp"

namespace driftwatch::sim {

enum class PolicyKind { learning_debt, calendar, never, oracle };

struct PolicySpec {
  PolicyKind kind = PolicyKind::learning_debt;
  int calendar_period = 30;  // calendar policies only

  std::string name() const;
  static PolicySpec parse(const std::string& text);  // "learning_debt", "calendar(7)", ...
};

/// Priced outcome of one policy replay.
struct PolicyResult {
  std::string policy;
  int retrain_count = 0;
  std::vector<Tick> retrain_ticks;
  int stale_days = 0;
  double churn_dollars = 0.0;
  double bias_dollars = 0.0;
  double total_dollars = 0.0;
  std::optional<Tick> detection_delay;  // first retrain at/after the shift
  int false_triggers = 0;               // retrains outside the shifted period
  std::vector<std::string> decision_log;  // learning_debt only, JSONL lines
};

struct BacktestReport {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::optional<Tick> shift_tick;
  std::optional<Tick> revert_tick;
  Tick length = 0;
  std::vector<PolicyResult> policies;

  std::string to_json() const;
  std::string csv_header() const;
  std::vector<std::string> csv_rows() const;
};

/// Replay the scenario through each policy, pricing churn and bias in the
/// cost model's units. A stale day is a tick inside the shifted period whose
/// deployed belief predates the shift; the oracle retrains exactly once at
/// the true shift tick.
BacktestReport run_backtest(const ScenarioSpec& scenario, const Config& config,
                            const std::vector<PolicySpec>& policies);

}  // namespace driftwatch::sim
