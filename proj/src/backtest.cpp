#include "driftwatch/backtest.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

#include "driftwatch/engine.hpp"
#include "driftwatch/generators.hpp"

namespace driftwatch::sim {

using nlohmann::json;

std::string PolicySpec::name() const {
  switch (kind) {
    case PolicyKind::learning_debt: return "learning_debt";
    case PolicyKind::calendar: return "calendar(" + std::to_string(calendar_period) + ")";
    case PolicyKind::never: return "never";
    case PolicyKind::oracle: return "oracle";
  }
  return "never";
}

PolicySpec PolicySpec::parse(const std::string& text) {
  PolicySpec p;
  if (text == "learning_debt") {
    p.kind = PolicyKind::learning_debt;
  } else if (text == "never") {
    p.kind = PolicyKind::never;
  } else if (text == "oracle") {
    p.kind = PolicyKind::oracle;
  } else if (text.rfind("calendar(", 0) == 0 && text.back() == ')') {
    p.kind = PolicyKind::calendar;
    p.calendar_period = std::stoi(text.substr(9, text.size() - 10));
    if (p.calendar_period < 1) throw FieldError("policy", "calendar period must be >= 1");
  } else {
    throw FieldError("policy", "unknown policy " + text);
  }
  return p;
}

namespace {

PolicyResult replay_policy(const ScenarioSpec& scenario, const Config& config,
                           const PolicySpec& policy) {
  PolicyResult result;
  result.policy = policy.name();

  auto gen = make_generator(scenario);
  std::unique_ptr<MonitorEngine> engine;
  if (policy.kind == PolicyKind::learning_debt) {
    engine = std::make_unique<MonitorEngine>(config);
  }

  std::optional<Tick> last_retrain;
  bool belief_predates_shift = true;  // no retrain at/after the shift yet

  for (Tick t = 0; t < scenario.length; ++t) {
    const auto records = gen->tick(t);
    bool retrain_now = false;

    switch (policy.kind) {
      case PolicyKind::learning_debt: {
        for (const auto& rec : records) engine->ingest_open(rec);
        auto decision = engine->finalize_series(scenario.series_id);
        if (decision) {
          result.decision_log.push_back(decision->to_jsonl());
          if (decision->action == policy::Action::retrain) {
            retrain_now = true;
            const shadow::ShadowModel replacement =
                engine->retrain_replacement(scenario.series_id);
            engine->apply_retrain(scenario.series_id, t);
            gen->apply_retrain(replacement);
          }
        }
        break;
      }
      case PolicyKind::calendar:
        if (t > 0 && t % policy.calendar_period == 0) {
          retrain_now = true;
          gen->refresh_deployed(t);
        }
        break;
      case PolicyKind::never:
        break;
      case PolicyKind::oracle:
        if (scenario.shift_tick && t == *scenario.shift_tick) {
          retrain_now = true;
          gen->refresh_deployed(t);
        }
        break;
    }

    if (retrain_now) {
      result.retrain_ticks.push_back(t);
      last_retrain = t;
      if (scenario.shift_tick && t >= *scenario.shift_tick) belief_predates_shift = false;
      const bool in_shift_period = scenario.shifted(t);
      if (!in_shift_period) ++result.false_triggers;
      if (!result.detection_delay && scenario.shift_tick && t >= *scenario.shift_tick) {
        result.detection_delay = t - *scenario.shift_tick;
      }
    }

    if (scenario.shifted(t) && belief_predates_shift) ++result.stale_days;
  }

  result.retrain_count = static_cast<int>(result.retrain_ticks.size());
  result.churn_dollars = result.retrain_count * config.costs.churn_cost;
  result.bias_dollars = result.stale_days * config.costs.bias_cost_rate;
  result.total_dollars = result.churn_dollars + result.bias_dollars;
  return result;
}

}  // namespace

BacktestReport run_backtest(const ScenarioSpec& scenario, const Config& config,
                            const std::vector<PolicySpec>& policies) {
  scenario.validate();
  BacktestReport report;
  report.scenario_name = scenario.name;
  report.seed = scenario.seed;
  report.shift_tick = scenario.shift_tick;
  report.revert_tick = scenario.revert_tick;
  report.length = scenario.length;
  for (const auto& p : policies) {
    // The oracle needs a true shift to act on; without one it never retrains.
    report.policies.push_back(replay_policy(scenario, config, p));
  }
  return report;
}

std::string BacktestReport::to_json() const {
  json j;
  j["scenario"] = scenario_name;
  j["seed"] = seed;
  j["length"] = length;
  if (shift_tick) j["shift_tick"] = *shift_tick;
  if (revert_tick) j["revert_tick"] = *revert_tick;
  json policies_json = json::array();
  for (const auto& p : policies) {
    json pj;
    pj["policy"] = p.policy;
    pj["retrain_count"] = p.retrain_count;
    pj["retrain_ticks"] = p.retrain_ticks;
    pj["stale_days"] = p.stale_days;
    pj["churn_dollars"] = p.churn_dollars;
    pj["bias_dollars"] = p.bias_dollars;
    pj["total_dollars"] = p.total_dollars;
    if (p.detection_delay) pj["detection_delay"] = *p.detection_delay;
    pj["false_triggers"] = p.false_triggers;
    policies_json.push_back(pj);
  }
  j["policies"] = policies_json;
  return j.dump(2);
}

std::string BacktestReport::csv_header() const {
  return "scenario,seed,policy,retrains,stale_days,churn_dollars,bias_dollars,total_dollars,"
         "detection_delay,false_triggers";
}

std::vector<std::string> BacktestReport::csv_rows() const {
  std::vector<std::string> rows;
  for (const auto& p : policies) {
    std::ostringstream os;
    os << scenario_name << ',' << seed << ',' << p.policy << ',' << p.retrain_count << ','
       << p.stale_days << ',' << p.churn_dollars << ',' << p.bias_dollars << ','
       << p.total_dollars << ',';
    if (p.detection_delay) {
      os << *p.detection_delay;
    }
    os << ',' << p.false_triggers;
    rows.push_back(os.str());
  }
  return rows;
}

}  // namespace driftwatch::sim
