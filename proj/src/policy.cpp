#include "driftwatch/policy.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace driftwatch::policy {

using nlohmann::json;

std::string action_name(Action a) { return a == Action::retrain ? "retrain" : "hold"; }

double threshold(const CostModel& cost) {
  const double denom = cost.bias_cost_rate * cost.expected_stale_duration;
  if (!(denom > 0.0)) {
    throw FieldError("costs", "bias_cost_rate * expected_stale_duration must be > 0");
  }
  return cost.churn_cost / denom;
}

RetrainDecision decide(double p_shift, const CostModel& cost, const DecisionConfig& rule) {
  RetrainDecision d;
  d.p_shift = p_shift;
  d.threshold = threshold(cost);
  d.churn_cost = cost.churn_cost;
  d.expected_bias_exposure = p_shift * cost.bias_cost_rate * cost.expected_stale_duration;
  const bool crossed = rule.strict_inequality ? p_shift > d.threshold : p_shift >= d.threshold;
  d.action = crossed ? Action::retrain : Action::hold;
  if (d.threshold > 1.0) d.flags.push_back("unreachable_threshold");
  return d;
}

SensitivityGrid sensitivity(double p_shift, const CostModel& cost, const DecisionConfig& rule) {
  SensitivityGrid grid;
  grid.p_shift = p_shift;
  grid.center_cost = cost;
  grid.center_action = decide(p_shift, cost, rule).action;
  static constexpr double kFactors[3] = {0.5, 1.0, 2.0};
  int idx = 0;
  for (double fc : kFactors) {
    for (double fb : kFactors) {
      for (double fd : kFactors) {
        CostModel perturbed = cost;
        perturbed.churn_cost *= fc;
        perturbed.bias_cost_rate *= fb;
        perturbed.expected_stale_duration *= fd;
        const RetrainDecision d = decide(p_shift, perturbed, rule);
        SensitivityCell& cell = grid.cells[static_cast<std::size_t>(idx++)];
        cell.churn_factor = fc;
        cell.bias_factor = fb;
        cell.duration_factor = fd;
        cell.threshold = d.threshold;
        cell.action = d.action;
        cell.flipped = d.action != grid.center_action;
        if (cell.flipped) ++grid.flip_count;
      }
    }
  }
  return grid;
}

RetrainDecision cooldown_gate(RetrainDecision decision, std::optional<Tick> last_retrain_tick,
                              int cooldown) {
  if (decision.action == Action::retrain && cooldown > 0 && last_retrain_tick &&
      decision.tick - *last_retrain_tick <= cooldown) {
    decision.action = Action::hold;
    decision.flags.push_back("cooldown");
  }
  return decision;
}

std::string RetrainDecision::to_jsonl() const {
  json j;
  j["tick"] = tick;
  j["series"] = series_id;
  j["p_shift"] = p_shift;
  j["threshold"] = threshold;
  j["action"] = action_name(action);
  j["expected_bias_exposure"] = expected_bias_exposure;
  j["churn_cost"] = churn_cost;
  j["bocd_p"] = bocd_probability;
  json sigs = json::array();
  for (const auto& s : signals) {
    json sj;
    sj["id"] = s.signal_id;
    if (s.raw) {
      sj["raw"] = *s.raw;
    } else {
      sj["raw"] = nullptr;
    }
    sj["baseline_mean"] = s.baseline_mean;
    sj["baseline_sd"] = s.baseline_sd;
    sj["z"] = s.z;
    sj["weight"] = s.weight;
    sj["contribution"] = s.contribution;
    if (s.degenerate_baseline) sj["degenerate_baseline"] = true;
    sigs.push_back(sj);
  }
  j["signals"] = sigs;
  j["failure_mode"] = failure_mode;
  j["flags"] = flags;
  j["config_hash"] = config_hash;
  return j.dump();
}

RetrainDecision RetrainDecision::from_jsonl(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FieldError("decision", "not valid JSON");
  RetrainDecision d;
  d.tick = j.at("tick").get<Tick>();
  d.series_id = j.at("series").get<std::string>();
  d.p_shift = j.at("p_shift").get<double>();
  d.threshold = j.at("threshold").get<double>();
  d.action = j.at("action").get<std::string>() == "retrain" ? Action::retrain : Action::hold;
  d.expected_bias_exposure = j.value("expected_bias_exposure", 0.0);
  d.churn_cost = j.value("churn_cost", 0.0);
  d.bocd_probability = j.value("bocd_p", 0.0);
  if (j.contains("signals")) {
    for (const auto& sj : j["signals"]) {
      evidence::SignalReading s;
      s.signal_id = sj.value("id", "");
      if (sj.contains("raw") && !sj["raw"].is_null()) s.raw = sj["raw"].get<double>();
      s.baseline_mean = sj.value("baseline_mean", 0.0);
      s.baseline_sd = sj.value("baseline_sd", 1.0);
      s.z = sj.value("z", 0.0);
      s.weight = sj.value("weight", 0.0);
      s.contribution = sj.value("contribution", 0.0);
      s.degenerate_baseline = sj.value("degenerate_baseline", false);
      d.signals.push_back(std::move(s));
    }
  }
  d.failure_mode = j.value("failure_mode", "unknown");
  if (j.contains("flags")) {
    for (const auto& f : j["flags"]) d.flags.push_back(f.get<std::string>());
  }
  d.config_hash = j.value("config_hash", "");
  return d;
}

std::string SensitivityGrid::to_json() const {
  json j;
  j["p_shift"] = p_shift;
  j["center"] = {{"churn_cost", center_cost.churn_cost},
                 {"bias_cost_rate", center_cost.bias_cost_rate},
                 {"expected_stale_duration", center_cost.expected_stale_duration},
                 {"action", action_name(center_action)}};
  j["flip_count"] = flip_count;
  json cells = json::array();
  for (const auto& c : this->cells) {
    cells.push_back({{"churn_factor", c.churn_factor},
                     {"bias_factor", c.bias_factor},
                     {"duration_factor", c.duration_factor},
                     {"threshold", c.threshold},
                     {"action", action_name(c.action)},
                     {"flipped", c.flipped}});
  }
  j["cells"] = cells;
  return j.dump(2);
}

std::string SensitivityGrid::to_text() const {
  std::ostringstream os;
  os << "sensitivity grid: p_shift=" << p_shift
     << " center=" << action_name(center_action) << " flips=" << flip_count << "\n";
  os << "churn  bias   dur    threshold  action    flip\n";
  for (const auto& c : cells) {
    os << "x" << c.churn_factor << "   x" << c.bias_factor << "   x" << c.duration_factor
       << "   " << c.threshold << "  " << action_name(c.action) << (c.flipped ? "  *" : "")
       << "\n";
  }
  return os.str();
}

}  // namespace driftwatch::policy
