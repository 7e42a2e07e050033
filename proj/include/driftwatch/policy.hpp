#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "driftwatch/config.hpp"
#include "driftwatch/evidence.hpp"
#include "driftwatch/types.hpp"

namespace driftwatch::policy {

enum class Action { hold, retrain };

std::string action_name(Action a);

/// churn_cost / (bias_cost_rate * expected_stale_duration). May exceed 1,
/// in which case retraining can never trigger (callers report that).
/// Throws FieldError on a zero denominator.
double threshold(const CostModel& cost);

/// The audited verdict for one tick.
struct RetrainDecision {
  Tick tick = 0;
  std::string series_id;
  double p_shift = 0.0;
  double threshold = 0.0;
  Action action = Action::hold;
  double expected_bias_exposure = 0.0;  // p_shift * bias_cost_rate * duration
  double churn_cost = 0.0;
  double bocd_probability = 0.0;
  std::vector<evidence::SignalReading> signals;
  std::string failure_mode = "unknown";
  std::vector<std::string> flags;  // warmup, cooldown, unreachable_threshold
  std::string config_hash;

  std::string to_jsonl() const;
  static RetrainDecision from_jsonl(const std::string& line);
};

/// Apply the decision inequality: retrain iff p_shift exceeds the cost
/// threshold (strictly, unless configured otherwise).
RetrainDecision decide(double p_shift, const CostModel& cost,
                       const DecisionConfig& rule = DecisionConfig{});

/// Multiplicative {x1/2, x1, x2} perturbations per cost parameter; 3x3x3
/// grid of re-evaluated decisions with flip flags against the center.
struct SensitivityCell {
  double churn_factor = 1.0;
  double bias_factor = 1.0;
  double duration_factor = 1.0;
  double threshold = 0.0;
  Action action = Action::hold;
  bool flipped = false;
};

struct SensitivityGrid {
  double p_shift = 0.0;
  CostModel center_cost;
  Action center_action = Action::hold;
  std::array<SensitivityCell, 27> cells;
  int flip_count = 0;

  std::string to_json() const;
  std::string to_text() const;
};

SensitivityGrid sensitivity(double p_shift, const CostModel& cost,
                            const DecisionConfig& rule = DecisionConfig{});

/// Suppress retrains within `cooldown` ticks of the previous retrain.
RetrainDecision cooldown_gate(RetrainDecision decision, std::optional<Tick> last_retrain_tick,
                              int cooldown);

}  // namespace driftwatch::policy
