#pragma once

#include <memory>
#include <vector>

#include "driftwatch/rng.hpp"
#include "driftwatch/scenario.hpp"
#include "driftwatch/shadow.hpp"
#include "driftwatch/types.hpp"

namespace driftwatch::sim {

/// Produces the event stream one tick at a time. Noise draws depend only on
/// (seed, tick), never on the deployed belief, so replays under different
/// retraining policies share identical outcomes.
class StreamGenerator {
 public:
  virtual ~StreamGenerator() = default;

  /// Records for tick t in emission order (prediction first, then any
  /// outcome records falling due).
  virtual std::vector<StreamRecord> tick(Tick t) = 0;

  /// Replace the deployed belief with a shadow fit (learning-debt retrains).
  virtual void apply_retrain(const shadow::ShadowModel& replacement) = 0;

  /// Replace the deployed belief with the current true regime (calendar and
  /// oracle retrains, which stand in for a full retraining pipeline).
  virtual void refresh_deployed(Tick t) = 0;

  const ScenarioSpec& spec() const { return spec_; }

 protected:
  explicit StreamGenerator(ScenarioSpec spec)
      : spec_(std::move(spec)), rng_(spec_.seed) {}

  ScenarioSpec spec_;
  Rng rng_;
};

std::unique_ptr<StreamGenerator> make_generator(const ScenarioSpec& spec);

/// Full stream as JSONL lines (simulate command / tests).
std::vector<std::string> generate_jsonl(const ScenarioSpec& spec);

}  // namespace driftwatch::sim
