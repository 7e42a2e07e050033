#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "driftwatch/config.hpp"
#include "driftwatch/types.hpp"

namespace driftwatch::sim {

struct StableParams {
  double level = 100.0;
  double seasonal_amplitude = 5.0;
  double noise_sd = 8.0;
  int period = 7;
};

struct TravelParams {
  double mean_demand = 45.0;
  double demand_sd = 6.0;
  std::vector<std::int64_t> lead_grid = {7, 14, 21, 28, 35, 42};
  double booked_frac_30_pre = 0.6;
  double booked_frac_30_post = 0.4;
};

struct RetailParams {
  double base_level = 100.0;
  double noise_log_sd = 0.08;
  double promo_multiplier_pre = 2.5;
  double promo_multiplier_post = 1.6;
  int promo_length = 5;
  int promo_period = 25;
  double seasonal_amplitude = 0.05;
  int period = 7;
};

/// A synthetic scenario: which generator, how long, where the regime
/// shifts, and the seed that makes the stream reproducible.
struct ScenarioSpec {
  std::string name = "stable";  // stable | travel | retail
  std::string series_id;
  Tick length = 365;
  std::optional<Tick> shift_tick;
  std::optional<Tick> revert_tick;  // temporary shifts revert here
  std::uint64_t seed = 1;

  StableParams stable;
  TravelParams travel;
  RetailParams retail;

  /// True regime at tick t (shifted between shift_tick and revert_tick).
  bool shifted(Tick t) const {
    if (!shift_tick || t < *shift_tick) return false;
    if (revert_tick && t >= *revert_tick) return false;
    return true;
  }

  void validate() const;

  std::string to_json() const;
  static ScenarioSpec parse(const std::string& text);
  static ScenarioSpec load_file(const std::string& path);

  /// Canned scenarios matching the shipped scenario files.
  static ScenarioSpec stable_default();
  static ScenarioSpec travel_default();
  static ScenarioSpec retail_default();
  static ScenarioSpec temporary_default(Tick blip_length = 5);
};

/// Engine config tuned for a scenario (travel monitor block, shadow form)
/// with the given cost model.
Config default_config_for(const ScenarioSpec& spec, const CostModel& costs);

}  // namespace driftwatch::sim
