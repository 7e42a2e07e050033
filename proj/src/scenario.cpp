#include "driftwatch/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace driftwatch::sim {

using nlohmann::json;

void ScenarioSpec::validate() const {
  if (name != "stable" && name != "travel" && name != "retail") {
    throw FieldError("scenario.name", "must be stable, travel, or retail");
  }
  if (length < 1) throw FieldError("scenario.length", "must be >= 1");
  if (revert_tick && !shift_tick) {
    throw FieldError("scenario.revert_tick", "needs a shift_tick");
  }
  if (shift_tick && revert_tick) {
    if (!(*shift_tick <= *revert_tick && *revert_tick <= length)) {
      throw FieldError("scenario", "need shift_tick <= revert_tick <= length");
    }
  }
  if (shift_tick && (*shift_tick < 0 || *shift_tick > length)) {
    throw FieldError("scenario.shift_tick", "must lie within the run");
  }
  if (name == "travel") {
    if (travel.lead_grid.empty()) throw FieldError("travel.lead_grid", "must be non-empty");
    if (!(travel.booked_frac_30_pre > 0 && travel.booked_frac_30_pre <= 1) ||
        !(travel.booked_frac_30_post > 0 && travel.booked_frac_30_post <= 1)) {
      throw FieldError("travel.booked_frac_30", "fractions must lie in (0,1]");
    }
    if (!(travel.mean_demand > 0)) throw FieldError("travel.mean_demand", "must be > 0");
  }
  if (name == "retail") {
    if (retail.promo_length < 1 || retail.promo_period <= retail.promo_length) {
      throw FieldError("retail.promo", "need 1 <= promo_length < promo_period");
    }
    if (!(retail.base_level > 0)) throw FieldError("retail.base_level", "must be > 0");
    if (!(retail.noise_log_sd > 0)) throw FieldError("retail.noise_log_sd", "must be > 0");
  }
}

std::string ScenarioSpec::to_json() const {
  json j;
  j["name"] = name;
  j["series"] = series_id;
  j["length"] = length;
  if (shift_tick) j["shift_tick"] = *shift_tick;
  if (revert_tick) j["revert_tick"] = *revert_tick;
  j["seed"] = seed;
  if (name == "stable") {
    j["params"] = {{"level", stable.level},
                   {"seasonal_amplitude", stable.seasonal_amplitude},
                   {"noise_sd", stable.noise_sd},
                   {"period", stable.period}};
  } else if (name == "travel") {
    j["params"] = {{"mean_demand", travel.mean_demand},
                   {"demand_sd", travel.demand_sd},
                   {"lead_grid", travel.lead_grid},
                   {"booked_frac_30_pre", travel.booked_frac_30_pre},
                   {"booked_frac_30_post", travel.booked_frac_30_post}};
  } else {
    j["params"] = {{"base_level", retail.base_level},
                   {"noise_log_sd", retail.noise_log_sd},
                   {"promo_multiplier_pre", retail.promo_multiplier_pre},
                   {"promo_multiplier_post", retail.promo_multiplier_post},
                   {"promo_length", retail.promo_length},
                   {"promo_period", retail.promo_period},
                   {"seasonal_amplitude", retail.seasonal_amplitude},
                   {"period", retail.period}};
  }
  return j.dump(2);
}

ScenarioSpec ScenarioSpec::parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw FieldError("scenario", "not valid JSON");
  }
  ScenarioSpec s;
  if (j.contains("name")) s.name = j["name"].get<std::string>();
  s.series_id = j.value("series", s.name);
  if (j.contains("length")) s.length = j["length"].get<Tick>();
  if (j.contains("shift_tick") && !j["shift_tick"].is_null()) {
    s.shift_tick = j["shift_tick"].get<Tick>();
  }
  if (j.contains("revert_tick") && !j["revert_tick"].is_null()) {
    s.revert_tick = j["revert_tick"].get<Tick>();
  }
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  const json p = j.value("params", json::object());
  if (s.name == "stable") {
    s.stable.level = p.value("level", s.stable.level);
    s.stable.seasonal_amplitude = p.value("seasonal_amplitude", s.stable.seasonal_amplitude);
    s.stable.noise_sd = p.value("noise_sd", s.stable.noise_sd);
    s.stable.period = p.value("period", s.stable.period);
  } else if (s.name == "travel") {
    s.travel.mean_demand = p.value("mean_demand", s.travel.mean_demand);
    s.travel.demand_sd = p.value("demand_sd", s.travel.demand_sd);
    if (p.contains("lead_grid")) {
      s.travel.lead_grid = p["lead_grid"].get<std::vector<std::int64_t>>();
    }
    s.travel.booked_frac_30_pre = p.value("booked_frac_30_pre", s.travel.booked_frac_30_pre);
    s.travel.booked_frac_30_post = p.value("booked_frac_30_post", s.travel.booked_frac_30_post);
  } else if (s.name == "retail") {
    s.retail.base_level = p.value("base_level", s.retail.base_level);
    s.retail.noise_log_sd = p.value("noise_log_sd", s.retail.noise_log_sd);
    s.retail.promo_multiplier_pre =
        p.value("promo_multiplier_pre", s.retail.promo_multiplier_pre);
    s.retail.promo_multiplier_post =
        p.value("promo_multiplier_post", s.retail.promo_multiplier_post);
    s.retail.promo_length = p.value("promo_length", s.retail.promo_length);
    s.retail.promo_period = p.value("promo_period", s.retail.promo_period);
    s.retail.seasonal_amplitude = p.value("seasonal_amplitude", s.retail.seasonal_amplitude);
    s.retail.period = p.value("period", s.retail.period);
  }
  s.validate();
  return s;
}

ScenarioSpec ScenarioSpec::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FieldError("scenario", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

ScenarioSpec ScenarioSpec::stable_default() {
  ScenarioSpec s;
  s.name = "stable";
  s.series_id = "stable";
  s.length = 365;
  return s;
}

ScenarioSpec ScenarioSpec::travel_default() {
  ScenarioSpec s;
  s.name = "travel";
  s.series_id = "travel";
  s.length = 300;
  s.shift_tick = 150;
  return s;
}

ScenarioSpec ScenarioSpec::retail_default() {
  ScenarioSpec s;
  s.name = "retail";
  s.series_id = "retail";
  s.length = 300;
  s.shift_tick = 150;
  return s;
}

ScenarioSpec ScenarioSpec::temporary_default(Tick blip_length) {
  ScenarioSpec s = travel_default();
  s.revert_tick = *s.shift_tick + blip_length;
  return s;
}

Config default_config_for(const ScenarioSpec& spec, const CostModel& costs) {
  Config cfg;
  cfg.costs = costs;
  if (spec.name == "travel") {
    TravelMonitorConfig t;
    t.lead_grid = spec.travel.lead_grid;
    t.booked_frac_30 = spec.travel.booked_frac_30_pre;
    t.mean_demand = spec.travel.mean_demand;
    cfg.travel = std::move(t);
  }
  return cfg;
}

}  // namespace driftwatch::sim
