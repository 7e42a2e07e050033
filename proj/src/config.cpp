#include "driftwatch/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "driftwatch/math.hpp"

namespace driftwatch {

using nlohmann::json;

int WindowsConfig::max() const {
  return std::max({score, coverage, pit, group, divergence, shadow});
}

double TravelMonitorConfig::baseline_fraction(double lead) const {
  return std::pow(booked_frac_30, lead / 30.0);
}

Config::Config() {
  evidence.weights = {
      {"score_crps", 1.0},     {"score_log_loss", 0.0}, {"coverage_gap", 0.5},
      {"pit_deviation", 0.5},  {"group_residual", 1.0}, {"outcome_divergence", 0.5},
      {"lead_divergence", 1.0}, {"shadow_skill", 1.0},  {"shadow_param", 0.0},
  };
}

namespace {

json turbulence_to_json(const std::vector<TurbulenceWindow>& tw) {
  json arr = json::array();
  for (const auto& w : tw) {
    arr.push_back({{"start", w.start}, {"end", w.end}, {"multiplier", w.multiplier}});
  }
  return arr;
}

json config_to_json(const Config& c) {
  json j;
  j["costs"] = {{"churn_cost", c.costs.churn_cost},
                {"bias_cost_rate", c.costs.bias_cost_rate},
                {"retrain_cost", c.costs.retrain_cost},
                {"expected_stale_duration", c.costs.expected_stale_duration}};
  j["windows"] = {{"score", c.windows.score},   {"coverage", c.windows.coverage},
                  {"pit", c.windows.pit},       {"group", c.windows.group},
                  {"divergence", c.windows.divergence}, {"shadow", c.windows.shadow}};
  j["hazard"] = {{"base", c.hazard.base}, {"turbulence", turbulence_to_json(c.hazard.turbulence)}};
  j["bocd"] = {{"r_max", c.bocd.r_max},
               {"recency", c.bocd.recency},
               {"prior_mu", c.bocd.prior_mu},
               {"prior_kappa", c.bocd.prior_kappa},
               {"prior_alpha", c.bocd.prior_alpha},
               {"prior_beta", c.bocd.prior_beta},
               {"input", c.bocd.input},
               {"input_clip", c.bocd.input_clip}};
  j["evidence"] = {{"z0", c.evidence.z0},
                   {"g_max", c.evidence.g_max},
                   {"scale", c.evidence.scale},
                   {"weights", c.evidence.weights}};
  j["scoring"] = {{"log_loss_cap", c.scoring.log_loss_cap},
                  {"coverage_level", c.scoring.coverage_level}};
  j["calibration"] = {{"pit_bins", c.calibration.pit_bins}};
  j["divergence"] = {{"kl_epsilon", c.divergence.kl_epsilon},
                     {"histogram_bins", c.divergence.histogram_bins}};
  j["decision"] = {{"strict_inequality", c.decision.strict_inequality},
                   {"cooldown_ticks", c.decision.cooldown_ticks}};
  j["shadow"] = {{"form", c.shadow.form},
                 {"min_fit", c.shadow.min_fit},
                 {"variance_floor", c.shadow.variance_floor},
                 {"seasonal_period", c.shadow.seasonal_period},
                 {"drift_z", c.shadow.drift_z},
                 {"degrade_z", c.shadow.degrade_z},
                 {"skill_gate", c.shadow.skill_gate}};
  j["baseline"] = {{"quiet_ticks", c.baseline.quiet_ticks},
                   {"sd_floor", c.baseline.sd_floor},
                   {"scale_inflation", c.baseline.scale_inflation}};
  if (c.travel) {
    j["travel"] = {{"lead_grid", c.travel->lead_grid},
                   {"booked_frac_30", c.travel->booked_frac_30},
                   {"mean_demand", c.travel->mean_demand},
                   {"lead_window", c.travel->lead_window}};
  }
  return j;
}

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  template <typename T>
  void get(const json& obj, const char* section, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      fail(std::string(section) + "." + key, "has the wrong type");
    }
  }

  void fail(const std::string& field, const std::string& msg) {
    errors_.push_back(field + ": " + msg);
  }

  void require_positive(const char* field, double v, bool allow_zero = false) {
    if (!(allow_zero ? v >= 0.0 : v > 0.0) || !std::isfinite(v)) {
      fail(field, allow_zero ? "must be >= 0" : "must be > 0");
    }
  }

  const json& root() const { return root_; }
  std::vector<std::string>& errors() { return errors_; }

 private:
  const json& root_;
  std::vector<std::string> errors_;
};

}  // namespace

std::string Config::canonical_text() const { return config_to_json(*this).dump(); }

std::string Config::hash() const { return math::hex64(math::fnv1a64(canonical_text())); }

ConfigError::ConfigError(std::vector<std::string> errors) : errors_(std::move(errors)) {
  std::ostringstream os;
  os << "config invalid (" << errors_.size() << " problem" << (errors_.size() == 1 ? "" : "s")
     << "):";
  for (const auto& e : errors_) os << "\n  - " << e;
  joined_ = os.str();
}

Config parse_config(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError({"config: not valid JSON"});
  if (!j.is_object()) throw ConfigError({"config: must be a JSON object"});

  Config c;
  Reader r(j);

  // Costs are the only mandatory section.
  if (!j.contains("costs") || !j["costs"].is_object()) {
    r.fail("costs", "section is mandatory");
  } else {
    const json& costs = j["costs"];
    if (!costs.contains("churn_cost")) r.fail("costs.churn_cost", "is mandatory");
    if (!costs.contains("bias_cost_rate")) r.fail("costs.bias_cost_rate", "is mandatory");
    r.get(costs, "costs", "churn_cost", c.costs.churn_cost);
    r.get(costs, "costs", "bias_cost_rate", c.costs.bias_cost_rate);
    c.costs.expected_stale_duration = 14.0;
    r.get(costs, "costs", "retrain_cost", c.costs.retrain_cost);
    r.get(costs, "costs", "expected_stale_duration", c.costs.expected_stale_duration);
    r.require_positive("costs.churn_cost", c.costs.churn_cost, true);
    r.require_positive("costs.bias_cost_rate", c.costs.bias_cost_rate, true);
    r.require_positive("costs.retrain_cost", c.costs.retrain_cost, true);
    r.require_positive("costs.expected_stale_duration", c.costs.expected_stale_duration, true);
    if (!(c.costs.bias_cost_rate * c.costs.expected_stale_duration > 0.0)) {
      r.fail("costs", "bias_cost_rate * expected_stale_duration must be > 0");
    }
  }

  if (j.contains("windows")) {
    const json& w = j["windows"];
    r.get(w, "windows", "score", c.windows.score);
    r.get(w, "windows", "coverage", c.windows.coverage);
    r.get(w, "windows", "pit", c.windows.pit);
    r.get(w, "windows", "group", c.windows.group);
    r.get(w, "windows", "divergence", c.windows.divergence);
    r.get(w, "windows", "shadow", c.windows.shadow);
    for (const auto& [name, v] : std::initializer_list<std::pair<const char*, int>>{
             {"windows.score", c.windows.score},
             {"windows.coverage", c.windows.coverage},
             {"windows.pit", c.windows.pit},
             {"windows.group", c.windows.group},
             {"windows.divergence", c.windows.divergence},
             {"windows.shadow", c.windows.shadow}}) {
      if (v < 1) r.fail(name, "must be >= 1");
    }
  }

  if (j.contains("hazard")) {
    const json& h = j["hazard"];
    r.get(h, "hazard", "base", c.hazard.base);
    if (h.contains("turbulence")) {
      if (!h["turbulence"].is_array()) {
        r.fail("hazard.turbulence", "must be an array of {start,end,multiplier}");
      } else {
        for (const auto& tw : h["turbulence"]) {
          TurbulenceWindow w;
          if (!tw.is_object() || !tw.contains("start") || !tw.contains("end") ||
              !tw.contains("multiplier")) {
            r.fail("hazard.turbulence", "entries need start, end, multiplier");
            continue;
          }
          w.start = tw["start"].get<Tick>();
          w.end = tw["end"].get<Tick>();
          w.multiplier = tw["multiplier"].get<double>();
          if (w.end < w.start) r.fail("hazard.turbulence", "end must be >= start");
          if (!(w.multiplier > 0.0)) r.fail("hazard.turbulence.multiplier", "must be > 0");
          c.hazard.turbulence.push_back(w);
        }
      }
    }
  }
  if (!(c.hazard.base > 0.0 && c.hazard.base < 1.0)) {
    r.fail("hazard.base", "must lie in (0,1)");
  }

  if (j.contains("bocd")) {
    const json& b = j["bocd"];
    r.get(b, "bocd", "r_max", c.bocd.r_max);
    r.get(b, "bocd", "recency", c.bocd.recency);
    r.get(b, "bocd", "prior_mu", c.bocd.prior_mu);
    r.get(b, "bocd", "prior_kappa", c.bocd.prior_kappa);
    r.get(b, "bocd", "prior_alpha", c.bocd.prior_alpha);
    r.get(b, "bocd", "prior_beta", c.bocd.prior_beta);
    r.get(b, "bocd", "input", c.bocd.input);
    r.get(b, "bocd", "input_clip", c.bocd.input_clip);
    if (c.bocd.r_max < 2) r.fail("bocd.r_max", "must be >= 2");
    if (c.bocd.recency < 1) r.fail("bocd.recency", "must be >= 1");
    if (!(c.bocd.prior_kappa > 0 && c.bocd.prior_alpha > 0 && c.bocd.prior_beta > 0)) {
      r.fail("bocd", "prior kappa, alpha, beta must be > 0");
    }
    if (c.bocd.input != "crps" && c.bocd.input != "log_loss" && c.bocd.input != "pit_z") {
      r.fail("bocd.input", "must be pit_z, crps, or log_loss");
    }
  }

  if (j.contains("evidence")) {
    const json& e = j["evidence"];
    r.get(e, "evidence", "z0", c.evidence.z0);
    r.get(e, "evidence", "g_max", c.evidence.g_max);
    r.get(e, "evidence", "scale", c.evidence.scale);
    if (e.contains("weights")) {
      if (!e["weights"].is_object()) {
        r.fail("evidence.weights", "must map signal ids to non-negative weights");
      } else {
        for (auto it = e["weights"].begin(); it != e["weights"].end(); ++it) {
          if (!it.value().is_number() || it.value().get<double>() < 0.0) {
            r.fail("evidence.weights." + it.key(), "must be a non-negative number");
            continue;
          }
          c.evidence.weights[it.key()] = it.value().get<double>();
        }
      }
    }
    if (!(c.evidence.g_max >= 0)) r.fail("evidence.g_max", "must be >= 0");
    if (!(c.evidence.scale >= 0)) r.fail("evidence.scale", "must be >= 0");
  }

  if (j.contains("scoring")) {
    const json& s = j["scoring"];
    r.get(s, "scoring", "log_loss_cap", c.scoring.log_loss_cap);
    r.get(s, "scoring", "coverage_level", c.scoring.coverage_level);
    if (!(c.scoring.log_loss_cap > 0)) r.fail("scoring.log_loss_cap", "must be > 0");
    if (!(c.scoring.coverage_level > 0 && c.scoring.coverage_level < 1)) {
      r.fail("scoring.coverage_level", "must lie in (0,1)");
    }
  }

  if (j.contains("calibration")) {
    r.get(j["calibration"], "calibration", "pit_bins", c.calibration.pit_bins);
    if (c.calibration.pit_bins < 2) r.fail("calibration.pit_bins", "must be >= 2");
  }

  if (j.contains("divergence")) {
    const json& d = j["divergence"];
    r.get(d, "divergence", "kl_epsilon", c.divergence.kl_epsilon);
    r.get(d, "divergence", "histogram_bins", c.divergence.histogram_bins);
    if (!(c.divergence.kl_epsilon > 0)) r.fail("divergence.kl_epsilon", "must be > 0");
    if (c.divergence.histogram_bins < 2) r.fail("divergence.histogram_bins", "must be >= 2");
  }

  if (j.contains("decision")) {
    const json& d = j["decision"];
    r.get(d, "decision", "strict_inequality", c.decision.strict_inequality);
    r.get(d, "decision", "cooldown_ticks", c.decision.cooldown_ticks);
    if (c.decision.cooldown_ticks < 0) r.fail("decision.cooldown_ticks", "must be >= 0");
  }

  if (j.contains("shadow")) {
    const json& s = j["shadow"];
    r.get(s, "shadow", "form", c.shadow.form);
    r.get(s, "shadow", "min_fit", c.shadow.min_fit);
    r.get(s, "shadow", "variance_floor", c.shadow.variance_floor);
    r.get(s, "shadow", "seasonal_period", c.shadow.seasonal_period);
    r.get(s, "shadow", "drift_z", c.shadow.drift_z);
    r.get(s, "shadow", "degrade_z", c.shadow.degrade_z);
    r.get(s, "shadow", "skill_gate", c.shadow.skill_gate);
    static const char* kForms[] = {"auto",   "mean",             "seasonal_mean",
                                   "linear", "promo_multiplier", "booking_curve"};
    bool ok = false;
    for (const char* f : kForms) ok = ok || c.shadow.form == f;
    if (!ok) r.fail("shadow.form", "unknown form");
    if (c.shadow.min_fit < 2) r.fail("shadow.min_fit", "must be >= 2");
    if (!(c.shadow.variance_floor > 0)) r.fail("shadow.variance_floor", "must be > 0");
  }

  if (j.contains("baseline")) {
    const json& b = j["baseline"];
    r.get(b, "baseline", "quiet_ticks", c.baseline.quiet_ticks);
    r.get(b, "baseline", "sd_floor", c.baseline.sd_floor);
    r.get(b, "baseline", "scale_inflation", c.baseline.scale_inflation);
    if (!(c.baseline.sd_floor > 0)) r.fail("baseline.sd_floor", "must be > 0");
    if (!(c.baseline.scale_inflation >= 1.0)) {
      r.fail("baseline.scale_inflation", "must be >= 1");
    }
  }
  if (c.baseline.quiet_ticks < c.windows.max()) {
    r.fail("baseline.quiet_ticks", "must be >= the largest window size");
  }

  if (j.contains("travel")) {
    const json& t = j["travel"];
    TravelMonitorConfig tc;
    if (t.contains("lead_grid")) {
      for (const auto& v : t["lead_grid"]) tc.lead_grid.push_back(v.get<std::int64_t>());
    }
    r.get(t, "travel", "booked_frac_30", tc.booked_frac_30);
    r.get(t, "travel", "mean_demand", tc.mean_demand);
    r.get(t, "travel", "lead_window", tc.lead_window);
    if (tc.lead_window < 1) r.fail("travel.lead_window", "must be >= 1");
    if (tc.lead_grid.empty()) r.fail("travel.lead_grid", "must list at least one lead");
    for (auto lead : tc.lead_grid) {
      if (lead < 0) r.fail("travel.lead_grid", "leads must be >= 0");
    }
    if (!(tc.booked_frac_30 > 0 && tc.booked_frac_30 <= 1)) {
      r.fail("travel.booked_frac_30", "must lie in (0,1]");
    }
    if (!(tc.mean_demand > 0)) r.fail("travel.mean_demand", "must be > 0");
    c.travel = std::move(tc);
  }

  if (!r.errors().empty()) throw ConfigError(std::move(r.errors()));
  return c;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot open " + path});
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

}  // namespace driftwatch
