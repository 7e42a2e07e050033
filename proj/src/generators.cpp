#include "driftwatch/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>

#include "driftwatch/ingest.hpp"

namespace driftwatch::sim {

namespace {

double fourier_mean(double intercept, double a_sin, double a_cos, Tick t, int period) {
  if (period <= 0) return intercept;
  const double w = 2.0 * M_PI * static_cast<double>(t) / static_cast<double>(period);
  return intercept + a_sin * std::sin(w) + a_cos * std::cos(w);
}

class StableGenerator : public StreamGenerator {
 public:
  explicit StableGenerator(ScenarioSpec spec) : StreamGenerator(std::move(spec)) {
    deployed_ = {spec_.stable.level, spec_.stable.seasonal_amplitude, 0.0};
    deployed_sd_ = spec_.stable.noise_sd;
  }

  std::vector<StreamRecord> tick(Tick t) override {
    const double truth_mean = fourier_mean(spec_.stable.level, spec_.stable.seasonal_amplitude,
                                           0.0, t, spec_.stable.period);
    const double outcome = truth_mean + rng_.normal(0.0, spec_.stable.noise_sd);
    PredictionEvent ev;
    ev.timestamp = t;
    ev.series_id = spec_.series_id;
    const double pred_mean =
        fourier_mean(deployed_[0], deployed_[1], deployed_[2], t, spec_.stable.period);
    ev.prediction = PredictiveDistribution(Gaussian{pred_mean, deployed_sd_});
    ev.outcome = outcome;
    return {StreamRecord{std::move(ev)}};
  }

  void apply_retrain(const shadow::ShadowModel& m) override {
    if ((m.form == shadow::ShadowForm::seasonal_mean && m.params.size() >= 3)) {
      deployed_ = {m.params[0], m.params[1], m.params[2]};
    } else if (!m.params.empty()) {
      deployed_ = {m.params[0], 0.0, 0.0};
    }
    deployed_sd_ = std::max(m.residual_sd, 1e-3);
  }

  void refresh_deployed(Tick) override {
    deployed_ = {spec_.stable.level, spec_.stable.seasonal_amplitude, 0.0};
    deployed_sd_ = spec_.stable.noise_sd;
  }

 private:
  std::array<double, 3> deployed_{};  // intercept, sin, cos
  double deployed_sd_ = 1.0;
};

class TravelGenerator : public StreamGenerator {
 public:
  explicit TravelGenerator(ScenarioSpec spec) : StreamGenerator(std::move(spec)) {
    refresh_deployed(0);
  }

  std::vector<StreamRecord> tick(Tick t) override {
    const auto& p = spec_.travel;
    std::vector<StreamRecord> out;

    const std::size_t gi = static_cast<std::size_t>(t) % p.lead_grid.size();
    const std::int64_t lead = p.lead_grid[gi];
    const double frac_true = true_fraction(lead, t);
    const double demand = std::max(0.1, rng_.normal(p.mean_demand, p.demand_sd));
    const double otb_noise_sd = std::sqrt(std::max(demand * frac_true * (1.0 - frac_true), 1e-6));
    const double otb = std::max(0.0, demand * frac_true + rng_.normal(0.0, otb_noise_sd));

    PredictionEvent ev;
    ev.timestamp = t;
    ev.series_id = spec_.series_id;
    ev.lead_time = lead;
    const double frac_dep = std::clamp(deployed_fractions_[gi], 1e-3, 1.0);
    const double pred_mean = otb / frac_dep;
    const double pred_sd =
        std::max(deployed_sd_floor_,
                 std::sqrt(std::max(p.mean_demand * (1.0 - frac_dep) / frac_dep, 1e-6)));
    ev.prediction = PredictiveDistribution(Gaussian{pred_mean, pred_sd});
    out.emplace_back(std::move(ev));

    // Finals observed once the arrival date passes; several forecasts can
    // share an arrival date.
    in_flight_[t + lead].emplace_back(t, demand);
    auto due = in_flight_.find(t);
    if (due != in_flight_.end()) {
      for (const auto& [pred_ts, final_demand] : due->second) {
        OutcomeRecord rec;
        rec.timestamp = pred_ts;
        rec.series_id = spec_.series_id;
        rec.outcome = final_demand;
        out.emplace_back(std::move(rec));
      }
      in_flight_.erase(due);
    }
    return out;
  }

  void apply_retrain(const shadow::ShadowModel& m) override {
    if (m.form != shadow::ShadowForm::booking_curve) return;
    for (std::size_t i = 0; i < spec_.travel.lead_grid.size(); ++i) {
      for (std::size_t j = 0; j < m.leads.size(); ++j) {
        if (m.leads[j] == spec_.travel.lead_grid[i]) {
          deployed_fractions_[i] = std::clamp(m.fractions[j], 1e-3, 1.0);
        }
      }
    }
  }

  void refresh_deployed(Tick t) override {
    const auto& p = spec_.travel;
    deployed_fractions_.resize(p.lead_grid.size());
    for (std::size_t i = 0; i < p.lead_grid.size(); ++i) {
      deployed_fractions_[i] = true_fraction(p.lead_grid[i], t);
    }
  }

 private:
  double true_fraction(std::int64_t lead, Tick t) const {
    const double frac30 =
        spec_.shifted(t) ? spec_.travel.booked_frac_30_post : spec_.travel.booked_frac_30_pre;
    return std::pow(frac30, static_cast<double>(lead) / 30.0);
  }

  std::vector<double> deployed_fractions_;
  std::map<Tick, std::vector<std::pair<Tick, double>>> in_flight_;  // arrival -> (pred ts, final)
  double deployed_sd_floor_ = 1e-3;
};

class RetailGenerator : public StreamGenerator {
 public:
  explicit RetailGenerator(ScenarioSpec spec) : StreamGenerator(std::move(spec)) {
    refresh_deployed(0);
  }

  std::vector<StreamRecord> tick(Tick t) override {
    const auto& p = spec_.retail;
    const bool promo = (t % p.promo_period) < p.promo_length;
    const double seasonal = seasonal_factor(t);
    const double mult = spec_.shifted(t) ? p.promo_multiplier_post : p.promo_multiplier_pre;
    const double base = spec_.shifted(t) ? post_shift_base() : p.base_level;
    const double mean_true = base * seasonal * (promo ? mult : 1.0);
    const double s = p.noise_log_sd;
    const double outcome = mean_true * rng_.lognormal(-0.5 * s * s, s);

    PredictionEvent ev;
    ev.timestamp = t;
    ev.series_id = spec_.series_id;
    ev.groups["promo"] = promo ? "on" : "off";
    double pred_mean;
    double pred_sd;
    if (deployed_model_) {
      shadow::ShadowObservation obs;
      obs.tick = t;
      obs.promo = promo;
      const Gaussian g = deployed_model_->predict(obs);
      pred_mean = g.mu;
      pred_sd = g.sigma;
    } else {
      pred_mean = p.base_level * seasonal * (promo ? p.promo_multiplier_pre : 1.0);
      pred_sd = pred_mean * std::sqrt(std::exp(s * s) - 1.0);
    }
    ev.prediction = PredictiveDistribution(Gaussian{pred_mean, std::max(pred_sd, 1e-6)});
    ev.outcome = outcome;
    return {StreamRecord{std::move(ev)}};
  }

  void apply_retrain(const shadow::ShadowModel& m) override {
    if (m.form == shadow::ShadowForm::promo_multiplier) {
      deployed_model_ = m;
    }
  }

  void refresh_deployed(Tick t) override {
    // A full retrain learns the current regime. Pre-shift the native
    // closed-form belief is exact; post-shift build the equivalent
    // log-linear model.
    const auto& p = spec_.retail;
    if (!spec_.shifted(t)) {
      deployed_model_.reset();
      return;
    }
    shadow::ShadowModel m;
    m.form = shadow::ShadowForm::promo_multiplier;
    const double s = p.noise_log_sd;
    // log demand = ln(base) - s^2/2 + ln(mult) * promo + seasonal fourier
    m.params = {std::log(post_shift_base()) - 0.5 * s * s,
                std::log(p.promo_multiplier_post), 0.0, 0.0};
    if (p.seasonal_amplitude > 0.0) {
      // ln(1 + a sin w) ~ a sin w for small a.
      m.params[2] = p.seasonal_amplitude;
    }
    m.seasonal_period = p.period;
    m.residual_sd = s;
    deployed_model_ = std::move(m);
  }

 private:
  double seasonal_factor(Tick t) const {
    const auto& p = spec_.retail;
    if (p.period <= 0) return 1.0;
    const double w = 2.0 * M_PI * static_cast<double>(t) / static_cast<double>(p.period);
    return 1.0 + p.seasonal_amplitude * std::sin(w);
  }

  double post_shift_base() const {
    const auto& p = spec_.retail;
    const double f_on =
        static_cast<double>(p.promo_length) / static_cast<double>(p.promo_period);
    const double pre = (1.0 - f_on) + f_on * p.promo_multiplier_pre;
    const double post = (1.0 - f_on) + f_on * p.promo_multiplier_post;
    return p.base_level * pre / post;
  }

  std::optional<shadow::ShadowModel> deployed_model_;
};

}  // namespace

std::unique_ptr<StreamGenerator> make_generator(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.name == "stable") return std::make_unique<StableGenerator>(spec);
  if (spec.name == "travel") return std::make_unique<TravelGenerator>(spec);
  return std::make_unique<RetailGenerator>(spec);
}

std::vector<std::string> generate_jsonl(const ScenarioSpec& spec) {
  auto gen = make_generator(spec);
  std::vector<std::string> lines;
  for (Tick t = 0; t < spec.length; ++t) {
    for (const auto& rec : gen->tick(t)) lines.push_back(to_jsonl(rec));
  }
  return lines;
}

}  // namespace driftwatch::sim
