#include "driftwatch/engine.hpp"

#include <algorithm>
#include <cmath>

#include "driftwatch/math.hpp"

namespace driftwatch {

namespace {

constexpr const char* kTickScoreBaseline = "tick_score";

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

const std::vector<std::string>& MonitorEngine::signal_ids() {
  static const std::vector<std::string> ids = {
      "score_crps",     "score_log_loss",     "coverage_gap",
      "pit_deviation",  "group_residual",     "outcome_divergence",
      "lead_divergence", "shadow_skill",      "shadow_param",
      "shadow_score"};
  return ids;
}

MonitorEngine::MonitorEngine(Config config)
    : config_(std::move(config)), config_hash_(config_.hash()) {}

SeriesState& MonitorEngine::series(const std::string& series_id) {
  auto it = series_.find(series_id);
  if (it != series_.end()) return it->second;
  SeriesState st;
  st.crps_window = scoring::ScoreWindow(static_cast<std::size_t>(config_.windows.score));
  st.log_loss_window = scoring::ScoreWindow(static_cast<std::size_t>(config_.windows.score));
  st.coverage = calibration::CoverageTracker(config_.scoring.coverage_level,
                                             static_cast<std::size_t>(config_.windows.coverage));
  st.pit = calibration::PitHistogram(config_.calibration.pit_bins,
                                     static_cast<std::size_t>(config_.windows.pit));
  st.groups = calibration::GroupResidualTable(static_cast<std::size_t>(config_.windows.group));
  if (config_.travel) {
    st.deployed_fractions.reserve(config_.travel->lead_grid.size());
    for (auto lead : config_.travel->lead_grid) {
      st.deployed_fractions.push_back(
          config_.travel->baseline_fraction(static_cast<double>(lead)));
    }
  }
  return series_.emplace(series_id, std::move(st)).first->second;
}

const SeriesState* MonitorEngine::find_series(const std::string& series_id) const {
  auto it = series_.find(series_id);
  return it == series_.end() ? nullptr : &it->second;
}

std::vector<policy::RetrainDecision> MonitorEngine::ingest(const StreamRecord& record) {
  std::vector<policy::RetrainDecision> out;
  if (std::holds_alternative<PredictionEvent>(record)) {
    handle_prediction(std::get<PredictionEvent>(record), out, /*allow_finalize=*/true);
  } else {
    const auto& rec = std::get<OutcomeRecord>(record);
    SeriesState& st = series(rec.series_id);
    const Tick attribution = st.has_open_tick ? st.open_tick : rec.timestamp;
    handle_outcome(st, rec.timestamp, rec.outcome, attribution);
  }
  return out;
}

std::vector<policy::RetrainDecision> MonitorEngine::ingest_line(std::string_view line) {
  return ingest(parse_record(line));
}

void MonitorEngine::ingest_open(const StreamRecord& record) {
  if (std::holds_alternative<PredictionEvent>(record)) {
    std::vector<policy::RetrainDecision> sink;
    handle_prediction(std::get<PredictionEvent>(record), sink, /*allow_finalize=*/false);
  } else {
    const auto& rec = std::get<OutcomeRecord>(record);
    SeriesState& st = series(rec.series_id);
    const Tick attribution = st.has_open_tick ? st.open_tick : rec.timestamp;
    handle_outcome(st, rec.timestamp, rec.outcome, attribution);
  }
}

std::optional<policy::RetrainDecision> MonitorEngine::finalize_series(
    const std::string& series_id) {
  auto it = series_.find(series_id);
  if (it == series_.end() || !it->second.has_open_tick) return std::nullopt;
  return finalize_tick(it->second, series_id);
}

std::vector<policy::RetrainDecision> MonitorEngine::finish() {
  std::vector<policy::RetrainDecision> out;
  for (auto& [id, st] : series_) {
    if (st.has_open_tick) out.push_back(finalize_tick(st, id));
  }
  return out;
}

void MonitorEngine::handle_prediction(const PredictionEvent& event,
                                      std::vector<policy::RetrainDecision>& out,
                                      bool allow_finalize) {
  event.prediction.validate();
  SeriesState& st = series(event.series_id);
  if (st.any_pred && event.timestamp <= st.last_pred_ts) {
    throw FieldError("ts", "non-monotone timestamp for series " + event.series_id);
  }
  if (st.has_open_tick && event.timestamp > st.open_tick && allow_finalize) {
    out.push_back(finalize_tick(st, event.series_id));
  }
  st.any_pred = true;
  st.last_pred_ts = event.timestamp;
  st.has_open_tick = true;
  st.open_tick = event.timestamp;

  SeriesState::Pending pending;
  pending.dist = event.prediction;
  pending.groups = event.groups;
  pending.lead = event.lead_time;
  pending.epoch = st.epoch;

  // Lag-free booking-curve observation: recover on-the-books volume from the
  // deployed pickup forecast and turn it into a booked-fraction sample.
  std::optional<double> booked_fraction;
  std::optional<double> on_the_books;
  if (config_.travel && event.lead_time) {
    const auto& grid = config_.travel->lead_grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] == *event.lead_time) {
        const double frac_dep = st.deployed_fractions[i];
        const double otb = event.prediction.mean() * frac_dep;
        const double frac_obs =
            std::clamp(otb / config_.travel->mean_demand, 0.0, 1.5);
        auto& ring = st.lead_rings[grid[i]];
        ring.push_back(frac_obs);
        const std::size_t cap = std::max<std::size_t>(
            1, static_cast<std::size_t>(config_.travel->lead_window) / grid.size());
        while (ring.size() > cap) ring.pop_front();
        booked_fraction = frac_obs;
        on_the_books = otb;
        break;
      }
    }
  }

  // Shadow window entry (outcome filled in when it arrives).
  shadow::ShadowObservation obs;
  obs.tick = event.timestamp;
  obs.pred_mean = event.prediction.mean();
  {
    const auto [lo, hi] = event.prediction.central_interval(0.6827);
    obs.pred_sd = std::max((hi - lo) / 2.0, 1e-9);
  }
  auto promo_it = event.groups.find("promo");
  if (promo_it != event.groups.end()) obs.promo = promo_it->second == "on";
  obs.lead = event.lead_time;
  obs.booked_fraction = booked_fraction;
  obs.on_the_books = on_the_books;
  if (event.outcome) obs.outcome = event.outcome;
  st.shadow_window.push_back(std::move(obs));
  while (st.shadow_window.size() > static_cast<std::size_t>(config_.windows.shadow)) {
    st.shadow_window.pop_front();
  }

  if (event.outcome) {
    score_outcome(st, pending, *event.outcome, event.timestamp);
  } else {
    st.pending.emplace(event.timestamp, std::move(pending));
  }
}

void MonitorEngine::handle_outcome(SeriesState& st, Tick key, double outcome,
                                   Tick attribution_tick) {
  if (!std::isfinite(outcome)) throw FieldError("outcome", "must be finite");
  auto it = st.pending.find(key);
  if (it == st.pending.end()) {
    throw FieldError("outcome", "no pending prediction at ts " + std::to_string(key));
  }
  const SeriesState::Pending pending = it->second;
  st.pending.erase(it);
  if (pending.epoch != st.epoch) return;  // prediction made by a retired model
  // Attach to the shadow window entry if it is still retained.
  for (auto& obs : st.shadow_window) {
    if (obs.tick == key) {
      obs.outcome = outcome;
      break;
    }
  }
  score_outcome(st, pending, outcome, attribution_tick);
}

void MonitorEngine::score_outcome(SeriesState& st, const SeriesState::Pending& pending,
                                  double outcome, Tick tick) {
  const double crps_v = scoring::crps(pending.dist, outcome);
  const double ll_v = scoring::log_loss(pending.dist, outcome, config_.scoring.log_loss_cap);
  st.crps_window.push(tick, crps_v);
  st.log_loss_window.push(tick, ll_v);
  st.tick_crps.push_back(crps_v);
  st.tick_log_loss.push_back(ll_v);

  st.coverage.update(pending.dist, outcome);
  const double pit = calibration::pit_value(pending.dist, outcome);
  st.pit.push(pit);
  st.tick_pit_z.push_back(math::normal_quantile(std::clamp(pit, 1e-12, 1.0 - 1e-12)));

  const double residual = outcome - pending.dist.mean();
  if (!pending.groups.empty()) {
    PredictionEvent ev;
    ev.groups = pending.groups;
    st.groups.update(ev, residual);
    if (!st.warmed) {
      for (const auto& [dim, value] : pending.groups) {
        st.group_warmup_residuals[dim + "=" + value].push_back(residual);
      }
    }
  }

  st.recent_outcomes.push_back(outcome);
  while (st.recent_outcomes.size() > static_cast<std::size_t>(config_.windows.divergence)) {
    st.recent_outcomes.pop_front();
  }
  if (!st.warmed && st.baseline_outcomes.size() < 4096) {
    st.baseline_outcomes.push_back(outcome);
  }
}

shadow::ShadowForm MonitorEngine::effective_form(const SeriesState& st) const {
  if (config_.shadow.form != "auto") return shadow::parse_form(config_.shadow.form);
  if (config_.travel && !st.lead_rings.empty()) return shadow::ShadowForm::booking_curve;
  for (const auto& obs : st.shadow_window) {
    if (obs.promo) return shadow::ShadowForm::promo_multiplier;
  }
  return config_.shadow.seasonal_period > 0 ? shadow::ShadowForm::seasonal_mean
                                            : shadow::ShadowForm::mean;
}

void MonitorEngine::refit_shadow(SeriesState& st) {
  const shadow::ShadowForm form = effective_form(st);
  std::vector<shadow::ShadowObservation> window(st.shadow_window.begin(),
                                                st.shadow_window.end());
  try {
    shadow::ShadowModel model = shadow::shadow_refit(window, form, config_.shadow);
    std::optional<shadow::ShadowModel> reference;
    if (form == shadow::ShadowForm::booking_curve && config_.travel) {
      shadow::ShadowModel ref;
      ref.form = shadow::ShadowForm::booking_curve;
      ref.leads = config_.travel->lead_grid;
      ref.fractions = st.deployed_fractions;
      reference = std::move(ref);
    }
    st.last_disagreement = shadow::disagreement(window, model, reference);
    st.last_shadow = std::move(model);
    st.shadow_ready = true;
  } catch (const FieldError&) {
    st.shadow_ready = false;  // below minimum fit size; signals stay absent
  }
}

std::map<std::string, std::optional<double>> MonitorEngine::signal_raws(SeriesState& st) {
  std::map<std::string, std::optional<double>> raws;
  for (const auto& id : signal_ids()) raws[id] = std::nullopt;

  if (auto m = st.crps_window.mean()) raws["score_crps"] = *m;
  if (auto m = st.log_loss_window.mean()) raws["score_log_loss"] = *m;
  if (auto cov = st.coverage.empirical()) {
    raws["coverage_gap"] = st.coverage.nominal_level() - *cov;  // undercoverage positive
  }
  if (auto dev = calibration::calibration_deviation(st.pit)) raws["pit_deviation"] = *dev;

  // The pooled group signal is a window-internal t statistic, so it exists
  // during warm-up and its quiet baseline can be learned like any other.
  if (!st.groups.residuals().empty()) {
    double worst = 0.0;
    bool any = false;
    for (const auto& [label, ring] : st.groups.residuals()) {
      const std::size_t n = ring.size();
      if (n < 4) continue;
      double mean = 0.0;
      for (double r : ring) mean += r;
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (double r : ring) ss += (r - mean) * (r - mean);
      const double sd = std::sqrt(std::max(ss / static_cast<double>(n - 1), 1e-12));
      const double t_stat = mean / (sd / std::sqrt(static_cast<double>(n)));
      worst = std::max(worst, std::fabs(t_stat));
      any = true;
    }
    if (any) raws["group_residual"] = worst;
  }
  st.last_group_gaps.clear();
  if (!st.groups.residuals().empty() && !st.group_baselines.empty()) {
    st.last_group_gaps = calibration::group_gap(st.groups, st.group_baselines, 3.0);
  }

  // Outcome-distribution drift: recent window against the training-era
  // sample. During warm-up the comparison set excludes the recent window so
  // the statistic has the same disjoint character it will have live.
  {
    const std::size_t recent_n = st.recent_outcomes.size();
    std::vector<double> base;
    if (st.baseline_frozen) {
      base = st.baseline_outcomes;
    } else if (st.baseline_outcomes.size() > recent_n) {
      base.assign(st.baseline_outcomes.begin(),
                  st.baseline_outcomes.end() - static_cast<std::ptrdiff_t>(recent_n));
    }
    if (base.size() >= 8 && recent_n >= 8) {
      using divergence::EmpiricalDistribution;
      const auto baseline = EmpiricalDistribution::from_samples(
          std::move(base), EmpiricalDistribution::Provenance::baseline);
      const auto recent = EmpiricalDistribution::from_samples(
          std::vector<double>(st.recent_outcomes.begin(), st.recent_outcomes.end()),
          EmpiricalDistribution::Provenance::recent);
      raws["outcome_divergence"] = divergence::wasserstein1(baseline, recent);
    }
  }

  if (config_.travel && !st.lead_rings.empty()) {
    divergence::BookedCurve baseline, recent;
    for (std::size_t i = 0; i < config_.travel->lead_grid.size(); ++i) {
      const auto lead = config_.travel->lead_grid[i];
      auto it = st.lead_rings.find(lead);
      if (it == st.lead_rings.end() || it->second.empty()) continue;
      baseline.leads.push_back(static_cast<double>(lead));
      baseline.fractions.push_back(st.deployed_fractions[i]);
      double s = 0.0;
      for (double v : it->second) s += v;
      recent.leads.push_back(static_cast<double>(lead));
      recent.fractions.push_back(s / static_cast<double>(it->second.size()));
    }
    if (auto d = divergence::leadtime_divergence(baseline, recent)) {
      raws["lead_divergence"] = *d;
    }
  }

  if (st.shadow_ready && st.last_shadow) {
    if (st.last_disagreement.scored > 0) {
      raws["shadow_skill"] = st.last_disagreement.skill_differential;
      raws["shadow_score"] = st.last_shadow->in_window_mean_score;
    }
    raws["shadow_param"] = st.last_disagreement.parameter_distance;
  }
  return raws;
}

void MonitorEngine::complete_warmup(SeriesState& st) {
  for (const auto& [id, hist] : st.warmup_history) {
    if (hist.size() >= 8) {
      st.baselines[id] = evidence::quiet_baseline_fit(hist, config_.baseline.sd_floor);
    }
  }
  for (const auto& [label, residuals] : st.group_warmup_residuals) {
    if (residuals.size() < 8) continue;
    calibration::GroupBaseline gb;
    gb.mean = math::median(residuals);
    gb.sd = std::max(math::mad_scale(residuals), config_.baseline.sd_floor);
    st.group_baselines[label] = gb;
  }
  // Freeze the training-era outcome sample, keeping it disjoint from the
  // rolling recent window at the moment of freezing.
  if (st.baseline_outcomes.size() > st.recent_outcomes.size()) {
    st.baseline_outcomes.resize(st.baseline_outcomes.size() - st.recent_outcomes.size());
  }
  st.baseline_frozen = true;
  bocd::NormalGammaPrior prior{config_.bocd.prior_mu, config_.bocd.prior_kappa,
                               config_.bocd.prior_alpha, config_.bocd.prior_beta};
  st.run_length =
      bocd::RunLengthPosterior::stationary(prior, config_.hazard.base, config_.bocd.r_max);
  st.bocd_p = bocd::shift_probability(*st.run_length, config_.bocd.recency);
  st.warmed = true;
}

policy::RetrainDecision MonitorEngine::finalize_tick(SeriesState& st,
                                                     const std::string& series_id) {
  const Tick tick = st.open_tick;
  refit_shadow(st);
  auto raws = signal_raws(st);

  std::optional<double> tick_score;
  const auto& acc = config_.bocd.input == "log_loss" ? st.tick_log_loss
                    : config_.bocd.input == "crps"   ? st.tick_crps
                                                     : st.tick_pit_z;
  if (!acc.empty()) tick_score = mean_of(acc);

  ++st.ticks_seen;
  policy::RetrainDecision decision;
  decision.tick = tick;
  decision.series_id = series_id;
  decision.config_hash = config_hash_;
  decision.threshold = policy::threshold(config_.costs);
  decision.churn_cost = config_.costs.churn_cost;

  if (!st.warmed) {
    for (const auto& [id, v] : raws) {
      if (v) st.warmup_history[id].push_back(*v);
    }
    if (tick_score) st.warmup_history[kTickScoreBaseline].push_back(*tick_score);
    if (st.ticks_seen >= config_.baseline.quiet_ticks) complete_warmup(st);
    decision.flags.push_back("warmup");
    decision.failure_mode = shadow::failure_mode_name(shadow::FailureMode::unknown);
    if (decision.threshold > 1.0) decision.flags.push_back("unreachable_threshold");
  } else {
    // Changepoint update on the standardized per-tick score.
    if (tick_score) {
      double x = *tick_score;
      auto bit = st.baselines.find(kTickScoreBaseline);
      if (bit != st.baselines.end()) {
        x = (x - bit->second.mean) / bit->second.sd;
      }
      x = std::clamp(x, -config_.bocd.input_clip, config_.bocd.input_clip);
      st.run_length = bocd::bocd_update(*st.run_length, x,
                                        bocd::effective_hazard(config_.hazard, tick));
      st.bocd_p = bocd::shift_probability(*st.run_length, config_.bocd.recency);
    }

    std::vector<evidence::SignalReading> readings;
    for (const auto& id : signal_ids()) {
      evidence::SignalReading r;
      r.signal_id = id;
      r.raw = raws[id];
      auto wit = config_.evidence.weights.find(id);
      r.weight = wit == config_.evidence.weights.end() ? 0.0 : wit->second;
      auto bit = st.baselines.find(id);
      if (r.raw && bit != st.baselines.end() && !bit->second.degenerate) {
        r.baseline_mean = bit->second.mean;
        r.baseline_sd = bit->second.sd * config_.baseline.scale_inflation;
        r.z = (*r.raw - r.baseline_mean) / r.baseline_sd;
      } else {
        if (bit != st.baselines.end()) {
          r.baseline_mean = bit->second.mean;
          r.baseline_sd = bit->second.sd;
        }
        r.degenerate_baseline = true;
        r.z = 0.0;
      }
      readings.push_back(std::move(r));
    }

    const double pooled = evidence::pool_evidence(readings, st.bocd_p, config_.evidence);

    shadow::TrendInputs trends;
    for (const auto& r : readings) {
      if (r.degenerate_baseline) continue;
      if (r.signal_id == "score_crps") trends.deployed_z = r.z;
      if (r.signal_id == "shadow_score") trends.shadow_z = r.z;
      if (r.signal_id == "shadow_skill") trends.skill_z = r.z;
    }
    const shadow::FailureMode mode = shadow::classify_failure_mode(trends, config_.shadow);

    policy::RetrainDecision verdict = policy::decide(pooled, config_.costs, config_.decision);
    verdict.tick = tick;
    verdict.series_id = series_id;
    verdict.config_hash = config_hash_;
    verdict.bocd_probability = st.bocd_p;
    verdict.signals = std::move(readings);
    verdict.failure_mode = shadow::failure_mode_name(mode);
    verdict = policy::cooldown_gate(std::move(verdict), st.last_retrain,
                                    config_.decision.cooldown_ticks);
    decision = std::move(verdict);
  }

  st.tick_crps.clear();
  st.tick_log_loss.clear();
  st.tick_pit_z.clear();
  st.has_open_tick = false;

  if (reset_on_trigger_ && decision.action == policy::Action::retrain) {
    apply_retrain(series_id, tick);
  }
  return decision;
}

shadow::ShadowModel MonitorEngine::retrain_replacement(const std::string& series_id) const {
  const SeriesState* st = find_series(series_id);
  if (!st) throw FieldError("series", "unknown series " + series_id);
  shadow::ShadowModel model;
  if (st->last_shadow) {
    model = *st->last_shadow;
  } else {
    // No shadow yet: fall back to a mean model over recent outcomes.
    model.form = shadow::ShadowForm::mean;
    std::vector<double> xs(st->recent_outcomes.begin(), st->recent_outcomes.end());
    model.params = {xs.empty() ? 0.0 : mean_of(xs)};
    model.residual_sd = 1.0;
    model.fallback = true;
  }
  if (model.form == shadow::ShadowForm::booking_curve && config_.travel) {
    // Complete the curve on the full grid; unobserved leads keep the
    // current deployed belief.
    std::vector<double> merged = st->deployed_fractions;
    for (std::size_t i = 0; i < config_.travel->lead_grid.size(); ++i) {
      for (std::size_t j = 0; j < model.leads.size(); ++j) {
        if (model.leads[j] == config_.travel->lead_grid[i]) merged[i] = model.fractions[j];
      }
    }
    model.leads = config_.travel->lead_grid;
    model.fractions = std::move(merged);
  }
  return model;
}

void MonitorEngine::apply_retrain(const std::string& series_id, Tick tick) {
  SeriesState& st = series(series_id);
  const shadow::ShadowModel replacement = retrain_replacement(series_id);
  st.last_retrain = tick;
  st.epoch += 1;

  st.crps_window.clear();
  st.log_loss_window.clear();
  st.tick_crps.clear();
  st.tick_log_loss.clear();
  st.tick_pit_z.clear();
  st.coverage.clear();
  st.pit.clear();
  st.groups.clear();
  st.group_warmup_residuals.clear();
  st.group_baselines.clear();
  st.recent_outcomes.clear();
  st.baseline_outcomes.clear();
  st.baseline_frozen = false;
  st.lead_rings.clear();
  st.shadow_window.clear();
  st.last_shadow.reset();
  st.shadow_ready = false;
  st.last_disagreement = shadow::DisagreementReport{};
  st.run_length.reset();
  st.bocd_p = 0.0;
  st.ticks_seen = 0;
  st.warmed = false;
  st.warmup_history.clear();
  st.baselines.clear();
  st.last_group_gaps.clear();

  // The deployed belief becomes the replacement fit.
  if (replacement.form == shadow::ShadowForm::booking_curve &&
      !replacement.fractions.empty()) {
    st.deployed_fractions = replacement.fractions;
  }
}

}  // namespace driftwatch
