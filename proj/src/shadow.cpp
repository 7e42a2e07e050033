#include "driftwatch/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "driftwatch/math.hpp"
#include "driftwatch/scoring.hpp"

namespace driftwatch::shadow {

namespace {

/// Solve (X'X) b = X'y for a handful of coefficients via Cholesky.
/// Returns false when the normal equations are singular.
bool solve_least_squares(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& ys, std::vector<double>& beta) {
  const std::size_t k = rows.empty() ? 0 : rows[0].size();
  if (rows.size() < k || k == 0) return false;
  std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
  std::vector<double> b(k, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      b[p] += rows[i][p] * ys[i];
      for (std::size_t q = p; q < k; ++q) a[p][q] += rows[i][p] * rows[i][q];
    }
  }
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < p; ++q) a[p][q] = a[q][p];
  }
  // Cholesky a = L L'.
  std::vector<std::vector<double>> l(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (std::size_t m = 0; m < j; ++m) s -= l[i][m] * l[j][m];
      if (i == j) {
        if (s <= 1e-12) return false;
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  std::vector<double> z(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double s = b[i];
    for (std::size_t m = 0; m < i; ++m) s -= l[i][m] * z[m];
    z[i] = s / l[i][i];
  }
  beta.assign(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double s = z[i];
    for (std::size_t m = i + 1; m < k; ++m) s -= l[m][i] * beta[m];
    beta[i] = s / l[i][i];
  }
  return true;
}

std::vector<double> design_row(ShadowForm form, const ShadowObservation& obs, int period) {
  std::vector<double> row{1.0};
  if (form == ShadowForm::linear) row.push_back(obs.pred_mean);
  if (form == ShadowForm::promo_multiplier) {
    row.push_back(obs.promo.value_or(false) ? 1.0 : 0.0);
  }
  if ((form == ShadowForm::seasonal_mean || form == ShadowForm::promo_multiplier) &&
      period > 0) {
    const double w = 2.0 * M_PI * static_cast<double>(obs.tick) / static_cast<double>(period);
    row.push_back(std::sin(w));
    row.push_back(std::cos(w));
  }
  return row;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) s += a[i] * b[i];
  return s;
}

ShadowModel fit_mean(const std::vector<const ShadowObservation*>& completed,
                     const ShadowConfig& cfg, bool as_fallback) {
  ShadowModel m;
  m.form = ShadowForm::mean;
  m.fallback = as_fallback;
  m.fit_count = completed.size();
  double mean = 0.0;
  for (const auto* o : completed) mean += *o->outcome;
  mean /= static_cast<double>(completed.size());
  double ss = 0.0;
  for (const auto* o : completed) ss += (*o->outcome - mean) * (*o->outcome - mean);
  const double var = completed.size() > 1
                         ? ss / static_cast<double>(completed.size() - 1)
                         : 0.0;
  m.params = {mean};
  m.residual_sd = std::sqrt(std::max(var, cfg.variance_floor));
  return m;
}

ShadowModel fit_regression(const std::vector<const ShadowObservation*>& completed,
                           ShadowForm form, const ShadowConfig& cfg) {
  const bool log_scale = form == ShadowForm::promo_multiplier;
  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  for (const auto* o : completed) {
    double y = *o->outcome;
    if (log_scale) {
      if (!(y > 0.0)) continue;  // log scale needs positive outcomes
      y = std::log(y);
    }
    rows.push_back(design_row(form, *o, cfg.seasonal_period));
    ys.push_back(y);
  }
  std::vector<double> beta;
  if (rows.size() < static_cast<std::size_t>(cfg.min_fit) ||
      !solve_least_squares(rows, ys, beta)) {
    return fit_mean(completed, cfg, /*as_fallback=*/true);
  }
  ShadowModel m;
  m.form = form;
  m.params = beta;
  m.seasonal_period = cfg.seasonal_period;
  m.fit_count = rows.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = ys[i] - dot(rows[i], beta);
    ss += r * r;
  }
  const std::size_t dof = rows.size() > beta.size() ? rows.size() - beta.size() : 1;
  m.residual_sd = std::sqrt(std::max(ss / static_cast<double>(dof), cfg.variance_floor));
  return m;
}

ShadowModel fit_booking_curve(const std::vector<ShadowObservation>& window,
                              const ShadowConfig& cfg) {
  std::map<std::int64_t, std::pair<double, std::size_t>> by_lead;
  for (const auto& o : window) {
    if (o.lead && o.booked_fraction) {
      auto& acc = by_lead[*o.lead];
      acc.first += *o.booked_fraction;
      acc.second += 1;
    }
  }
  std::size_t total = 0;
  for (const auto& [lead, acc] : by_lead) total += acc.second;
  if (total < static_cast<std::size_t>(cfg.min_fit) || by_lead.empty()) {
    throw FieldError("window", "not enough booked-fraction observations to fit");
  }
  ShadowModel m;
  m.form = ShadowForm::booking_curve;
  m.fit_count = total;
  for (const auto& [lead, acc] : by_lead) {
    m.leads.push_back(lead);
    m.fractions.push_back(acc.first / static_cast<double>(acc.second));
  }
  // Residual scale from completed pairs under the refit curve.
  double ss = 0.0;
  std::size_t n = 0;
  for (const auto& o : window) {
    if (!o.outcome || !o.lead || !o.on_the_books) continue;
    const Gaussian g = m.predict(o);
    const double r = *o.outcome - g.mu;
    ss += r * r;
    ++n;
  }
  const double var = n > 1 ? ss / static_cast<double>(n - 1) : 1.0;
  m.residual_sd = std::sqrt(std::max(var, cfg.variance_floor));
  return m;
}

}  // namespace

ShadowForm parse_form(const std::string& name) {
  if (name == "mean") return ShadowForm::mean;
  if (name == "seasonal_mean") return ShadowForm::seasonal_mean;
  if (name == "linear") return ShadowForm::linear;
  if (name == "promo_multiplier") return ShadowForm::promo_multiplier;
  if (name == "booking_curve") return ShadowForm::booking_curve;
  throw FieldError("shadow.form", "unknown form " + name);
}

std::string form_name(ShadowForm form) {
  switch (form) {
    case ShadowForm::mean: return "mean";
    case ShadowForm::seasonal_mean: return "seasonal_mean";
    case ShadowForm::linear: return "linear";
    case ShadowForm::promo_multiplier: return "promo_multiplier";
    case ShadowForm::booking_curve: return "booking_curve";
  }
  return "mean";
}

Gaussian ShadowModel::predict(const ShadowObservation& obs) const {
  if (form == ShadowForm::booking_curve) {
    double frac = 0.5;
    if (obs.lead) {
      // Nearest fitted lead on the grid.
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < leads.size(); ++i) {
        const double d = std::fabs(static_cast<double>(leads[i] - *obs.lead));
        if (d < best) {
          best = d;
          frac = fractions[i];
        }
      }
    }
    frac = std::clamp(frac, 1e-3, 1.0);
    const double otb = obs.on_the_books.value_or(obs.pred_mean * frac);
    return Gaussian{otb / frac, std::max(residual_sd, 1e-6)};
  }
  const std::vector<double> row = design_row(form, obs, seasonal_period);
  const double lin = dot(row, params);
  if (form == ShadowForm::promo_multiplier) {
    const double s2 = residual_sd * residual_sd;
    const double mean = std::exp(lin + 0.5 * s2);
    const double sd = mean * std::sqrt(std::max(std::exp(s2) - 1.0, 1e-12));
    return Gaussian{mean, std::max(sd, 1e-6)};
  }
  return Gaussian{lin, std::max(residual_sd, 1e-6)};
}

std::optional<double> ShadowModel::promo_multiplier() const {
  if (form != ShadowForm::promo_multiplier || params.size() < 2) return std::nullopt;
  return std::exp(params[1]);
}

ShadowModel shadow_refit(const std::vector<ShadowObservation>& window, ShadowForm form,
                         const ShadowConfig& cfg) {
  if (form == ShadowForm::booking_curve) return fit_booking_curve(window, cfg);
  std::vector<const ShadowObservation*> completed;
  for (const auto& o : window) {
    if (o.outcome) completed.push_back(&o);
  }
  if (completed.size() < static_cast<std::size_t>(cfg.min_fit)) {
    throw FieldError("window", "below the minimum fit size");
  }
  ShadowModel m;
  if (form == ShadowForm::mean) {
    m = fit_mean(completed, cfg, /*as_fallback=*/false);
  } else {
    m = fit_regression(completed, form, cfg);
  }
  // Fit diagnostics: in-window mean CRPS of the shadow's own predictions.
  double score = 0.0;
  for (const auto* o : completed) {
    const Gaussian g = m.predict(*o);
    score += scoring::crps_gaussian(g.mu, g.sigma, *o->outcome);
  }
  m.in_window_mean_score = score / static_cast<double>(completed.size());
  return m;
}

double gaussian_w1(const Gaussian& a, const Gaussian& b) {
  const double d = a.mu - b.mu;
  const double s = std::fabs(a.sigma - b.sigma);
  if (s < 1e-300) return std::fabs(d);
  const double r = d / s;
  return s * std::sqrt(2.0 / M_PI) * std::exp(-0.5 * r * r) +
         d * (1.0 - 2.0 * math::normal_cdf(-r));
}

DisagreementReport disagreement(const std::vector<ShadowObservation>& window,
                                const ShadowModel& model,
                                const std::optional<ShadowModel>& deployed_reference) {
  DisagreementReport rep;
  double div = 0.0;
  std::size_t div_n = 0;
  double deployed_score = 0.0, shadow_score = 0.0;
  for (const auto& o : window) {
    const Gaussian s = model.predict(o);
    const Gaussian d{o.pred_mean, std::max(o.pred_sd, 1e-9)};
    div += gaussian_w1(d, s);
    ++div_n;
    if (o.outcome) {
      deployed_score += scoring::crps_gaussian(d.mu, d.sigma, *o.outcome);
      shadow_score += scoring::crps_gaussian(s.mu, s.sigma, *o.outcome);
      ++rep.scored;
    }
  }
  if (div_n > 0) rep.predictive_divergence = div / static_cast<double>(div_n);
  if (rep.scored > 0) {
    rep.skill_differential = (deployed_score - shadow_score) / static_cast<double>(rep.scored);
  }
  // Parameter distance against the deployed belief expressed in the same form.
  if (deployed_reference && deployed_reference->form == model.form) {
    const auto& ref = *deployed_reference;
    if (model.form == ShadowForm::booking_curve) {
      double acc = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < model.leads.size(); ++i) {
        for (std::size_t j = 0; j < ref.leads.size(); ++j) {
          if (ref.leads[j] == model.leads[i]) {
            acc += std::fabs(model.fractions[i] - ref.fractions[j]);
            ++n;
          }
        }
      }
      rep.parameter_distance = n > 0 ? acc / static_cast<double>(n) : 0.0;
    } else {
      double acc = 0.0;
      const std::size_t k = std::min(model.params.size(), ref.params.size());
      for (std::size_t i = 0; i < k; ++i) acc += std::fabs(model.params[i] - ref.params[i]);
      rep.parameter_distance = acc;
    }
  } else {
    rep.parameter_distance = rep.predictive_divergence;
  }
  return rep;
}

std::string failure_mode_name(FailureMode mode) {
  switch (mode) {
    case FailureMode::healthy: return "healthy";
    case FailureMode::drift: return "drift";
    case FailureMode::pipeline_suspect: return "pipeline_suspect";
    case FailureMode::unknown: return "unknown";
  }
  return "unknown";
}

FailureMode classify_failure_mode(const TrendInputs& trends, const ShadowConfig& cfg) {
  if (!trends.deployed_z || !trends.shadow_z || !trends.skill_z) return FailureMode::unknown;
  if (*trends.skill_z >= cfg.drift_z) return FailureMode::drift;
  if (*trends.deployed_z >= cfg.degrade_z && *trends.shadow_z >= cfg.degrade_z &&
      *trends.skill_z < cfg.skill_gate) {
    return FailureMode::pipeline_suspect;
  }
  return FailureMode::healthy;
}

}  // namespace driftwatch::shadow
