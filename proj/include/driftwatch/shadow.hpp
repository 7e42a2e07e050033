#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftwatch/config.hpp"
#include "driftwatch/types.hpp"

namespace driftwatch::shadow {

/// One window entry the shadow can be refit from. Outcomes may be missing
/// (still in flight); booked-fraction observations are lead-time domain only.
struct ShadowObservation {
  Tick tick = 0;
  double pred_mean = 0.0;
  double pred_sd = 1.0;  // gaussian proxy of the deployed predictive
  std::optional<double> outcome;
  std::optional<bool> promo;
  std::optional<std::int64_t> lead;
  std::optional<double> booked_fraction;  // lag-free curve observation
  std::optional<double> on_the_books;     // recovered bookings, for curve forecasts
};

enum class ShadowForm { mean, seasonal_mean, linear, promo_multiplier, booking_curve };

ShadowForm parse_form(const std::string& name);
std::string form_name(ShadowForm form);

/// Lightweight model refit deterministically from a recent window.
struct ShadowModel {
  ShadowForm form = ShadowForm::mean;
  std::vector<double> params;  // form-specific coefficients
  double residual_sd = 1.0;    // floored
  bool fallback = false;       // under-determined fit fell back to the mean
  double in_window_mean_score = 0.0;
  std::size_t fit_count = 0;

  // booking_curve only: fitted booked fraction per grid lead.
  std::vector<std::int64_t> leads;
  std::vector<double> fractions;
  int seasonal_period = 7;

  /// Shadow predictive for one window entry (gaussian).
  Gaussian predict(const ShadowObservation& obs) const;

  /// promo_multiplier form: fitted demand multiplier on promo ticks.
  std::optional<double> promo_multiplier() const;
};

/// Deterministic least-squares / grouped-mean refit. Throws FieldError when
/// the window is below min_fit usable entries.
ShadowModel shadow_refit(const std::vector<ShadowObservation>& window, ShadowForm form,
                         const ShadowConfig& cfg);

struct DisagreementReport {
  double parameter_distance = 0.0;   // raw scale; callers standardize
  double predictive_divergence = 0.0;
  double skill_differential = 0.0;   // deployed score - shadow score; positive = shadow better
  std::size_t scored = 0;
};

/// Compare the shadow against the deployed predictions over the window.
/// Skill uses CRPS on completed entries; predictive divergence is the mean
/// Wasserstein-1 between the gaussian predictive pairs.
DisagreementReport disagreement(const std::vector<ShadowObservation>& window,
                                const ShadowModel& model,
                                const std::optional<ShadowModel>& deployed_reference = std::nullopt);

enum class FailureMode { healthy, drift, pipeline_suspect, unknown };

std::string failure_mode_name(FailureMode mode);

struct TrendInputs {
  std::optional<double> deployed_z;  // deployed score trend vs quiet baseline
  std::optional<double> shadow_z;    // shadow score trend vs quiet baseline
  std::optional<double> skill_z;     // skill differential vs quiet baseline
};

/// drift when the shadow is materially better; pipeline_suspect when both
/// models degrade together with no material skill gap; healthy otherwise.
FailureMode classify_failure_mode(const TrendInputs& trends, const ShadowConfig& cfg);

/// Wasserstein-1 between two gaussians (closed form).
double gaussian_w1(const Gaussian& a, const Gaussian& b);

}  // namespace driftwatch::shadow
