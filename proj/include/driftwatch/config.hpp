#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftwatch/types.hpp"

namespace driftwatch {

/// A declared period in which regime change is a priori more likely.
struct TurbulenceWindow {
  Tick start = 0;
  Tick end = 0;  // inclusive start, exclusive end
  double multiplier = 1.0;
};

struct WindowsConfig {
  int score = 28;
  int coverage = 56;
  int pit = 56;
  int group = 28;
  int divergence = 28;
  int shadow = 28;
  int max() const;
};

struct HazardConfig {
  double base = 0.001;  // per-tick prior probability of regime change
  std::vector<TurbulenceWindow> turbulence;
};

struct BocdConfig {
  int r_max = 512;
  int recency = 14;  // run lengths below this count as "recent shift"
  double prior_mu = 0.0;
  double prior_kappa = 1.0;
  double prior_alpha = 1.0;
  double prior_beta = 1.0;
  // pit_z: normal-quantile transform of the PIT, exactly N(0,1) under a
  // calibrated model. crps / log_loss: per-tick score, baseline-relative.
  std::string input = "pit_z";
  double input_clip = 8.0;  // winsorize standardized inputs at +/- this
};

struct EvidenceConfig {
  double z0 = 2.0;     // dead zone: z-scores at or below this contribute nothing
  double g_max = 6.0;  // cap on (z - z0) before scaling
  double scale = 0.5;
  std::map<std::string, double> weights;  // signal_id -> non-negative weight
};

struct ScoringConfig {
  double log_loss_cap = 50.0;  // nats; one impossible outcome must not saturate
  double coverage_level = 0.8;
};

struct CalibrationConfig {
  int pit_bins = 10;
};

struct DivergenceConfig {
  double kl_epsilon = 1e-6;
  int histogram_bins = 10;
};

struct DecisionConfig {
  bool strict_inequality = true;  // retrain iff p_shift > threshold
  int cooldown_ticks = 14;
};

struct ShadowConfig {
  std::string form = "auto";  // auto | mean | seasonal_mean | linear | promo_multiplier | booking_curve
  int min_fit = 8;
  double variance_floor = 1e-6;
  int seasonal_period = 7;  // 0 disables the Fourier pair
  double drift_z = 3.0;     // "materially better" threshold for skill
  double degrade_z = 3.0;   // both-models-degraded threshold
  double skill_gate = 1.0;  // pipeline_suspect only when skill z stays below this
};

struct BaselineConfig {
  int quiet_ticks = 84;    // warm-up length; must cover the largest window
  double sd_floor = 1e-9;  // degenerate-baseline floor
  // Windowed signal trajectories carry few effective degrees of freedom over
  // a short quiet period; their fitted scale is inflated by this factor
  // before standardization.
  double scale_inflation = 1.5;
};

/// Training-era booking-curve belief; present only for lead-time domains.
struct TravelMonitorConfig {
  std::vector<std::int64_t> lead_grid;
  double booked_frac_30 = 0.6;  // fraction booked by 30 days out
  double mean_demand = 45.0;
  int lead_window = 12;  // ticks of booked-fraction observations retained

  /// Baseline booked fraction at a given lead: frac30^(lead/30).
  double baseline_fraction(double lead) const;
};

struct Config {
  CostModel costs;  // mandatory in config files
  WindowsConfig windows;
  HazardConfig hazard;
  BocdConfig bocd;
  EvidenceConfig evidence;
  ScoringConfig scoring;
  CalibrationConfig calibration;
  DivergenceConfig divergence;
  DecisionConfig decision;
  ShadowConfig shadow;
  BaselineConfig baseline;
  std::optional<TravelMonitorConfig> travel;

  Config();

  /// Canonical JSON text of the effective config (defaults included).
  std::string canonical_text() const;

  /// FNV-1a hash of canonical_text(), hex encoded.
  std::string hash() const;

  static Config default_weights_only();
};

/// Every violated field, not just the first.
class ConfigError : public std::exception {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const char* what() const noexcept override { return joined_.c_str(); }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
  std::string joined_;
};

/// Parse config JSON text. Cost fields are mandatory; everything else
/// defaults. Throws ConfigError listing all violations.
Config parse_config(const std::string& text);

Config load_config_file(const std::string& path);

}  // namespace driftwatch
