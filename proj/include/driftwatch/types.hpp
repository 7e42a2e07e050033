#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace driftwatch {

using Tick = std::int64_t;

/// Validation failure tied to a named field, so callers can report exactly
/// what was wrong with a record or a config key.
class FieldError : public std::exception {
 public:
  FieldError(std::string field, std::string message)
      : field_(std::move(field)), message_(std::move(message)) {
    what_ = field_ + ": " + message_;
  }
  const char* what() const noexcept override { return what_.c_str(); }
  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  std::string message_;
  std::string what_;
};

struct Gaussian {
  double mu = 0.0;
  double sigma = 1.0;  // strictly positive
};

struct Ensemble {
  std::vector<double> members;  // at least one, all finite
};

struct Histogram {
  std::vector<double> edges;   // strictly increasing, size = masses.size() + 1
  std::vector<double> masses;  // non-negative, sum to 1 within 1e-9
};

/// A model's belief about one outcome: exactly one of the three forms.
class PredictiveDistribution {
 public:
  PredictiveDistribution() : form_(Gaussian{}) {}
  explicit PredictiveDistribution(Gaussian g) : form_(std::move(g)) {}
  explicit PredictiveDistribution(Ensemble e) : form_(std::move(e)) {}
  explicit PredictiveDistribution(Histogram h) : form_(std::move(h)) {}

  /// Throws FieldError on the first violated invariant.
  void validate() const;

  bool is_gaussian() const { return std::holds_alternative<Gaussian>(form_); }
  bool is_ensemble() const { return std::holds_alternative<Ensemble>(form_); }
  bool is_histogram() const { return std::holds_alternative<Histogram>(form_); }
  const Gaussian& gaussian() const { return std::get<Gaussian>(form_); }
  const Ensemble& ensemble() const { return std::get<Ensemble>(form_); }
  const Histogram& histogram() const { return std::get<Histogram>(form_); }

  double mean() const;

  /// CDF at y. Histogram CDF is piecewise linear; ensemble CDF uses
  /// midpoint tie handling: (#below + 0.5 * #equal) / m.
  double cdf(double y) const;

  /// Quantile at p in [0,1]; inverse of cdf (piecewise-linear for
  /// histograms, type-7 interpolation for ensembles).
  double quantile(double p) const;

  /// Central interval covering `level` probability.
  std::pair<double, double> central_interval(double level) const;

  /// Log density. Histogram bins use mass/width; zero-mass bins and points
  /// outside the support return -inf (callers cap). Ensembles have no
  /// intrinsic density; see scoring::log_loss for the kernel estimate.
  double log_density(double y) const;

 private:
  std::variant<Gaussian, Ensemble, Histogram> form_;
};

/// One timestamped prediction/outcome pair — the unit of ingestion.
struct PredictionEvent {
  Tick timestamp = 0;
  std::string series_id;
  PredictiveDistribution prediction;
  std::optional<double> outcome;
  std::map<std::string, std::string> groups;
  std::optional<std::int64_t> lead_time;
};

/// Outcome arriving after its prediction, keyed by series + the
/// prediction's timestamp.
struct OutcomeRecord {
  Tick timestamp = 0;
  std::string series_id;
  double outcome = 0.0;
};

using StreamRecord = std::variant<PredictionEvent, OutcomeRecord>;

/// Retraining economics in common currency units.
struct CostModel {
  double churn_cost = 0.0;              // per retrain event
  double bias_cost_rate = 0.0;          // per stale day
  double retrain_cost = 0.0;            // reported separately, not in the threshold
  double expected_stale_duration = 0.0; // days of bias accrual if no action

  /// Throws FieldError; a usable model needs every field non-negative and
  /// bias_cost_rate * expected_stale_duration > 0.
  void validate() const;
};

}  // namespace driftwatch
