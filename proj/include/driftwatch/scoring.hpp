#pragma once

#include <deque>
#include <optional>

#include "driftwatch/types.hpp"

namespace driftwatch::scoring {

/// Negative log predictive density; larger means more surprised.
/// Gaussian: exact density. Histogram: mass/width of the containing bin.
/// Ensemble: Gaussian kernel density with Silverman bandwidth.
/// Capped at `cap` nats so one impossible outcome cannot saturate pooling.
double log_loss(const PredictiveDistribution& pred, double outcome, double cap = 50.0);

/// Continuous ranked probability score.
///   gaussian  -> sigma * [z(2*Phi(z)-1) + 2*phi(z) - 1/sqrt(pi)]
///   ensemble  -> mean|x_i - y| - (1/2m^2) sum_ij |x_i - x_j|
///   histogram -> exact integral of (CDF - step)^2 over the piecewise-linear CDF
double crps(const PredictiveDistribution& pred, double outcome);

double crps_gaussian(double mu, double sigma, double outcome);

/// Kernel log-density used for ensemble log loss; exposed for tests.
double ensemble_kde_log_density(const std::vector<double>& members, double y);

/// Rolling window of recent scores with its running mean.
class ScoreWindow {
 public:
  explicit ScoreWindow(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  void push(Tick tick, double score);
  void clear() { entries_.clear(); }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }

  /// Mean of retained scores; empty window yields no value.
  std::optional<double> mean() const;

  const std::deque<std::pair<Tick, double>>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<std::pair<Tick, double>> entries_;
};

}  // namespace driftwatch::scoring
