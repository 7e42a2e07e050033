#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftwatch/types.hpp"

namespace driftwatch::calibration {

/// Probability integral transform: predictive CDF at the realized outcome.
double pit_value(const PredictiveDistribution& pred, double outcome);

/// Empirical coverage of the central `nominal_level` interval.
class CoverageTracker {
 public:
  CoverageTracker(double nominal_level, std::size_t window = 0)
      : nominal_(nominal_level), window_(window) {}

  void update(const PredictiveDistribution& pred, double outcome);
  /// Restore path: append a stored hit/miss directly.
  void push_hit(bool hit);
  void clear() { hits_.clear(); }

  double nominal_level() const { return nominal_; }
  std::size_t total() const { return hits_.size(); }
  std::size_t hit_count() const;
  std::optional<double> empirical() const;
  const std::deque<bool>& hits() const { return hits_; }

 private:
  double nominal_;
  std::size_t window_;  // 0 = unwindowed
  std::deque<bool> hits_;
};

/// Rolling set of PIT values summarized as a fixed-bin histogram.
class PitHistogram {
 public:
  explicit PitHistogram(int bins = 10, std::size_t window = 0)
      : bins_(bins), window_(window) {}

  void push(double pit);
  void clear() { values_.clear(); }

  int bins() const { return bins_; }
  std::size_t total() const { return values_.size(); }
  std::vector<std::size_t> counts() const;
  const std::deque<double>& values() const { return values_; }

 private:
  int bins_;
  std::size_t window_;
  std::deque<double> values_;
};

/// L1 distance between the PIT histogram frequencies and uniform, in [0, 2).
/// Empty histogram has no value.
std::optional<double> calibration_deviation(const PitHistogram& pit);

struct GroupStats {
  std::size_t count = 0;
  double mean_residual = 0.0;
  double mean_abs_residual = 0.0;
};

struct GroupBaseline {
  double mean = 0.0;
  double sd = 1.0;  // per-observation residual scale from the quiet period
};

struct GroupGap {
  std::string label;  // "dimension=value"
  std::size_t count = 0;
  double mean_residual = 0.0;
  double z = 0.0;
  bool flagged = false;
};

/// Windowed residual structure per group label; residual = outcome - predictive mean.
class GroupResidualTable {
 public:
  explicit GroupResidualTable(std::size_t window) : window_(window == 0 ? 1 : window) {}

  void update(const PredictionEvent& event, double residual);
  /// Restore path: append a residual to one label's ring directly.
  void push_residual(const std::string& label, double residual);
  void clear() { residuals_.clear(); }

  std::map<std::string, GroupStats> stats() const;
  const std::map<std::string, std::deque<double>>& residuals() const { return residuals_; }

 private:
  std::size_t window_;
  std::map<std::string, std::deque<double>> residuals_;
};

/// Groups whose windowed mean residual deviates from the quiet baseline by
/// more than z_threshold standard errors.
std::vector<GroupGap> group_gap(const GroupResidualTable& table,
                                const std::map<std::string, GroupBaseline>& baselines,
                                double z_threshold);

}  // namespace driftwatch::calibration
