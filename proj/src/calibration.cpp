#include "driftwatch/calibration.hpp"

#include <algorithm>
#include <cmath>

namespace driftwatch::calibration {

double pit_value(const PredictiveDistribution& pred, double outcome) {
  return pred.cdf(outcome);
}

void CoverageTracker::update(const PredictiveDistribution& pred, double outcome) {
  const auto [lo, hi] = pred.central_interval(nominal_);
  push_hit(outcome >= lo && outcome <= hi);
}

void CoverageTracker::push_hit(bool hit) {
  hits_.push_back(hit);
  while (window_ > 0 && hits_.size() > window_) hits_.pop_front();
}

std::size_t CoverageTracker::hit_count() const {
  std::size_t n = 0;
  for (bool h : hits_) n += h ? 1 : 0;
  return n;
}

std::optional<double> CoverageTracker::empirical() const {
  if (hits_.empty()) return std::nullopt;
  return static_cast<double>(hit_count()) / static_cast<double>(hits_.size());
}

void PitHistogram::push(double pit) {
  values_.push_back(std::clamp(pit, 0.0, 1.0));
  while (window_ > 0 && values_.size() > window_) values_.pop_front();
}

std::vector<std::size_t> PitHistogram::counts() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(bins_), 0);
  for (double v : values_) {
    auto idx = static_cast<std::size_t>(v * bins_);
    if (idx >= out.size()) idx = out.size() - 1;
    ++out[idx];
  }
  return out;
}

std::optional<double> calibration_deviation(const PitHistogram& pit) {
  const std::size_t n = pit.total();
  if (n == 0) return std::nullopt;
  const double uniform = 1.0 / static_cast<double>(pit.bins());
  double dist = 0.0;
  for (std::size_t c : pit.counts()) {
    dist += std::fabs(static_cast<double>(c) / static_cast<double>(n) - uniform);
  }
  return dist;
}

void GroupResidualTable::update(const PredictionEvent& event, double residual) {
  for (const auto& [dim, value] : event.groups) {
    push_residual(dim + "=" + value, residual);
  }
}

void GroupResidualTable::push_residual(const std::string& label, double residual) {
  auto& ring = residuals_[label];
  ring.push_back(residual);
  while (ring.size() > window_) ring.pop_front();
}

std::map<std::string, GroupStats> GroupResidualTable::stats() const {
  std::map<std::string, GroupStats> out;
  for (const auto& [label, ring] : residuals_) {
    GroupStats s;
    s.count = ring.size();
    for (double r : ring) {
      s.mean_residual += r;
      s.mean_abs_residual += std::fabs(r);
    }
    if (s.count > 0) {
      s.mean_residual /= static_cast<double>(s.count);
      s.mean_abs_residual /= static_cast<double>(s.count);
    }
    out[label] = s;
  }
  return out;
}

std::vector<GroupGap> group_gap(const GroupResidualTable& table,
                                const std::map<std::string, GroupBaseline>& baselines,
                                double z_threshold) {
  std::vector<GroupGap> out;
  for (const auto& [label, s] : table.stats()) {
    GroupGap gap;
    gap.label = label;
    gap.count = s.count;
    gap.mean_residual = s.mean_residual;
    auto it = baselines.find(label);
    if (it != baselines.end() && s.count > 0 && it->second.sd > 0.0) {
      const double se = it->second.sd / std::sqrt(static_cast<double>(s.count));
      gap.z = (s.mean_residual - it->second.mean) / se;
      gap.flagged = std::fabs(gap.z) > z_threshold;
    }
    out.push_back(gap);
  }
  return out;
}

}  // namespace driftwatch::calibration
