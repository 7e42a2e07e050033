#include "driftwatch/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftwatch/math.hpp"

namespace driftwatch {

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double ensemble_quantile(const std::vector<double>& members, double p) {
  std::vector<double> sorted = members;
  std::sort(sorted.begin(), sorted.end());
  return math::quantile_sorted(sorted, p);
}

}  // namespace

void PredictiveDistribution::validate() const {
  if (is_gaussian()) {
    const auto& g = gaussian();
    if (!std::isfinite(g.mu)) throw FieldError("pred.gaussian.mu", "must be finite");
    if (!(g.sigma > 0.0) || !std::isfinite(g.sigma)) {
      throw FieldError("pred.gaussian.sigma", "sigma must be > 0");
    }
    return;
  }
  if (is_ensemble()) {
    const auto& e = ensemble();
    if (e.members.empty()) throw FieldError("pred.ensemble", "needs at least one member");
    for (double m : e.members) {
      if (!std::isfinite(m)) throw FieldError("pred.ensemble", "members must be finite");
    }
    return;
  }
  const auto& h = histogram();
  if (h.edges.size() < 2 || h.masses.size() + 1 != h.edges.size()) {
    throw FieldError("pred.histogram", "edges must be masses.size()+1, at least 2");
  }
  for (std::size_t i = 0; i + 1 < h.edges.size(); ++i) {
    if (!(h.edges[i] < h.edges[i + 1])) {
      throw FieldError("pred.histogram.edges", "must be strictly increasing");
    }
  }
  double total = 0.0;
  for (double m : h.masses) {
    if (m < 0.0 || !std::isfinite(m)) {
      throw FieldError("pred.histogram.masses", "must be non-negative");
    }
    total += m;
  }
  if (std::fabs(total - 1.0) > kMassTolerance) {
    throw FieldError("pred.histogram.masses", "must sum to 1 within 1e-9");
  }
}

double PredictiveDistribution::mean() const {
  if (is_gaussian()) return gaussian().mu;
  if (is_ensemble()) {
    const auto& m = ensemble().members;
    double s = 0.0;
    for (double x : m) s += x;
    return s / static_cast<double>(m.size());
  }
  const auto& h = histogram();
  double s = 0.0;
  for (std::size_t i = 0; i < h.masses.size(); ++i) {
    s += h.masses[i] * 0.5 * (h.edges[i] + h.edges[i + 1]);
  }
  return s;
}

double PredictiveDistribution::cdf(double y) const {
  if (is_gaussian()) {
    const auto& g = gaussian();
    return math::normal_cdf((y - g.mu) / g.sigma);
  }
  if (is_ensemble()) {
    const auto& m = ensemble().members;
    std::size_t below = 0, equal = 0;
    for (double x : m) {
      if (x < y) ++below;
      else if (x == y) ++equal;
    }
    return (static_cast<double>(below) + 0.5 * static_cast<double>(equal)) /
           static_cast<double>(m.size());
  }
  const auto& h = histogram();
  if (y <= h.edges.front()) return 0.0;
  if (y >= h.edges.back()) return 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < h.masses.size(); ++i) {
    if (y < h.edges[i + 1]) {
      const double width = h.edges[i + 1] - h.edges[i];
      return acc + h.masses[i] * (y - h.edges[i]) / width;
    }
    acc += h.masses[i];
  }
  return 1.0;
}

double PredictiveDistribution::quantile(double p) const {
  p = std::clamp(p, 0.0, 1.0);
  if (is_gaussian()) {
    const auto& g = gaussian();
    return g.mu + g.sigma * math::normal_quantile(std::clamp(p, 1e-15, 1.0 - 1e-15));
  }
  if (is_ensemble()) return ensemble_quantile(ensemble().members, p);
  const auto& h = histogram();
  if (p <= 0.0) return h.edges.front();
  if (p >= 1.0) return h.edges.back();
  double acc = 0.0;
  for (std::size_t i = 0; i < h.masses.size(); ++i) {
    if (p <= acc + h.masses[i]) {
      if (h.masses[i] == 0.0) return h.edges[i];
      const double frac = (p - acc) / h.masses[i];
      return h.edges[i] + frac * (h.edges[i + 1] - h.edges[i]);
    }
    acc += h.masses[i];
  }
  return h.edges.back();
}

std::pair<double, double> PredictiveDistribution::central_interval(double level) const {
  const double tail = 0.5 * (1.0 - level);
  return {quantile(tail), quantile(1.0 - tail)};
}

double PredictiveDistribution::log_density(double y) const {
  if (is_gaussian()) {
    const auto& g = gaussian();
    const double z = (y - g.mu) / g.sigma;
    return -0.5 * math::kLn2Pi - std::log(g.sigma) - 0.5 * z * z;
  }
  if (is_histogram()) {
    const auto& h = histogram();
    if (y < h.edges.front() || y > h.edges.back()) return kNegInf;
    for (std::size_t i = 0; i < h.masses.size(); ++i) {
      const bool last = (i + 1 == h.masses.size());
      if (y < h.edges[i + 1] || (last && y <= h.edges[i + 1])) {
        if (h.masses[i] <= 0.0) return kNegInf;
        return std::log(h.masses[i] / (h.edges[i + 1] - h.edges[i]));
      }
    }
    return kNegInf;
  }
  // Ensembles carry no intrinsic density.
  return kNegInf;
}

void CostModel::validate() const {
  if (!(churn_cost >= 0.0) || !std::isfinite(churn_cost)) {
    throw FieldError("costs.churn_cost", "must be a non-negative number");
  }
  if (!(bias_cost_rate >= 0.0) || !std::isfinite(bias_cost_rate)) {
    throw FieldError("costs.bias_cost_rate", "must be a non-negative number");
  }
  if (!(retrain_cost >= 0.0) || !std::isfinite(retrain_cost)) {
    throw FieldError("costs.retrain_cost", "must be a non-negative number");
  }
  if (!(expected_stale_duration >= 0.0) || !std::isfinite(expected_stale_duration)) {
    throw FieldError("costs.expected_stale_duration", "must be a non-negative number");
  }
  if (!(bias_cost_rate * expected_stale_duration > 0.0)) {
    throw FieldError("costs", "bias_cost_rate * expected_stale_duration must be > 0");
  }
}

}  // namespace driftwatch
