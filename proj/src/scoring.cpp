#include "driftwatch/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "driftwatch/math.hpp"

namespace driftwatch::scoring {

namespace {

double silverman_bandwidth(const std::vector<double>& members) {
  const std::size_t m = members.size();
  if (m < 2) return 0.0;
  double mean = 0.0;
  for (double x : members) mean += x;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double x : members) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  std::vector<double> sorted = members;
  std::sort(sorted.begin(), sorted.end());
  const double iqr =
      math::quantile_sorted(sorted, 0.75) - math::quantile_sorted(sorted, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(m), -0.2);
}

/// Integral of (c + m*t)^2 for t in [0, w].
double quad_segment(double c, double slope, double w) {
  return w * (c * c + c * slope * w + slope * slope * w * w / 3.0);
}

double crps_histogram(const Histogram& h, double y) {
  double total = 0.0;
  // Outside the support the CDF is flat at 0 or 1 and the step is constant.
  if (y < h.edges.front()) total += h.edges.front() - y;
  if (y > h.edges.back()) total += y - h.edges.back();

  double cdf_left = 0.0;
  for (std::size_t i = 0; i < h.masses.size(); ++i) {
    const double a = h.edges[i];
    const double b = h.edges[i + 1];
    const double width = b - a;
    const double slope = h.masses[i] / width;
    auto piece = [&](double lo, double hi, double step) {
      if (hi <= lo) return;
      const double c = cdf_left + slope * (lo - a) - step;
      total += quad_segment(c, slope, hi - lo);
    };
    if (y <= a) {
      piece(a, b, 1.0);
    } else if (y >= b) {
      piece(a, b, 0.0);
    } else {
      piece(a, y, 0.0);
      piece(y, b, 1.0);
    }
    cdf_left += h.masses[i];
  }
  return total;
}

double crps_ensemble(const std::vector<double>& members, double y) {
  const std::size_t m = members.size();
  double mean_abs = 0.0;
  for (double x : members) mean_abs += std::fabs(x - y);
  mean_abs /= static_cast<double>(m);

  std::vector<double> sorted = members;
  std::sort(sorted.begin(), sorted.end());
  // sum_{i<j} (x_j - x_i) via prefix sums.
  double prefix = 0.0, pair_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    pair_sum += sorted[i] * static_cast<double>(i) - prefix;
    prefix += sorted[i];
  }
  const double spread = pair_sum / (static_cast<double>(m) * static_cast<double>(m));
  return mean_abs - spread;
}

}  // namespace

double crps_gaussian(double mu, double sigma, double outcome) {
  const double z = (outcome - mu) / sigma;
  return sigma * (z * (2.0 * math::normal_cdf(z) - 1.0) + 2.0 * math::normal_pdf(z) -
                  math::kInvSqrtPi);
}

double ensemble_kde_log_density(const std::vector<double>& members, double y) {
  double h = silverman_bandwidth(members);
  if (!(h > 0.0)) {
    // Degenerate spread: fall back to a narrow kernel relative to scale.
    double scale = 0.0;
    for (double x : members) scale = std::max(scale, std::fabs(x));
    h = std::max(1e-9, 1e-3 * std::max(1.0, scale));
  }
  std::vector<double> logs;
  logs.reserve(members.size());
  for (double x : members) {
    const double z = (y - x) / h;
    logs.push_back(-0.5 * z * z - std::log(h) - 0.5 * math::kLn2Pi);
  }
  return math::logsumexp(logs) - std::log(static_cast<double>(members.size()));
}

double log_loss(const PredictiveDistribution& pred, double outcome, double cap) {
  double nats;
  if (pred.is_ensemble()) {
    nats = -ensemble_kde_log_density(pred.ensemble().members, outcome);
  } else {
    nats = -pred.log_density(outcome);
  }
  if (!std::isfinite(nats) || nats > cap) return cap;
  return nats;
}

double crps(const PredictiveDistribution& pred, double outcome) {
  if (pred.is_gaussian()) {
    return crps_gaussian(pred.gaussian().mu, pred.gaussian().sigma, outcome);
  }
  if (pred.is_ensemble()) return crps_ensemble(pred.ensemble().members, outcome);
  return crps_histogram(pred.histogram(), outcome);
}

void ScoreWindow::push(Tick tick, double score) {
  entries_.emplace_back(tick, score);
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::optional<double> ScoreWindow::mean() const {
  if (entries_.empty()) return std::nullopt;
  double s = 0.0;
  for (const auto& [t, v] : entries_) s += v;
  return s / static_cast<double>(entries_.size());
}

}  // namespace driftwatch::scoring
