#include "driftwatch/evidence.hpp"

#include <algorithm>
#include <cmath>

#include "driftwatch/math.hpp"

namespace driftwatch::evidence {

QuietBaseline quiet_baseline_fit(const std::vector<double>& history, double sd_floor) {
  if (history.empty()) throw FieldError("history", "quiet baseline needs observations");
  QuietBaseline b;
  b.mean = math::median(history);
  const double scale = math::mad_scale(history);
  if (!(scale > sd_floor)) {
    b.sd = sd_floor;
    b.degenerate = true;
  } else {
    b.sd = scale;
  }
  return b;
}

double evidence_bump(double z, const EvidenceConfig& cfg) {
  if (!std::isfinite(z)) return 0.0;
  return std::clamp(z - cfg.z0, 0.0, cfg.g_max) * cfg.scale;
}

double pool_evidence(std::vector<SignalReading>& readings, double bocd_p,
                     const EvidenceConfig& cfg) {
  bool any_positive = false;
  for (const auto& r : readings) any_positive = any_positive || r.weight > 0.0;
  double log_odds = math::clamped_logit(bocd_p);
  const double base = log_odds;
  for (auto& r : readings) {
    r.contribution = 0.0;
    if (!r.raw || r.weight <= 0.0) continue;
    r.contribution = r.weight * evidence_bump(r.z, cfg);
    log_odds += r.contribution;
  }
  (void)any_positive;  // weights may legitimately all be zero: pooled == bocd_p
  log_odds = std::clamp(log_odds, -30.0, 30.0);
  // Keep the decomposition exact even after clamping.
  if (log_odds != base) {
    double total = 0.0;
    for (const auto& r : readings) total += r.contribution;
    const double clamped_total = log_odds - base;
    if (total > 0.0 && clamped_total != total) {
      for (auto& r : readings) r.contribution *= clamped_total / total;
    }
  }
  return math::sigmoid(log_odds);
}

}  // namespace driftwatch::evidence
