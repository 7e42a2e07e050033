#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftwatch/config.hpp"
#include "driftwatch/shadow.hpp"

namespace driftwatch::evidence {

/// Robust location/scale of a signal over its quiet history.
struct QuietBaseline {
  double mean = 0.0;
  double sd = 1.0;
  bool degenerate = false;  // constant signal; sd floored
};

/// Median and scaled MAD, so stray spikes in the quiet window cannot poison
/// the baseline. Constant histories flag degenerate with the floor applied.
QuietBaseline quiet_baseline_fit(const std::vector<double>& history, double sd_floor = 1e-9);

struct SignalReading {
  std::string signal_id;
  std::optional<double> raw;  // absent when the monitor has no value yet
  double baseline_mean = 0.0;
  double baseline_sd = 1.0;
  double z = 0.0;
  double weight = 0.0;
  double contribution = 0.0;  // log-odds added by this signal
  bool degenerate_baseline = false;
};

struct EvidenceReport {
  Tick tick = 0;
  std::string series_id;
  std::vector<SignalReading> readings;
  double bocd_probability = 0.0;
  double pooled_p_shift = 0.0;
  shadow::FailureMode failure_mode = shadow::FailureMode::unknown;
};

/// Bounded monotone evidence map: clip(z - z0, 0, g_max) * scale.
/// Below the dead zone a signal contributes nothing; improvement never
/// counts as shift evidence.
double evidence_bump(double z, const EvidenceConfig& cfg);

/// Log-odds pooling: logit(bocd_p) + sum_i w_i * g(z_i), inverse-logit,
/// logits clamped to +/-30. Populates each reading's contribution so the
/// report decomposes exactly: sum(contributions) = logit(pooled) - logit(bocd).
double pool_evidence(std::vector<SignalReading>& readings, double bocd_p,
                     const EvidenceConfig& cfg);

}  // namespace driftwatch::evidence
