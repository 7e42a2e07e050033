#pragma once

#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "driftwatch/bocd.hpp"
#include "driftwatch/calibration.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/divergence.hpp"
#include "driftwatch/evidence.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/policy.hpp"
#include "driftwatch/scoring.hpp"
#include "driftwatch/shadow.hpp"
#include "driftwatch/types.hpp"

namespace driftwatch {

/// Everything the engine tracks for one series. Single writer per series;
/// values are plain data so snapshots are exact.
struct SeriesState {
  // Stream position.
  bool has_open_tick = false;
  Tick open_tick = 0;
  Tick last_pred_ts = std::numeric_limits<Tick>::min();
  bool any_pred = false;
  int epoch = 0;  // bumped on retrain; stale outcomes are discarded

  struct Pending {
    PredictiveDistribution dist;
    std::map<std::string, std::string> groups;
    std::optional<std::int64_t> lead;
    int epoch = 0;
  };
  std::map<Tick, Pending> pending;

  // Fresh-data evaluator.
  scoring::ScoreWindow crps_window{28};
  scoring::ScoreWindow log_loss_window{28};
  std::vector<double> tick_crps;      // scores attributed to the open tick
  std::vector<double> tick_log_loss;
  std::vector<double> tick_pit_z;     // normal-quantile PIT values this tick

  // Calibration diagnostics.
  calibration::CoverageTracker coverage{0.8, 56};
  calibration::PitHistogram pit{10, 56};
  calibration::GroupResidualTable groups{28};
  std::map<std::string, std::vector<double>> group_warmup_residuals;
  std::map<std::string, calibration::GroupBaseline> group_baselines;

  // Distributional drift.
  std::deque<double> recent_outcomes;
  std::vector<double> baseline_outcomes;  // frozen at warm-up completion
  bool baseline_frozen = false;

  // Lead-time (booking curve) monitor.
  std::map<std::int64_t, std::deque<double>> lead_rings;
  std::vector<double> deployed_fractions;  // aligned with config travel grid

  // Shadow learner.
  std::deque<shadow::ShadowObservation> shadow_window;
  std::optional<shadow::ShadowModel> last_shadow;
  shadow::DisagreementReport last_disagreement;
  bool shadow_ready = false;

  // Changepoint detector.
  std::optional<bocd::RunLengthPosterior> run_length;
  double bocd_p = 0.0;

  // Quiet baselines.
  int ticks_seen = 0;
  bool warmed = false;
  std::map<std::string, std::vector<double>> warmup_history;
  std::map<std::string, evidence::QuietBaseline> baselines;

  std::optional<Tick> last_retrain;
  std::vector<calibration::GroupGap> last_group_gaps;
};

/// Streaming monitor: ingests prediction/outcome records, maintains all
/// drift proxies per series, and emits one audited decision per tick.
class MonitorEngine {
 public:
  explicit MonitorEngine(Config config);

  const Config& config() const { return config_; }
  const std::string& config_hash() const { return config_hash_; }

  /// Monitor-mode behavior on a retrain decision: when set, the engine
  /// resets its own state as if the retrain were executed.
  void set_reset_on_trigger(bool v) { reset_on_trigger_ = v; }

  /// Streaming ingestion. A prediction with a newer timestamp finalizes the
  /// previous tick of its series; finalized decisions are returned.
  std::vector<policy::RetrainDecision> ingest(const StreamRecord& record);
  std::vector<policy::RetrainDecision> ingest_line(std::string_view line);

  /// Flush all open ticks (end of stream).
  std::vector<policy::RetrainDecision> finish();

  /// Explicit tick driving for backtests: push records without finalizing,
  /// then close the tick.
  void ingest_open(const StreamRecord& record);
  std::optional<policy::RetrainDecision> finalize_series(const std::string& series_id);

  /// Model that would replace the deployed one on a retrain now: the
  /// current shadow fit (curve completed against the deployed belief).
  shadow::ShadowModel retrain_replacement(const std::string& series_id) const;

  /// Execute retrain semantics: reset monitors, baselines, and the
  /// changepoint posterior; start the cooldown clock.
  void apply_retrain(const std::string& series_id, Tick tick);

  const SeriesState* find_series(const std::string& series_id) const;

  /// Versioned snapshot; restore requires the same config (by hash).
  std::string save_snapshot() const;
  static MonitorEngine load_snapshot(const std::string& bytes, Config config);

  static const std::vector<std::string>& signal_ids();

 private:
  friend struct SnapshotCodec;

  SeriesState& series(const std::string& series_id);
  void handle_prediction(const PredictionEvent& event,
                         std::vector<policy::RetrainDecision>& out, bool allow_finalize);
  void handle_outcome(SeriesState& st, Tick key, double outcome, Tick attribution_tick);
  void score_outcome(SeriesState& st, const SeriesState::Pending& pending, double outcome,
                     Tick tick);
  void refit_shadow(SeriesState& st);
  shadow::ShadowForm effective_form(const SeriesState& st) const;
  std::map<std::string, std::optional<double>> signal_raws(SeriesState& st);
  void complete_warmup(SeriesState& st);
  policy::RetrainDecision finalize_tick(SeriesState& st, const std::string& series_id);

  Config config_;
  std::string config_hash_;
  bool reset_on_trigger_ = false;
  std::map<std::string, SeriesState> series_;
};

}  // namespace driftwatch
