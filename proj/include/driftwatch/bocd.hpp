#pragma once

#include <vector>

#include "driftwatch/config.hpp"
#include "driftwatch/types.hpp"

namespace driftwatch::bocd {

/// Normal observation model with a Normal-Gamma conjugate prior (unknown
/// mean and precision); the one-step predictive is Student-t.
struct NormalGammaPrior {
  double mu0 = 0.0;
  double kappa0 = 1.0;
  double alpha0 = 1.0;
  double beta0 = 1.0;
};

/// Sufficient statistics of one run (count, mean, sum of squared deviations).
struct RunStats {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  RunStats with(double x) const {
    RunStats out = *this;
    const double n1 = out.n + 1.0;
    const double delta = x - out.mean;
    out.mean += delta / n1;
    out.m2 += delta * (x - out.mean);
    out.n = n1;
    return out;
  }
};

/// Log Student-t predictive density of x under prior + run stats.
double log_predictive(const NormalGammaPrior& prior, const RunStats& stats, double x);

/// Closed-form log marginal likelihood of a whole segment under the prior;
/// used by the exhaustive oracle as an algebraically independent route.
double log_marginal(const NormalGammaPrior& prior, const std::vector<double>& segment);

/// Distribution over run lengths 0..t (truncated), with per-run sufficient
/// statistics. Probabilities are kept in log space.
class RunLengthPosterior {
 public:
  /// Point mass at run length 0 (the textbook initialization).
  static RunLengthPosterior point_mass(NormalGammaPrior prior, int r_max = 512);

  /// Hazard-implied stationary run-length distribution with empty stats in
  /// every slot. Starts quiet: P(run < w) ~ 1 - (1-h)^w instead of 1.
  static RunLengthPosterior stationary(NormalGammaPrior prior, double hazard, int r_max = 512);

  std::size_t size() const { return log_probs_.size(); }
  int r_max() const { return r_max_; }
  const NormalGammaPrior& prior() const { return prior_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  const std::vector<RunStats>& stats() const { return stats_; }

  /// Probability of run length r.
  double probability(std::size_t r) const;

  std::size_t map_run_length() const;

  // Snapshot plumbing.
  static RunLengthPosterior restore(NormalGammaPrior prior, int r_max,
                                    std::vector<double> log_probs,
                                    std::vector<RunStats> stats);

 private:
  friend RunLengthPosterior bocd_update(const RunLengthPosterior&, double, double);
  NormalGammaPrior prior_;
  int r_max_ = 512;
  std::vector<double> log_probs_;
  std::vector<RunStats> stats_;
};

/// One recursion step: growth mass (1-h) * pi(r) * pred(x|r) into r+1 plus
/// changepoint mass h * sum_r pi(r) * pred(x|r) into r = 0, renormalized.
/// Beyond r_max the tail folds into the longest retained run length.
RunLengthPosterior bocd_update(const RunLengthPosterior& posterior, double x, double hazard);

/// P(run length < w): posterior mass on a changepoint within the last w steps.
double shift_probability(const RunLengthPosterior& posterior, int recency);

/// Base hazard times the multiplier of every containing turbulence window
/// (overlaps compose by product), clamped to [1e-6, 1 - 1e-6].
double effective_hazard(const HazardConfig& schedule, Tick tick);

}  // namespace driftwatch::bocd
