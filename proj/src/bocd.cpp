#include "driftwatch/bocd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftwatch/math.hpp"

namespace driftwatch::bocd {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHazardFloor = 1e-6;
}  // namespace

double log_predictive(const NormalGammaPrior& prior, const RunStats& stats, double x) {
  const double kappa_n = prior.kappa0 + stats.n;
  const double mu_n = (prior.kappa0 * prior.mu0 + stats.n * stats.mean) / kappa_n;
  const double alpha_n = prior.alpha0 + 0.5 * stats.n;
  const double beta_n = prior.beta0 + 0.5 * stats.m2 +
                        prior.kappa0 * stats.n * (stats.mean - prior.mu0) *
                            (stats.mean - prior.mu0) / (2.0 * kappa_n);
  const double nu = 2.0 * alpha_n;
  const double scale2 = beta_n * (kappa_n + 1.0) / (alpha_n * kappa_n);
  const double z2 = (x - mu_n) * (x - mu_n) / (nu * scale2);
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI * scale2) - 0.5 * (nu + 1.0) * std::log1p(z2);
}

double log_marginal(const NormalGammaPrior& prior, const std::vector<double>& segment) {
  const double n = static_cast<double>(segment.size());
  if (segment.empty()) return 0.0;
  double mean = 0.0;
  for (double x : segment) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : segment) ss += (x - mean) * (x - mean);
  const double kappa_n = prior.kappa0 + n;
  const double alpha_n = prior.alpha0 + 0.5 * n;
  const double beta_n = prior.beta0 + 0.5 * ss +
                        prior.kappa0 * n * (mean - prior.mu0) * (mean - prior.mu0) /
                            (2.0 * kappa_n);
  return std::lgamma(alpha_n) - std::lgamma(prior.alpha0) + prior.alpha0 * std::log(prior.beta0) -
         alpha_n * std::log(beta_n) + 0.5 * (std::log(prior.kappa0) - std::log(kappa_n)) -
         0.5 * n * std::log(2.0 * M_PI);
}

RunLengthPosterior RunLengthPosterior::point_mass(NormalGammaPrior prior, int r_max) {
  RunLengthPosterior p;
  p.prior_ = prior;
  p.r_max_ = r_max;
  p.log_probs_ = {0.0};
  p.stats_ = {RunStats{}};
  return p;
}

RunLengthPosterior RunLengthPosterior::stationary(NormalGammaPrior prior, double hazard,
                                                  int r_max) {
  RunLengthPosterior p;
  p.prior_ = prior;
  p.r_max_ = r_max;
  hazard = std::clamp(hazard, kHazardFloor, 1.0 - kHazardFloor);
  const auto slots = static_cast<std::size_t>(r_max);
  p.log_probs_.resize(slots);
  p.stats_.assign(slots, RunStats{});
  const double log_h = std::log(hazard);
  const double log_1mh = std::log1p(-hazard);
  // Geometric run-length distribution, remainder folded into the last slot.
  for (std::size_t r = 0; r + 1 < slots; ++r) {
    p.log_probs_[r] = log_h + static_cast<double>(r) * log_1mh;
  }
  p.log_probs_[slots - 1] = static_cast<double>(slots - 1) * log_1mh;
  return p;
}

RunLengthPosterior RunLengthPosterior::restore(NormalGammaPrior prior, int r_max,
                                               std::vector<double> log_probs,
                                               std::vector<RunStats> stats) {
  RunLengthPosterior p;
  p.prior_ = prior;
  p.r_max_ = r_max;
  p.log_probs_ = std::move(log_probs);
  p.stats_ = std::move(stats);
  return p;
}

double RunLengthPosterior::probability(std::size_t r) const {
  if (r >= log_probs_.size()) return 0.0;
  return std::exp(log_probs_[r]);
}

std::size_t RunLengthPosterior::map_run_length() const {
  std::size_t best = 0;
  for (std::size_t r = 1; r < log_probs_.size(); ++r) {
    if (log_probs_[r] > log_probs_[best]) best = r;
  }
  return best;
}

RunLengthPosterior bocd_update(const RunLengthPosterior& posterior, double x, double hazard) {
  hazard = std::clamp(hazard, kHazardFloor, 1.0 - kHazardFloor);
  const double log_h = std::log(hazard);
  const double log_1mh = std::log1p(-hazard);
  const auto& probs = posterior.log_probs_;
  const auto& stats = posterior.stats_;
  const std::size_t n = probs.size();
  const auto max_slots = static_cast<std::size_t>(posterior.r_max_);

  std::vector<double> joint(n);
  for (std::size_t r = 0; r < n; ++r) {
    joint[r] = probs[r] + log_predictive(posterior.prior_, stats[r], x);
  }

  const bool grown = n + 1 <= max_slots;
  const std::size_t out_n = grown ? n + 1 : max_slots;
  std::vector<double> out_probs(out_n, kNegInf);
  std::vector<RunStats> out_stats(out_n);

  // Changepoint mass lands at run length 0 with fresh statistics.
  out_probs[0] = math::logsumexp(joint) + log_h;
  out_stats[0] = RunStats{};

  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t target = std::min(r + 1, out_n - 1);
    const double mass = joint[r] + log_1mh;
    if (out_probs[target] == kNegInf) {
      out_probs[target] = mass;
      out_stats[target] = stats[r].with(x);
    } else {
      // Tail folding: the top slot absorbs what would have grown past r_max.
      out_probs[target] = math::logaddexp(out_probs[target], mass);
      if (stats[r].n >= out_stats[target].n) out_stats[target] = stats[r].with(x);
    }
  }

  const double norm = math::logsumexp(out_probs);
  for (double& lp : out_probs) lp -= norm;
  return RunLengthPosterior::restore(posterior.prior_, posterior.r_max_, std::move(out_probs),
                                     std::move(out_stats));
}

double shift_probability(const RunLengthPosterior& posterior, int recency) {
  if (recency < 1) throw FieldError("recency", "must be >= 1");
  double p = 0.0;
  const auto limit = std::min<std::size_t>(static_cast<std::size_t>(recency),
                                           posterior.log_probs().size());
  for (std::size_t r = 0; r < limit; ++r) p += std::exp(posterior.log_probs()[r]);
  return std::min(p, 1.0);
}

double effective_hazard(const HazardConfig& schedule, Tick tick) {
  double h = schedule.base;
  for (const auto& w : schedule.turbulence) {
    if (tick >= w.start && tick < w.end) h *= w.multiplier;
  }
  return std::clamp(h, kHazardFloor, 1.0 - kHazardFloor);
}

}  // namespace driftwatch::bocd
