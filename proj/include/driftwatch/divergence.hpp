#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftwatch/types.hpp"

namespace driftwatch::divergence {

/// A distribution observed from data: either pre-binned masses or a
/// window of raw samples. Tagged with where it came from.
struct EmpiricalDistribution {
  enum class Provenance { baseline, recent };

  static EmpiricalDistribution from_histogram(std::vector<double> edges,
                                              std::vector<double> masses,
                                              Provenance provenance);
  static EmpiricalDistribution from_samples(std::vector<double> samples,
                                            Provenance provenance);

  bool is_histogram() const { return !edges.empty(); }

  std::vector<double> edges;   // histogram form
  std::vector<double> masses;  // histogram form, sums to 1 within 1e-9
  std::vector<double> samples; // sample form
  Provenance provenance = Provenance::recent;
};

/// Re-express a histogram on new edges, splitting mass proportionally to
/// overlap length. Total mass is preserved within 1e-9.
std::vector<double> rebin(const std::vector<double>& edges, const std::vector<double>& masses,
                          const std::vector<double>& target_edges);

/// Bin a sample set onto `bins` equal-width cells spanning both inputs.
/// Used when mixed-form inputs need a common support.
struct CommonBins {
  std::vector<double> edges;
  std::vector<double> p;
  std::vector<double> q;
};
CommonBins common_bins(const EmpiricalDistribution& p, const EmpiricalDistribution& q,
                       int bins);

/// Sum of |p_i - q_i| over common bins, in [0, 2].
double l1_distance(const EmpiricalDistribution& p, const EmpiricalDistribution& q,
                   int bins = 10);

/// KL(p || q) in nats after adding epsilon mass per bin and renormalizing.
double kl_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q,
                     double epsilon, int bins = 10);

/// One-dimensional Wasserstein-1, in units of the variable. Exact for both
/// step CDFs (samples) and piecewise-linear CDFs (histograms).
double wasserstein1(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

/// Booked-fraction curve over a lead-time grid. fraction[i] is the share of
/// final demand already booked at lead grid[i]; the implied lead-time CDF is
/// 1 - fraction.
struct BookedCurve {
  std::vector<double> leads;
  std::vector<double> fractions;
};

/// Wasserstein-1 between the lead-time distributions implied by two
/// booked-fraction curves on a common grid (trapezoid over |difference|,
/// anchored at fraction 1 at lead 0). Empty recent curve has no value.
std::optional<double> leadtime_divergence(const BookedCurve& baseline,
                                          const BookedCurve& recent);

}  // namespace driftwatch::divergence
