#include "driftwatch/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace driftwatch::divergence {

namespace {

constexpr double kMassTol = 1e-9;

void check_masses(const std::vector<double>& masses) {
  double total = 0.0;
  for (double m : masses) {
    if (m < 0.0) throw FieldError("masses", "must be non-negative");
    total += m;
  }
  if (std::fabs(total - 1.0) > kMassTol) {
    throw FieldError("masses", "must sum to 1 within 1e-9");
  }
}

std::vector<double> union_edges(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> histogram_of_samples(const std::vector<double>& samples,
                                         const std::vector<double>& edges) {
  std::vector<double> masses(edges.size() - 1, 0.0);
  if (samples.empty()) return masses;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (double x : samples) {
    // Clamp into the span; edges cover all samples by construction.
    std::size_t idx = 0;
    if (x >= edges.back()) {
      idx = masses.size() - 1;
    } else if (x > edges.front()) {
      idx = static_cast<std::size_t>(
                std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()) -
            1;
      if (idx >= masses.size()) idx = masses.size() - 1;
    }
    masses[idx] += w;
  }
  return masses;
}

/// Integral of |linear function| between two endpoint values over width w.
double abs_linear_integral(double d0, double d1, double w) {
  if (w <= 0.0) return 0.0;
  if ((d0 >= 0.0 && d1 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0)) {
    return 0.5 * w * (std::fabs(d0) + std::fabs(d1));
  }
  // Sign change: split at the root.
  const double denom = std::fabs(d1 - d0);
  return 0.5 * w * (d0 * d0 + d1 * d1) / denom;
}

double w1_samples(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.empty() || q.empty()) {
    throw FieldError("samples", "wasserstein1 needs non-empty sample sets");
  }
  std::vector<double> ps = p, qs = q;
  std::sort(ps.begin(), ps.end());
  std::sort(qs.begin(), qs.end());
  // Integrate |F_p - F_q| between consecutive breakpoints of the step CDFs.
  std::vector<double> points = ps;
  points.insert(points.end(), qs.begin(), qs.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double x = points[i];
    const double fp =
        static_cast<double>(std::upper_bound(ps.begin(), ps.end(), x) - ps.begin()) /
        static_cast<double>(ps.size());
    const double fq =
        static_cast<double>(std::upper_bound(qs.begin(), qs.end(), x) - qs.begin()) /
        static_cast<double>(qs.size());
    total += std::fabs(fp - fq) * (points[i + 1] - x);
  }
  return total;
}

double w1_histograms(const std::vector<double>& edges, const std::vector<double>& p,
                     const std::vector<double>& q) {
  double total = 0.0;
  double cp = 0.0, cq = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double d0 = cp - cq;
    cp += p[i];
    cq += q[i];
    const double d1 = cp - cq;
    total += abs_linear_integral(d0, d1, edges[i + 1] - edges[i]);
  }
  return total;
}

}  // namespace

EmpiricalDistribution EmpiricalDistribution::from_histogram(std::vector<double> edges,
                                                            std::vector<double> masses,
                                                            Provenance provenance) {
  if (edges.size() < 2 || masses.size() + 1 != edges.size()) {
    throw FieldError("edges", "must be masses.size()+1, at least 2");
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) throw FieldError("edges", "must be strictly increasing");
  }
  check_masses(masses);
  EmpiricalDistribution d;
  d.edges = std::move(edges);
  d.masses = std::move(masses);
  d.provenance = provenance;
  return d;
}

EmpiricalDistribution EmpiricalDistribution::from_samples(std::vector<double> samples,
                                                          Provenance provenance) {
  if (samples.empty()) throw FieldError("samples", "must be non-empty");
  for (double s : samples) {
    if (!std::isfinite(s)) throw FieldError("samples", "must be finite");
  }
  EmpiricalDistribution d;
  d.samples = std::move(samples);
  d.provenance = provenance;
  return d;
}

std::vector<double> rebin(const std::vector<double>& edges, const std::vector<double>& masses,
                          const std::vector<double>& target_edges) {
  std::vector<double> out(target_edges.size() - 1, 0.0);
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    const double width = b - a;
    if (masses[i] == 0.0) continue;
    if (b <= target_edges.front() || a >= target_edges.back()) {
      throw FieldError("edges", "supports incompatible after rebinning");
    }
    for (std::size_t j = 0; j + 1 < target_edges.size(); ++j) {
      const double lo = std::max(a, target_edges[j]);
      const double hi = std::min(b, target_edges[j + 1]);
      if (hi > lo) out[j] += masses[i] * (hi - lo) / width;
    }
  }
  return out;
}

CommonBins common_bins(const EmpiricalDistribution& p, const EmpiricalDistribution& q,
                       int bins) {
  CommonBins out;
  if (p.is_histogram() && q.is_histogram()) {
    out.edges = union_edges(p.edges, q.edges);
    out.p = rebin(p.edges, p.masses, out.edges);
    out.q = rebin(q.edges, q.masses, out.edges);
    return out;
  }
  // At least one side is raw samples: use equal-width bins over the joint span.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto* d : {&p, &q}) {
    if (d->is_histogram()) {
      lo = std::min(lo, d->edges.front());
      hi = std::max(hi, d->edges.back());
    } else {
      for (double x : d->samples) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  if (!(hi > lo)) {
    hi = lo + 1.0;
    lo -= 1.0;
  }
  out.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) {
    out.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) /
                                                      static_cast<double>(bins);
  }
  auto project = [&](const EmpiricalDistribution& d) {
    if (d.is_histogram()) return rebin(d.edges, d.masses, out.edges);
    return histogram_of_samples(d.samples, out.edges);
  };
  out.p = project(p);
  out.q = project(q);
  return out;
}

double l1_distance(const EmpiricalDistribution& p, const EmpiricalDistribution& q, int bins) {
  const CommonBins cb = common_bins(p, q, bins);
  double total = 0.0;
  for (std::size_t i = 0; i < cb.p.size(); ++i) total += std::fabs(cb.p[i] - cb.q[i]);
  return total;
}

double kl_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q,
                     double epsilon, int bins) {
  if (!(epsilon > 0.0)) throw FieldError("epsilon", "must be > 0");
  const CommonBins cb = common_bins(p, q, bins);
  const double n = static_cast<double>(cb.p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < cb.p.size(); ++i) {
    const double pi = (cb.p[i] + epsilon) / (1.0 + n * epsilon);
    const double qi = (cb.q[i] + epsilon) / (1.0 + n * epsilon);
    total += pi * std::log(pi / qi);
  }
  return std::max(total, 0.0);
}

double wasserstein1(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
  if (!p.is_histogram() && !q.is_histogram()) return w1_samples(p.samples, q.samples);
  const CommonBins cb = common_bins(p, q, 64);
  return w1_histograms(cb.edges, cb.p, cb.q);
}

std::optional<double> leadtime_divergence(const BookedCurve& baseline,
                                          const BookedCurve& recent) {
  if (recent.fractions.empty()) return std::nullopt;
  if (baseline.leads != recent.leads) {
    throw FieldError("leads", "curves must share a lead-time grid");
  }
  if (baseline.fractions.size() != baseline.leads.size() ||
      recent.fractions.size() != recent.leads.size()) {
    throw FieldError("fractions", "must match the grid length");
  }
  // CDF difference equals the booked-fraction difference; both curves are
  // anchored at fraction 1 (difference 0) at lead 0.
  double total = 0.0;
  double prev_lead = 0.0;
  double prev_diff = 0.0;
  for (std::size_t i = 0; i < baseline.leads.size(); ++i) {
    const double lead = baseline.leads[i];
    const double diff = recent.fractions[i] - baseline.fractions[i];
    total += 0.5 * (std::fabs(prev_diff) + std::fabs(diff)) * (lead - prev_lead);
    prev_lead = lead;
    prev_diff = diff;
  }
  return total;
}

}  // namespace driftwatch::divergence
