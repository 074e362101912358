#include "boxguard/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boxguard/error.hpp"

namespace boxguard {
namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw InputError("delta must lie in (0, 1)");
}

// Extended precision: the three terms nearly cancel for large n.
long double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<long double>(n) + 1.0L) -
         std::lgamma(static_cast<long double>(k) + 1.0L) -
         std::lgamma(static_cast<long double>(n - k) + 1.0L);
}

} // namespace

double BoxGuarantee::misprediction_bound() const {
  if (polarity == Polarity::Positive)
    return epsilon;
  const double rate =
      static_cast<double>(evidence - errors) / static_cast<double>(evidence);
  return std::min(1.0, rate + hoeffding_epsilon(evidence, delta));
}

std::string to_string(CoverageMethod m) {
  return m == CoverageMethod::ClopperPearson ? "clopper_pearson" : "hoeffding";
}

CoverageMethod coverage_method_from_string(const std::string &s) {
  if (s == "clopper_pearson")
    return CoverageMethod::ClopperPearson;
  if (s == "hoeffding")
    return CoverageMethod::Hoeffding;
  throw InputError("unknown coverage method '" + s + "'");
}

OperationalProfile::OperationalProfile(std::map<std::string, double> weights)
    : weights_(std::move(weights)) {
  double total = 0.0;
  for (const auto &[id, w] : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InputError("profile weight for '" + id + "' is not a probability");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InputError("profile weights sum to " + std::to_string(total) +
                     ", expected 1");
}

double hoeffding_epsilon(std::size_t m, double delta) {
  if (m == 0)
    throw InputError("Hoeffding bound needs at least one sample");
  check_delta(delta);
  return std::sqrt(-std::log(delta) / (2.0 * static_cast<double>(m)));
}

double binomial_cdf(std::size_t k, std::size_t n, double p) {
  if (k >= n || p <= 0.0)
    return 1.0;
  if (p >= 1.0)
    return 0.0;
  using ld = long double;
  const ld lp = std::log(static_cast<ld>(p));
  const ld lq = std::log1p(-static_cast<ld>(p));
  // Anchor log pmf(k) exactly, then walk down with the pmf ratio
  // pmf(i-1)/pmf(i) = i/(n-i+1) * q/p. The pmf is unimodal, so once the
  // terms fall 64 nats below the running peak the rest is negligible.
  ld term = log_choose(n, k) + static_cast<ld>(k) * lp +
            static_cast<ld>(n - k) * lq;
  ld peak = term;
  ld sum = 1.0L; // in units of exp(peak)
  for (std::size_t i = k; i > 0; --i) {
    const ld next = term + std::log(static_cast<ld>(i) /
                                    static_cast<ld>(n - i + 1)) +
                    lq - lp;
    if (next > peak) {
      sum = sum * std::exp(peak - next) + 1.0L;
      peak = next;
    } else {
      sum += std::exp(next - peak);
      if (next < term && next < peak - 64.0L)
        break;
    }
    term = next;
  }
  return std::min(1.0, static_cast<double>(std::exp(peak + std::log(sum))));
}

double clopper_pearson_upper(std::size_t misses, std::size_t n, double delta) {
  if (n == 0)
    throw InputError("Clopper-Pearson bound needs n >= 1");
  if (misses > n)
    throw InputError("misses exceed the number of trials");
  check_delta(delta);
  if (misses == n)
    return 1.0;
  // CDF is decreasing in p; keep cdf(hi) <= delta < cdf(lo).
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi)
      break;
    if (binomial_cdf(misses, n, mid) <= delta)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

BoxGuarantee box_guarantee(const AbstractionBox &box,
                           std::span<const MonitoredSample> in_box,
                           double delta) {
  check_delta(delta);
  if (in_box.empty())
    throw NoEvidenceError("box " + box.cluster_id +
                          " has no held-out samples and cannot carry a "
                          "guarantee");
  BoxGuarantee g;
  g.cluster_id = box.cluster_id;
  g.polarity = box.polarity;
  g.delta = delta;
  g.evidence = in_box.size();
  for (const auto &s : in_box) {
    if (s.predicted != box.label)
      throw InputError("held-out sample labelled '" + s.predicted +
                       "' used as evidence for box " + box.cluster_id);
    if (!box_contains(box, s.features))
      throw InputError("held-out sample outside box " + box.cluster_id);
    const bool disagrees = (box.polarity == Polarity::Positive) != s.correct;
    if (disagrees)
      ++g.errors;
  }
  g.empirical_error =
      static_cast<double>(g.errors) / static_cast<double>(g.evidence);
  g.epsilon =
      std::min(1.0, g.empirical_error + hoeffding_epsilon(g.evidence, delta));
  return g;
}

CoverageGuarantee coverage_guarantee(const Monitor &monitor,
                                     std::span<const MonitoredSample> holdout,
                                     std::size_t m_min, double delta,
                                     CoverageMethod method) {
  if (holdout.empty())
    throw InputError("coverage guarantee needs a non-empty holdout set");
  if (m_min == 0)
    throw InputError("m_min must be at least 1");
  check_delta(delta);

  CoverageGuarantee g;
  g.n_holdout = holdout.size();
  g.m_min = m_min;
  g.method = method;
  g.delta = delta;
  for (const auto &s : holdout) {
    bool inside = false;
    for (const auto &box : monitor.boxes_for(s.predicted)) {
      if (box.count >= m_min && box_contains(box, s.features)) {
        inside = true;
        break;
      }
    }
    if (!inside) {
      if (s.features.size() != monitor.dimension())
        throw InputError("held-out sample has the wrong dimension");
      ++g.misses;
    }
  }
  if (method == CoverageMethod::ClopperPearson) {
    g.epsilon = clopper_pearson_upper(g.misses, g.n_holdout, delta);
  } else {
    g.epsilon = std::min(1.0, static_cast<double>(g.misses) /
                                      static_cast<double>(g.n_holdout) +
                                  hoeffding_epsilon(g.n_holdout, delta));
  }
  return g;
}

double generalization_error(const std::map<std::string, bool> &correct,
                            const OperationalProfile &profile) {
  double error = 0.0;
  for (const auto &[id, weight] : profile.weights()) {
    const auto it = correct.find(id);
    if (it == correct.end())
      throw InputError("no prediction recorded for profiled input '" + id +
                       "'");
    if (!it->second)
      error += weight;
  }
  return error;
}

} // namespace boxguard
