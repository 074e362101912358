#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "boxguard/geometry.hpp"
#include "boxguard/monitor.hpp"

namespace boxguard {

/// Per-box (epsilon, delta) claim built from held-out samples in the box.
///
/// An error is a held-out sample whose actual correctness disagrees with the
/// box polarity: an incorrect prediction in a positive box, or a correct one
/// in a negative box.
struct BoxGuarantee {
  std::string cluster_id;
  Polarity polarity = Polarity::Positive;
  std::size_t evidence = 0; // held-out samples in the box (m_b)
  std::size_t errors = 0;
  double empirical_error = 0.0;
  double epsilon = 1.0;
  double delta = 0.0;

  /// Upper bound on the component's misprediction rate inside the box, at
  /// the same delta. Equals epsilon for positive boxes.
  double misprediction_bound() const;
};

enum class CoverageMethod { ClopperPearson, Hoeffding };

std::string to_string(CoverageMethod m);
CoverageMethod coverage_method_from_string(const std::string &s);

struct CoverageGuarantee {
  std::size_t n_holdout = 0;
  std::size_t misses = 0;
  std::size_t m_min = 1;
  CoverageMethod method = CoverageMethod::ClopperPearson;
  double epsilon = 1.0;
  double delta = 0.0;
};

/// Probability distribution over named inputs.
class OperationalProfile {
public:
  explicit OperationalProfile(std::map<std::string, double> weights);

  const std::map<std::string, double> &weights() const { return weights_; }

private:
  std::map<std::string, double> weights_;
};

/// sqrt(ln(1/delta) / (2m)); one-sided Hoeffding deviation of a [0,1] mean.
double hoeffding_epsilon(std::size_t m, double delta);

/// P(X <= k) for X ~ Binomial(n, p), summed in log space.
double binomial_cdf(std::size_t k, std::size_t n, double p);

/// Smallest p with P(Binomial(n, p) <= misses) <= delta (exact one-sided
/// upper confidence bound).
double clopper_pearson_upper(std::size_t misses, std::size_t n, double delta);

/// Guarantee for `box` from held-out samples that fall inside it. Every
/// sample must carry the box label and lie in the box.
BoxGuarantee box_guarantee(const AbstractionBox &box,
                           std::span<const MonitoredSample> in_box,
                           double delta);

/// Bound on the probability that a fresh input lands in no confirmed box of
/// its predicted label. The holdout must be disjoint from the data the
/// monitor was built from.
CoverageGuarantee
coverage_guarantee(const Monitor &monitor,
                   std::span<const MonitoredSample> holdout, std::size_t m_min,
                   double delta,
                   CoverageMethod method = CoverageMethod::ClopperPearson);

/// Sum of profile weights over inputs the component gets wrong.
double generalization_error(const std::map<std::string, bool> &correct,
                            const OperationalProfile &profile);

} // namespace boxguard
