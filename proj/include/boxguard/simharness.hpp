#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "boxguard/guarantee.hpp"
#include "boxguard/monitor.hpp"

namespace boxguard {

struct MixtureComponent {
  std::string label;
  double weight = 0.0;
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Diagonal Gaussian mixture with per-class label noise: a sample of class c
/// is mispredicted as a uniformly chosen other class with probability
/// noise[c].
struct SyntheticDistribution {
  std::vector<MixtureComponent> components;
  std::map<std::string, double> noise;

  void validate() const;
  std::size_t dimension() const;
  std::vector<std::string> classes() const;
  /// Exact misprediction probability implied by the noise map.
  double misprediction_rate() const;
};

std::vector<MonitoredSample> gen_samples(const SyntheticDistribution &dist,
                                         std::uint64_t seed, std::size_t n);

enum class OracleRegion {
  WholeSpace,
  ConfirmedBoxes // inputs inside a confirmed positive box of their label
};

struct ErrorEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t hits = 0; // draws inside the region
  std::size_t draws = 0;
};

/// Fresh Monte Carlo estimate of the misprediction probability, optionally
/// conditional on the region. Needs n_mc >= 10^4; throws NoMassError when
/// the region receives no draw.
ErrorEstimate true_error_oracle(const SyntheticDistribution &dist,
                                const Monitor &monitor, OracleRegion region,
                                std::size_t n_mc, std::uint64_t seed,
                                std::size_t m_min = 1);

struct ValidationProtocol {
  std::size_t n_train = 2000;
  std::size_t n_holdout = 1000;
  std::size_t n_mc = 10000;
  MonitorConfig monitor;
  AssessConfig assess;
};

/// Seeds for one run, derived from the master seed; all three differ.
struct RunSeeds {
  std::uint64_t train = 0;
  std::uint64_t holdout = 0;
  std::uint64_t oracle = 0;

  static RunSeeds derive(std::uint64_t master, std::size_t run);
  void check() const; // throws if any two streams coincide
};

struct RunRecord {
  std::size_t run = 0;
  std::string status; // "ok", "no_evidence" or an error message
  bool claimed = false;
  double epsilon = 1.0;
  double delta = 1.0;
  bool vacuous = true;
  double true_error = 0.0;
  double std_error = 0.0;
  bool violated = false;
};

struct ValidationReport {
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  std::size_t claims = 0;     // runs that produced a composed guarantee
  std::size_t violations = 0; // claims whose true error exceeds epsilon
  std::size_t failed = 0;     // runs that raised an error
  double mean_delta = 0.0;
  double threshold = 0.0; // mean_delta + 3 sqrt(mean_delta (1 - mean_delta) / claims)
  bool sound = false;
  std::vector<RunRecord> records;
};

ValidationReport validate_guarantee(const SyntheticDistribution &dist,
                                    const ValidationProtocol &protocol,
                                    std::size_t runs, std::uint64_t seed);

} // namespace boxguard
