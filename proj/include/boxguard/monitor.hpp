#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boxguard/geometry.hpp"

namespace boxguard {

/// One logged decision of the monitored component.
struct MonitoredSample {
  FeatureVector features;
  std::string predicted;
  bool correct = true;

  bool operator==(const MonitoredSample &) const = default;
};

struct MonitorConfig {
  std::optional<std::size_t> k; // per group; choose_k(group size) when empty
  std::uint64_t seed = 0;
  double tau = 0.0; // multiplicative inflation
  double eta = 0.0; // additive inflation floor
  std::size_t m_min = 1;
  std::size_t max_iter = 100;
  double tol = 1e-9;

  void validate() const;
  bool operator==(const MonitorConfig &) const = default;
};

enum class VerdictKind { Accept, Reject, Uncertain };

std::string to_string(VerdictKind v);

struct Verdict {
  VerdictKind kind = VerdictKind::Uncertain;
  std::vector<std::string> hits; // cluster ids of every box containing x
  bool no_coverage = false;      // true when no box of the label contains x
};

struct GroupCounts {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  bool operator==(const GroupCounts &) const = default;
};

/**
 * Box-abstraction runtime monitor.
 *
 * Boxes are stored per predicted label, positive boxes first, each polarity
 * in cluster order. Immutable once built.
 */
class Monitor {
public:
  Monitor(std::size_t dimension, MonitorConfig config,
          std::vector<AbstractionBox> boxes,
          std::map<std::string, GroupCounts> provenance);

  std::size_t dimension() const { return dimension_; }
  const MonitorConfig &config() const { return config_; }
  const std::map<std::string, GroupCounts> &provenance() const {
    return provenance_;
  }

  /// All boxes in canonical order (label, polarity, cluster).
  const std::vector<AbstractionBox> &boxes() const { return boxes_; }

  /// Boxes whose label equals `label`, in canonical order; empty if unknown.
  std::span<const AbstractionBox> boxes_for(const std::string &label) const;

  Verdict query(std::span<const double> x, const std::string &predicted) const;

  /// Boxes with count >= m_min.
  std::vector<AbstractionBox> confirmed_boxes(std::size_t m_min) const;

  bool operator==(const Monitor &other) const;

private:
  std::size_t dimension_;
  MonitorConfig config_;
  std::vector<AbstractionBox> boxes_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> ranges_;
  std::map<std::string, GroupCounts> provenance_;
};

/**
 * Builds a monitor: samples are sorted canonically, grouped by predicted
 * label and split by correctness; each group is clustered and every cluster
 * becomes one (inflated) box of that label and polarity.
 */
Monitor build_monitor(std::span<const MonitoredSample> samples,
                      const MonitorConfig &config);

/// Free-function form of Monitor::query.
Verdict monitor_query(const Monitor &monitor, std::span<const double> x,
                      const std::string &predicted);

std::vector<AbstractionBox> confirmed_boxes(const Monitor &monitor,
                                            std::size_t m_min);

} // namespace boxguard
