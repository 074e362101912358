#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "boxguard/monitor.hpp"
#include "boxguard/speclang.hpp"
#include "boxguard/stats.hpp"

namespace boxguard {

enum class CompositionMode {
  UnionBound, // sound: eps_cov + max_b eps_b
  MassWeighted // eps_cov + sum_b w_b eps_b with estimated box masses
};

std::string to_string(CompositionMode m);
CompositionMode composition_mode_from_string(const std::string &s);

/// Component-level claim: with probability > 1 - delta over the evidence
/// draw, the component's misprediction probability under the operational
/// distribution is at most epsilon.
struct ComponentGuarantee {
  double epsilon = 1.0;
  double delta = 1.0;
  bool vacuous = true;
  CompositionMode mode = CompositionMode::UnionBound;
  CoverageGuarantee coverage;
  std::vector<BoxGuarantee> boxes;
  std::vector<std::string> no_evidence; // confirmed boxes without evidence
  std::string assumption;
};

struct AtomClaim {
  double epsilon = 0.0;
  double delta = 0.0;
  bool operator==(const AtomClaim &) const = default;
};

struct AtomContribution {
  std::string name;
  AtomLevel level = AtomLevel::Instance;
  AtomClaim claim;
  std::size_t evaluations = 0;
  double delta_contribution = 0.0;
};

struct FormulaGuarantee {
  double epsilon = 0.0;
  double delta = 0.0;
  bool vacuous = false;
  Truth verdict = Truth::Unknown;
  std::vector<AtomContribution> atoms;
  std::size_t evaluations = 0; // total atomic evaluations consumed
};

/**
 * Union-bound composition of a coverage guarantee and per-box guarantees.
 *
 * epsilon = min(1, eps_cov + max_b eps_b^mis) and
 * delta = min(1, delta_cov + sum_b delta_b), where eps_b^mis is the box's
 * misprediction bound (its epsilon for positive boxes). Confirmed boxes
 * listed in `no_evidence` make the claim vacuous.
 */
ComponentGuarantee
compose_component(const CoverageGuarantee &coverage,
                  std::span<const BoxGuarantee> boxes,
                  std::span<const std::string> no_evidence = {},
                  CompositionMode mode = CompositionMode::UnionBound);

FormulaGuarantee
compose_formula(const Formula &formula, Truth trace_verdict,
                const std::map<std::string, AtomClaim> &atom_guarantees,
                const std::map<std::string, std::size_t> &evaluations);

struct AssessConfig {
  std::size_t m_min = 1;
  double delta_cov = 0.05;
  double delta_box = 0.05;
  // Divide delta_box evenly over the confirmed boxes instead of using it
  // per box.
  bool split_box_delta = false;
  CoverageMethod coverage_method = CoverageMethod::ClopperPearson;
  CompositionMode mode = CompositionMode::UnionBound;
};

/**
 * Attributes each held-out sample to the first confirmed box of its
 * predicted label that contains it (canonical box order), so that boxes
 * partition the confirmed region. Result is indexed like
 * monitor.confirmed_boxes(m_min).
 */
std::vector<std::vector<MonitoredSample>>
attribute_evidence(const Monitor &monitor,
                   std::span<const MonitoredSample> holdout, std::size_t m_min);

/// Coverage and per-box guarantees from held-out data, then composition.
ComponentGuarantee assess(const Monitor &monitor,
                          std::span<const MonitoredSample> holdout,
                          const AssessConfig &config);

} // namespace boxguard
