#include "boxguard/guarantee.hpp"

#include <algorithm>

#include "boxguard/error.hpp"

namespace boxguard {

std::string to_string(CompositionMode m) {
  return m == CompositionMode::UnionBound ? "union_bound" : "mass_weighted";
}

CompositionMode composition_mode_from_string(const std::string &s) {
  if (s == "union_bound")
    return CompositionMode::UnionBound;
  if (s == "mass_weighted")
    return CompositionMode::MassWeighted;
  throw InputError("unknown composition mode '" + s + "'");
}

ComponentGuarantee compose_component(const CoverageGuarantee &coverage,
                                     std::span<const BoxGuarantee> boxes,
                                     std::span<const std::string> no_evidence,
                                     CompositionMode mode) {
  if (boxes.empty() && no_evidence.empty())
    throw NoEvidenceError("no box guarantees to compose");

  ComponentGuarantee g;
  g.mode = mode;
  g.coverage = coverage;
  g.boxes.assign(boxes.begin(), boxes.end());
  g.no_evidence.assign(no_evidence.begin(), no_evidence.end());

  double inside = 0.0;
  double delta = coverage.delta;
  if (mode == CompositionMode::UnionBound) {
    for (const auto &b : boxes) {
      inside = std::max(inside, b.misprediction_bound());
      delta += b.delta;
    }
    g.assumption =
        "held-out samples are i.i.d. draws from the operational distribution "
        "and disjoint from the monitor's construction data; union bound over "
        "the coverage event and every per-box event";
  } else {
    std::size_t total = 0;
    for (const auto &b : boxes)
      total += b.evidence;
    for (const auto &b : boxes) {
      inside += static_cast<double>(b.evidence) / static_cast<double>(total) *
                b.misprediction_bound();
      delta += b.delta;
    }
    g.assumption =
        "uses box masses estimated from the holdout; not covered by the "
        "soundness argument";
  }
  if (!no_evidence.empty())
    inside = 1.0;

  g.epsilon = std::min(1.0, coverage.epsilon + inside);
  g.delta = std::min(1.0, delta);
  g.vacuous = g.epsilon >= 1.0 || g.delta >= 1.0;
  return g;
}

FormulaGuarantee
compose_formula(const Formula &formula, Truth trace_verdict,
                const std::map<std::string, AtomClaim> &atom_guarantees,
                const std::map<std::string, std::size_t> &evaluations) {
  FormulaGuarantee g;
  g.verdict = trace_verdict;
  double delta = 0.0;
  for (const auto &atom : atoms_of(formula)) {
    const auto claim = atom_guarantees.find(atom.name);
    if (claim == atom_guarantees.end())
      throw InputError("atom '" + atom.name + "' has no guarantee");
    const auto count = evaluations.find(atom.name);
    AtomContribution c;
    c.name = atom.name;
    c.level = atom.level;
    c.claim = claim->second;
    c.evaluations = count == evaluations.end() ? 0 : count->second;
    if (atom.level == AtomLevel::Model)
      c.delta_contribution = c.evaluations > 0 ? c.claim.delta : 0.0;
    else
      c.delta_contribution = static_cast<double>(c.evaluations) * c.claim.delta;
    if (c.evaluations > 0)
      g.epsilon = std::max(g.epsilon, c.claim.epsilon);
    delta += c.delta_contribution;
    g.evaluations += c.evaluations;
    g.atoms.push_back(std::move(c));
  }
  g.delta = std::min(1.0, delta);
  g.vacuous = g.epsilon >= 1.0 || g.delta >= 1.0;
  return g;
}

std::vector<std::vector<MonitoredSample>>
attribute_evidence(const Monitor &monitor,
                   std::span<const MonitoredSample> holdout,
                   std::size_t m_min) {
  const auto confirmed = monitor.confirmed_boxes(m_min);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < confirmed.size(); ++i)
    index[confirmed[i].cluster_id] = i;

  std::vector<std::vector<MonitoredSample>> cells(confirmed.size());
  for (const auto &s : holdout) {
    if (s.features.size() != monitor.dimension())
      throw InputError("held-out sample has the wrong dimension");
    for (const auto &box : monitor.boxes_for(s.predicted)) {
      if (box.count >= m_min && box_contains(box, s.features)) {
        cells[index.at(box.cluster_id)].push_back(s);
        break;
      }
    }
  }
  return cells;
}

ComponentGuarantee assess(const Monitor &monitor,
                          std::span<const MonitoredSample> holdout,
                          const AssessConfig &config) {
  const auto coverage = coverage_guarantee(monitor, holdout, config.m_min,
                                           config.delta_cov,
                                           config.coverage_method);
  const auto confirmed = monitor.confirmed_boxes(config.m_min);
  if (confirmed.empty()) {
    // Every held-out sample is a miss; nothing inside to compose.
    ComponentGuarantee g;
    g.mode = config.mode;
    g.coverage = coverage;
    g.epsilon = 1.0;
    g.delta = coverage.delta;
    g.vacuous = true;
    g.assumption = "monitor has no confirmed boxes";
    return g;
  }

  const double delta_b =
      config.split_box_delta
          ? config.delta_box / static_cast<double>(confirmed.size())
          : config.delta_box;
  const auto cells = attribute_evidence(monitor, holdout, config.m_min);
  std::vector<BoxGuarantee> boxes;
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < confirmed.size(); ++i) {
    if (cells[i].empty())
      missing.push_back(confirmed[i].cluster_id);
    else
      boxes.push_back(box_guarantee(confirmed[i], cells[i], delta_b));
  }
  return compose_component(coverage, boxes, missing, config.mode);
}

} // namespace boxguard
