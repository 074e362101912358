#include "boxguard/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "boxguard/clustering.hpp"
#include "boxguard/error.hpp"

namespace boxguard {

void MonitorConfig::validate() const {
  if (k && *k == 0)
    throw InputError("monitor k must be at least 1");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw InputError("tau must be a finite non-negative number");
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw InputError("eta must be a finite non-negative number");
  if (m_min == 0)
    throw InputError("m_min must be at least 1");
  if (!(tol > 0.0))
    throw InputError("clustering tolerance must be positive");
}

std::string to_string(VerdictKind v) {
  switch (v) {
  case VerdictKind::Accept:
    return "accept";
  case VerdictKind::Reject:
    return "reject";
  case VerdictKind::Uncertain:
    return "uncertain";
  }
  return "uncertain";
}

Monitor::Monitor(std::size_t dimension, MonitorConfig config,
                 std::vector<AbstractionBox> boxes,
                 std::map<std::string, GroupCounts> provenance)
    : dimension_(dimension), config_(std::move(config)),
      boxes_(std::move(boxes)), provenance_(std::move(provenance)) {
  if (dimension_ == 0)
    throw InputError("monitor dimension must be at least 1");
  config_.validate();
  for (const auto &b : boxes_) {
    if (b.center.size() != dimension_ || b.radius.size() != dimension_)
      throw InputError("box " + b.cluster_id + " has the wrong dimension");
    if (b.count == 0)
      throw InputError("box " + b.cluster_id + " abstracts no samples");
    for (double r : b.radius) {
      if (!(r >= 0.0))
        throw InputError("box " + b.cluster_id + " has a negative radius");
    }
  }
  std::stable_sort(boxes_.begin(), boxes_.end(),
                   [](const AbstractionBox &a, const AbstractionBox &b) {
                     if (a.label != b.label)
                       return a.label < b.label;
                     return a.polarity == Polarity::Positive &&
                            b.polarity == Polarity::Negative;
                   });
  for (std::size_t i = 0; i < boxes_.size();) {
    std::size_t j = i;
    while (j < boxes_.size() && boxes_[j].label == boxes_[i].label)
      ++j;
    ranges_[boxes_[i].label] = {i, j};
    i = j;
  }
}

std::span<const AbstractionBox>
Monitor::boxes_for(const std::string &label) const {
  const auto it = ranges_.find(label);
  if (it == ranges_.end())
    return {};
  return std::span(boxes_).subspan(it->second.first,
                                   it->second.second - it->second.first);
}

Verdict Monitor::query(std::span<const double> x,
                       const std::string &predicted) const {
  if (x.size() != dimension_)
    throw InputError("query has dimension " + std::to_string(x.size()) +
                     ", monitor has " + std::to_string(dimension_));
  Verdict v;
  bool positive = false;
  bool negative = false;
  for (const auto &box : boxes_for(predicted)) {
    if (box_contains(box, x)) {
      v.hits.push_back(box.cluster_id);
      (box.polarity == Polarity::Positive ? positive : negative) = true;
    }
  }
  v.no_coverage = v.hits.empty();
  if (positive && !negative)
    v.kind = VerdictKind::Accept;
  else if (negative && !positive)
    v.kind = VerdictKind::Reject;
  else
    v.kind = VerdictKind::Uncertain;
  return v;
}

std::vector<AbstractionBox> Monitor::confirmed_boxes(std::size_t m_min) const {
  if (m_min == 0)
    throw InputError("m_min must be at least 1");
  std::vector<AbstractionBox> out;
  for (const auto &b : boxes_) {
    if (b.count >= m_min)
      out.push_back(b);
  }
  return out;
}

bool Monitor::operator==(const Monitor &other) const {
  return dimension_ == other.dimension_ && config_ == other.config_ &&
         boxes_ == other.boxes_ && provenance_ == other.provenance_;
}

Monitor build_monitor(std::span<const MonitoredSample> samples,
                      const MonitorConfig &config) {
  if (samples.empty())
    throw InputError("cannot build a monitor from an empty sample set");
  config.validate();
  const std::size_t d = samples.front().features.size();
  for (const auto &s : samples) {
    if (s.features.size() != d)
      throw InputError("samples have mixed dimensions");
    check_feature_vector(s.features);
    if (s.predicted.empty())
      throw InputError("sample has an empty predicted label");
  }

  std::vector<const MonitoredSample *> order;
  order.reserve(samples.size());
  for (const auto &s : samples)
    order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const MonitoredSample *a, const MonitoredSample *b) {
              if (a->features != b->features)
                return a->features < b->features;
              if (a->predicted != b->predicted)
                return a->predicted < b->predicted;
              return a->correct < b->correct;
            });

  struct Group {
    std::vector<FeatureVector> correct;
    std::vector<FeatureVector> incorrect;
  };
  std::map<std::string, Group> groups;
  for (const auto *s : order) {
    auto &g = groups[s->predicted];
    (s->correct ? g.correct : g.incorrect).push_back(s->features);
  }

  std::vector<AbstractionBox> boxes;
  std::map<std::string, GroupCounts> provenance;
  for (const auto &[label, group] : groups) {
    provenance[label] = {group.correct.size(), group.incorrect.size()};
    for (const Polarity polarity : {Polarity::Positive, Polarity::Negative}) {
      const auto &points =
          polarity == Polarity::Positive ? group.correct : group.incorrect;
      if (points.empty())
        continue;
      KMeansOptions options;
      options.k = std::min(config.k.value_or(choose_k(points.size())),
                           points.size());
      options.seed = config.seed;
      options.max_iter = config.max_iter;
      options.tol = config.tol;
      const auto clusters = kmeans(points, options);

      std::vector<std::vector<FeatureVector>> members(clusters.k);
      for (std::size_t i = 0; i < points.size(); ++i)
        members[clusters.assignments[i]].push_back(points[i]);
      const std::string prefix =
          label + (polarity == Polarity::Positive ? "/pos/" : "/neg/");
      for (std::size_t c = 0; c < clusters.k; ++c) {
        auto box = box_from_points(members[c], prefix + std::to_string(c),
                                   label, polarity);
        boxes.push_back(box_inflate(box, config.tau, config.eta));
      }
    }
  }
  return Monitor(d, config, std::move(boxes), std::move(provenance));
}

Verdict monitor_query(const Monitor &monitor, std::span<const double> x,
                      const std::string &predicted) {
  return monitor.query(x, predicted);
}

std::vector<AbstractionBox> confirmed_boxes(const Monitor &monitor,
                                            std::size_t m_min) {
  return monitor.confirmed_boxes(m_min);
}

} // namespace boxguard
