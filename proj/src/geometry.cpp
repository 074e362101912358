#include "boxguard/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "boxguard/error.hpp"

namespace boxguard {

std::string to_string(Polarity p) {
  return p == Polarity::Positive ? "positive" : "negative";
}

Polarity polarity_from_string(const std::string &s) {
  if (s == "positive")
    return Polarity::Positive;
  if (s == "negative")
    return Polarity::Negative;
  throw InputError("unknown polarity '" + s + "'");
}

void check_feature_vector(std::span<const double> x) {
  if (x.empty())
    throw InputError("feature vector must have at least one dimension");
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j]))
      throw InputError("feature " + std::to_string(j) + " is not finite");
  }
}

bool box_contains(const AbstractionBox &box, std::span<const double> x) {
  if (x.size() != box.center.size())
    throw InputError("dimension mismatch: box has " +
                     std::to_string(box.center.size()) + ", point has " +
                     std::to_string(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(std::abs(x[j] - box.center[j]) <= box.radius[j]))
      return false;
  }
  return true;
}

AbstractionBox box_from_points(std::span<const FeatureVector> points,
                               std::string cluster_id, std::string label,
                               Polarity polarity) {
  if (points.empty())
    throw InputError("cannot build a box from an empty point set");
  const std::size_t d = points.front().size();
  check_feature_vector(points.front());
  FeatureVector lo = points.front();
  FeatureVector hi = points.front();
  for (const auto &p : points.subspan(1)) {
    if (p.size() != d)
      throw InputError("points have mixed dimensions");
    check_feature_vector(p);
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  }

  AbstractionBox box;
  box.center.resize(d);
  box.radius.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    box.center[j] = lo[j] + (hi[j] - lo[j]) / 2.0;
    box.radius[j] = (hi[j] - lo[j]) / 2.0;
    // Rounding in the centre can leave an extreme point a few ulps outside.
    const double reach = std::max(box.center[j] - lo[j], hi[j] - box.center[j]);
    while (box.radius[j] < reach)
      box.radius[j] = std::nextafter(box.radius[j], INFINITY);
  }
  box.cluster_id = std::move(cluster_id);
  box.count = points.size();
  box.label = std::move(label);
  box.polarity = polarity;
  return box;
}

AbstractionBox box_inflate(const AbstractionBox &box, double scale,
                           double floor) {
  if (!(scale >= 0.0) || !std::isfinite(scale))
    throw InputError("inflation scale must be a finite non-negative number");
  if (!(floor >= 0.0) || !std::isfinite(floor))
    throw InputError("inflation floor must be a finite non-negative number");
  AbstractionBox out = box;
  for (auto &r : out.radius)
    r = r * (1.0 + scale) + floor;
  return out;
}

} // namespace boxguard
