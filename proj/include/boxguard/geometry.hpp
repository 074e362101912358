#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace boxguard {

using FeatureVector = std::vector<double>;

enum class Polarity { Positive, Negative };

std::string to_string(Polarity p);
Polarity polarity_from_string(const std::string &s);

/// Throws InputError unless x is non-empty and every entry is finite.
void check_feature_vector(std::span<const double> x);

/**
 * Axis-aligned closed box abstracting one cluster of observed feature
 * vectors: centre, per-dimension radius, cluster id, number of abstracted
 * samples, predicted label and polarity.
 */
struct AbstractionBox {
  FeatureVector center;
  std::vector<double> radius;
  std::string cluster_id;
  std::size_t count = 0;
  std::string label;
  Polarity polarity = Polarity::Positive;

  std::size_t dimension() const { return center.size(); }

  bool operator==(const AbstractionBox &) const = default;
};

/// Boundary-inclusive membership. Throws InputError on dimension mismatch.
bool box_contains(const AbstractionBox &box, std::span<const double> x);

/// Tightest enclosing box of a non-empty point set.
AbstractionBox box_from_points(std::span<const FeatureVector> points,
                               std::string cluster_id, std::string label,
                               Polarity polarity);

/// r'[j] = r[j] * (1 + scale) + floor
AbstractionBox box_inflate(const AbstractionBox &box, double scale,
                           double floor = 0.0);

} // namespace boxguard
