#include "boxguard/clustering.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "boxguard/error.hpp"
#include "boxguard/random.hpp"

namespace boxguard {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

std::vector<FeatureVector> seed_centroids(std::span<const FeatureVector> points,
                                          std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.below(points.size())]);

  std::vector<double> nearest(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    nearest[i] = squared_distance(points[i], centroids.front());

  while (centroids.size() < k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (nearest[i] > nearest[best])
        best = i;
    }
    centroids.push_back(points[best]);
    for (std::size_t i = 0; i < points.size(); ++i)
      nearest[i] = std::min(nearest[i], squared_distance(points[i], points[best]));
  }
  return centroids;
}

void assign(std::span<const FeatureVector> points,
            std::span<const FeatureVector> centroids,
            std::vector<std::size_t> &assignments) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignments[i] = best;
  }
}

// Recomputes centroids as cluster means, removing empty clusters and
// renumbering assignments. Returns the largest centroid displacement among
// surviving clusters.
double update(std::span<const FeatureVector> points,
              std::vector<FeatureVector> &centroids,
              std::vector<std::size_t> &assignments) {
  const std::size_t d = points.front().size();
  std::vector<FeatureVector> sums(centroids.size(), FeatureVector(d, 0.0));
  std::vector<std::size_t> sizes(centroids.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto &s = sums[assignments[i]];
    for (std::size_t j = 0; j < d; ++j)
      s[j] += points[i][j];
    ++sizes[assignments[i]];
  }

  std::vector<std::size_t> renumber(centroids.size());
  std::vector<FeatureVector> next;
  double shift = 0.0;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    if (sizes[c] == 0)
      continue;
    renumber[c] = next.size();
    for (auto &v : sums[c])
      v /= static_cast<double>(sizes[c]);
    shift = std::max(shift, std::sqrt(squared_distance(sums[c], centroids[c])));
    next.push_back(std::move(sums[c]));
  }
  for (auto &a : assignments)
    a = renumber[a];
  centroids = std::move(next);
  return shift;
}

} // namespace

double within_cluster_ss(std::span<const FeatureVector> points,
                         const ClusteringResult &result) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    total += squared_distance(points[i], result.centroids[result.assignments[i]]);
  return total;
}

ClusteringResult kmeans(std::span<const FeatureVector> points,
                        const KMeansOptions &options) {
  if (points.empty())
    throw InputError("k-means needs at least one point");
  if (options.k == 0)
    throw InputError("k must be at least 1");
  if (options.k > points.size())
    throw InputError("k (" + std::to_string(options.k) +
                     ") exceeds the number of points (" +
                     std::to_string(points.size()) + ")");
  if (!(options.tol > 0.0))
    throw InputError("k-means tolerance must be positive");
  const std::size_t d = points.front().size();
  for (const auto &p : points) {
    if (p.size() != d)
      throw InputError("points have mixed dimensions");
    check_feature_vector(p);
  }

  ClusteringResult result;
  result.centroids = seed_centroids(points, options.k, options.seed);
  result.assignments.assign(points.size(), 0);

#ifndef NDEBUG
  double previous_ss = std::numeric_limits<double>::infinity();
#endif
  // max_iter == 0 still yields one assignment so the result is well-formed.
  const std::size_t rounds = std::max<std::size_t>(options.max_iter, 1);
  for (std::size_t it = 0; it < rounds; ++it) {
    assign(points, result.centroids, result.assignments);
    const double shift = update(points, result.centroids, result.assignments);
    result.iterations = it + 1;
#ifndef NDEBUG
    const double ss = within_cluster_ss(points, result);
    assert(ss <= previous_ss * (1.0 + 1e-12) + 1e-12);
    previous_ss = ss;
#endif
    if (shift < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.k = result.centroids.size();
  return result;
}

std::size_t choose_k(std::size_t n) {
  if (n == 0)
    throw InputError("choose_k needs n >= 1");
  const auto k = static_cast<std::size_t>(
      std::floor(std::sqrt(static_cast<double>(n) / 2.0)));
  return std::min(std::max<std::size_t>(k, 1), n);
}

} // namespace boxguard
