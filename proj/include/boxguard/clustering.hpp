#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "boxguard/geometry.hpp"

namespace boxguard {

struct ClusteringResult {
  std::vector<std::size_t> assignments; // one per input point, input order
  std::vector<FeatureVector> centroids;
  std::size_t k = 0; // non-empty clusters actually produced
  std::size_t iterations = 0;
  bool converged = false;
};

struct KMeansOptions {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-9;
};

/**
 * Lloyd's k-means with farthest-point seeding.
 *
 * The first centre is a seeded uniform pick; each further centre is the point
 * farthest from the centres chosen so far (lowest index on ties). Clusters
 * that become empty are dropped, so the result may have fewer than k
 * clusters. Stops when no centroid moves by tol or more, or after max_iter.
 */
ClusteringResult kmeans(std::span<const FeatureVector> points,
                        const KMeansOptions &options);

/// Within-cluster sum of squared distances.
double within_cluster_ss(std::span<const FeatureVector> points,
                         const ClusteringResult &result);

/// Default cluster count for a group of n samples: max(1, floor(sqrt(n/2))).
std::size_t choose_k(std::size_t n);

} // namespace boxguard
