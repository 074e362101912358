#include <doctest.h>

#include "boxguard/clustering.hpp"
#include "boxguard/error.hpp"
#include "boxguard/random.hpp"
#include "oracles.hpp"

using namespace boxguard;

TEST_CASE("kmeans on a single point") {
  const std::vector<FeatureVector> pts{{5, 5}};
  const auto r = kmeans(pts, {.k = 1});
  CHECK(r.k == 1);
  CHECK(r.centroids == std::vector<FeatureVector>{{5, 5}});
  CHECK(r.assignments == std::vector<std::size_t>{0});
  CHECK(r.converged);
}

TEST_CASE("kmeans separates two pairs") {
  const std::vector<FeatureVector> pts{{0, 0}, {0.1, 0}, {10, 10}, {10.1, 10}};
  // Frozen from the exhaustive 2-partition oracle: {0,1} vs {2,3}.
  const auto expected = oracle::best_partition(pts, 2);
  REQUIRE(oracle::same_partition(expected, {0, 0, 1, 1}));
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto r = kmeans(pts, {.k = 2, .seed = seed});
    CHECK(r.k == 2);
    CHECK(oracle::same_partition(r.assignments, expected));
    const auto &low = r.centroids[r.assignments[0]];
    const auto &high = r.centroids[r.assignments[2]];
    CHECK(low[0] == doctest::Approx(0.05));
    CHECK(low[1] == doctest::Approx(0.0));
    CHECK(high[0] == doctest::Approx(10.05));
    CHECK(high[1] == doctest::Approx(10.0));
  }
}

TEST_CASE("kmeans with k equal to n gives singletons") {
  const std::vector<FeatureVector> pts{{0, 0}, {1, 1}};
  const auto r = kmeans(pts, {.k = 2, .seed = 3});
  CHECK(r.k == 2);
  CHECK(r.assignments[0] != r.assignments[1]);
  CHECK(r.centroids[r.assignments[0]] == pts[0]);
  CHECK(r.centroids[r.assignments[1]] == pts[1]);
}

TEST_CASE("kmeans drops empty clusters") {
  const std::vector<FeatureVector> pts{{1, 1}, {1, 1}, {1, 1}};
  const auto r = kmeans(pts, {.k = 3});
  CHECK(r.k == 1);
  CHECK(r.centroids.size() == 1);
  for (auto a : r.assignments)
    CHECK(a == 0);
}

TEST_CASE("kmeans errors") {
  const std::vector<FeatureVector> pts{{0}, {1}};
  CHECK_THROWS_AS(kmeans(pts, {.k = 0}), InputError);
  CHECK_THROWS_AS(kmeans(pts, {.k = 3}), InputError);
  const std::vector<FeatureVector> none;
  CHECK_THROWS_AS(kmeans(none, {.k = 1}), InputError);
  const std::vector<FeatureVector> mixed{{0}, {1, 2}};
  CHECK_THROWS_AS(kmeans(mixed, {.k = 1}), InputError);
}

TEST_CASE("choose_k") {
  CHECK(choose_k(1) == 1);
  CHECK(choose_k(3) == 1);
  CHECK(choose_k(200) == 10);
  CHECK(choose_k(8) == 2);
  CHECK_THROWS_AS(choose_k(0), InputError);
}

TEST_CASE("kmeans is deterministic and centroids are cluster means (property)") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<FeatureVector> pts(n, FeatureVector(3));
    for (auto &p : pts)
      for (auto &v : p)
        v = rng.normal() * 5.0;
    const KMeansOptions opt{.k = 1 + rng.below(std::min<std::size_t>(n, 6)),
                            .seed = rng.next()};
    const auto a = kmeans(pts, opt);
    const auto b = kmeans(pts, opt);
    REQUIRE(a.assignments == b.assignments);
    REQUIRE(a.centroids == b.centroids);
    REQUIRE(a.k <= opt.k);
    for (std::size_t c = 0; c < a.k; ++c) {
      FeatureVector mean(3, 0.0);
      std::size_t size = 0;
      for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(a.assignments[i] < a.k);
        if (a.assignments[i] != c)
          continue;
        ++size;
        for (int j = 0; j < 3; ++j)
          mean[j] += pts[i][j];
      }
      REQUIRE(size > 0);
      for (int j = 0; j < 3; ++j)
        REQUIRE(a.centroids[c][j] ==
                doctest::Approx(mean[j] / static_cast<double>(size)));
    }
  }
}

TEST_CASE("kmeans recovers the optimum on well-separated instances (property)") {
  Rng rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = 1 + rng.below(3);
    const std::size_t n = k + rng.below(12 - k + 1);
    std::vector<FeatureVector> centres(k);
    for (std::size_t c = 0; c < k; ++c)
      centres[c] = {100.0 * static_cast<double>(c), 50.0 * static_cast<double>(c % 2)};
    std::vector<FeatureVector> pts;
    for (std::size_t i = 0; i < n; ++i) {
      const auto &c = centres[i < k ? i : rng.below(k)];
      pts.push_back({c[0] + rng.uniform(), c[1] + rng.uniform()});
    }
    const auto best = oracle::best_partition(pts, k);
    const auto r = kmeans(pts, {.k = k, .seed = rng.next()});
    REQUIRE(oracle::same_partition(r.assignments, best));
  }
}
