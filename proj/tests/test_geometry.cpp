#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "boxguard/error.hpp"
#include "boxguard/geometry.hpp"
#include "boxguard/random.hpp"

using namespace boxguard;

namespace {

AbstractionBox unit_box() {
  AbstractionBox b;
  b.center = {0.0, 0.0};
  b.radius = {1.0, 1.0};
  b.cluster_id = "c0";
  b.count = 1;
  b.label = "car";
  return b;
}

std::vector<FeatureVector> random_points(Rng &rng, std::size_t n, std::size_t d) {
  std::vector<FeatureVector> pts(n, FeatureVector(d));
  for (auto &p : pts)
    for (auto &v : p)
      v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(7)) - 3.0);
  return pts;
}

} // namespace

TEST_CASE("box_contains is boundary inclusive") {
  const auto box = unit_box();
  CHECK(box_contains(box, std::vector{0.0, 0.0}));
  CHECK(box_contains(box, std::vector{1.0, 1.0}));
  CHECK(box_contains(box, std::vector{-1.0, 1.0}));
  CHECK_FALSE(box_contains(box, std::vector{1.0001, 0.0}));
  CHECK_FALSE(box_contains(box, std::vector{0.0, -1.5}));
}

TEST_CASE("box_contains rejects dimension mismatch") {
  const auto box = unit_box();
  CHECK_THROWS_AS(box_contains(box, std::vector{0.0}), InputError);
  CHECK_THROWS_AS(box_contains(box, std::vector{0.0, 0.0, 0.0}), InputError);
}

TEST_CASE("box_from_points examples") {
  SUBCASE("two corners") {
    const std::vector<FeatureVector> pts{{0, 0}, {2, 4}};
    const auto b = box_from_points(pts, "c", "car", Polarity::Positive);
    CHECK(b.center == FeatureVector{1, 2});
    CHECK(b.radius == std::vector<double>{1, 2});
    CHECK(b.count == 2);
  }
  SUBCASE("single point gives a degenerate box") {
    const std::vector<FeatureVector> pts{{3, 3}};
    const auto b = box_from_points(pts, "c", "car", Polarity::Negative);
    CHECK(b.center == FeatureVector{3, 3});
    CHECK(b.radius == std::vector<double>{0, 0});
    CHECK(b.count == 1);
    CHECK(b.polarity == Polarity::Negative);
    CHECK(box_contains(b, pts[0]));
  }
  SUBCASE("collinear points") {
    const std::vector<FeatureVector> pts{{-1, 0}, {1, 0}, {0, 0}};
    const auto b = box_from_points(pts, "c", "car", Polarity::Positive);
    CHECK(b.center == FeatureVector{0, 0});
    CHECK(b.radius == std::vector<double>{1, 0});
  }
}

TEST_CASE("box_from_points errors") {
  const std::vector<FeatureVector> none;
  CHECK_THROWS_AS(box_from_points(none, "c", "y", Polarity::Positive), InputError);
  const std::vector<FeatureVector> mixed{{0, 0}, {1}};
  CHECK_THROWS_AS(box_from_points(mixed, "c", "y", Polarity::Positive), InputError);
  const std::vector<FeatureVector> nan{{0, NAN}};
  CHECK_THROWS_AS(box_from_points(nan, "c", "y", Polarity::Positive), InputError);
}

TEST_CASE("box_from_points contains every source point (property)") {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto pts = random_points(rng, 1 + rng.below(30), 1 + rng.below(5));
    const auto b = box_from_points(pts, "c", "y", Polarity::Positive);
    for (const auto &p : pts)
      REQUIRE(box_contains(b, p));
  }
}

TEST_CASE("box_from_points is permutation invariant (property)") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    auto pts = random_points(rng, 2 + rng.below(20), 1 + rng.below(4));
    const auto a = box_from_points(pts, "c", "y", Polarity::Positive);
    for (std::size_t i = pts.size() - 1; i > 0; --i)
      std::swap(pts[i], pts[rng.below(i + 1)]);
    const auto b = box_from_points(pts, "c", "y", Polarity::Positive);
    REQUIRE(a == b);
  }
}

TEST_CASE("box_inflate examples") {
  AbstractionBox b = unit_box();
  b.radius = {1, 2};
  CHECK(box_inflate(b, 0.0).radius == std::vector<double>{1, 2});
  CHECK(box_inflate(b, 0.5).radius == std::vector<double>{1.5, 3});
  b.radius = {0, 0};
  CHECK(box_inflate(b, 1.0, 0.1).radius == std::vector<double>{0.1, 0.1});
  CHECK_THROWS_AS(box_inflate(b, -0.1), InputError);
  CHECK_THROWS_AS(box_inflate(b, 0.0, -1.0), InputError);
}

TEST_CASE("inflation is the identity at zero and monotone in tau (property)") {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pts = random_points(rng, 1 + rng.below(10), 2);
    const auto b = box_from_points(pts, "c", "y", Polarity::Positive);
    REQUIRE(box_inflate(b, 0.0, 0.0) == b);
    const double t1 = rng.uniform();
    const double t2 = t1 + rng.uniform();
    const auto probe = random_points(rng, 20, 2);
    for (const auto &x : probe) {
      if (box_contains(box_inflate(b, t1), x))
        REQUIRE(box_contains(box_inflate(b, t2), x));
      if (box_contains(b, x))
        REQUIRE(box_contains(box_inflate(b, t1), x));
    }
  }
}
