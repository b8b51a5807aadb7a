#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "conley/rng.hpp"
#include "conley/sampler.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace conley;

TEST_CASE("saddle sample: every point lies in N and X_minus is exact") {
  const IndexPairSpec& spec = fixtures::saddle();
  const PointSamplePair s = sample_index_pair(spec, 500, 7);
  REQUIRE(s.size() == 500);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const PairLabel label = classify_point(spec, s.points[i]);
    CHECK(label != PairLabel::Outside);
    CHECK((label == PairLabel::InNminus) == (s.in_minus[i] != 0));
  }
  CHECK(s.minus_count() == s.minus_points().size());
  CHECK(s.seed == 7);
}

TEST_CASE("sampler preconditions and determinism") {
  const IndexPairSpec& spec = fixtures::saddle();
  CHECK_THROWS_AS(sample_index_pair(spec, 0, 1), std::invalid_argument);
  const PointSamplePair a = sample_index_pair(spec, 300, 42), b = sample_index_pair(spec, 300, 42);
  CHECK(a.points == b.points);
  CHECK(a.in_minus == b.in_minus);
  CHECK(sample_index_pair(spec, 300, 43).points != a.points);
  // A prefix of a longer run is the shorter run.
  const PointSamplePair longer = sample_index_pair(spec, 400, 42);
  CHECK(std::equal(a.points.begin(), a.points.end(), longer.points.begin()));
}

TEST_CASE("rejection stall on a vanishing target") {
  const Box box{{0, 0}, {1, 1}};
  const auto tiny = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] < 1e-12; };
  CHECK_THROWS_AS(sample_predicate(box, tiny, 10, 1), RejectionStall);
}

TEST_CASE("uniformity: chi-square over a 4x4 partition of the saddle box") {
  const IndexPairSpec& spec = fixtures::saddle();
  const int n = 10000;
  const PointSamplePair s = sample_index_pair(spec, n, 3);
  const Box& box = spec.region.box;

  // Cell areas of N by a fine midpoint grid.
  const int fine = 400;
  std::vector<double> area(16, 0.0);
  double total = 0;
  std::vector<double> x(2);
  for (int i = 0; i < fine; ++i)
    for (int j = 0; j < fine; ++j) {
      x[0] = box.lo[0] + (i + 0.5) * box.width(0) / fine;
      x[1] = box.lo[1] + (j + 0.5) * box.width(1) / fine;
      if (classify_point(spec, x) == PairLabel::Outside) continue;
      area[(i * 4 / fine) * 4 + j * 4 / fine] += 1;
      total += 1;
    }
  std::vector<int> count(16, 0);
  for (const auto& p : s.points) {
    const int i = std::min(3, static_cast<int>((p[0] - box.lo[0]) / box.width(0) * 4));
    const int j = std::min(3, static_cast<int>((p[1] - box.lo[1]) / box.width(1) * 4));
    ++count[i * 4 + j];
  }
  double chi2 = 0;
  int cells = 0;
  for (int c = 0; c < 16; ++c) {
    if (area[c] == 0) {
      CHECK(count[c] == 0);
      continue;
    }
    const double expected = n * area[c] / total;
    chi2 += (count[c] - expected) * (count[c] - expected) / expected;
    ++cells;
  }
  const boost::math::chi_squared dist(cells - 1);
  CHECK(chi2 < boost::math::quantile(boost::math::complement(dist, 0.001)));
}

TEST_CASE("density certification") {
  const Box box{{0, 0}, {1, 1}};
  const auto all = [](std::span<const double>) { return true; };

  SUBCASE("a fine grid covers itself") {
    const double pitch = 0.02;
    std::vector<Point> grid;
    for (int i = 0; i <= 50; ++i)
      for (int j = 0; j <= 50; ++j) grid.push_back({i * pitch, j * pitch});
    const DensityResult r = certify_density(grid, all, box, 8 * pitch, 2 * pitch);
    CHECK(r.certified);
    CHECK(r.covering_radius < 1e-12);
  }
  SUBCASE("a single point leaves a witness") {
    const DensityResult r = certify_density({{0.5, 0.5}}, all, box, 0.1, 0.02);
    CHECK_FALSE(r.certified);
    REQUIRE(r.witness.has_value());
    const double d = std::hypot((*r.witness)[0] - 0.5, (*r.witness)[1] - 0.5);
    CHECK(d > 0.1 - 0.02 * std::sqrt(2.0));
    CHECK(r.covering_radius == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  }
  SUBCASE("pitch above delta/4 is rejected") {
    CHECK_THROWS_AS(certify_density({{0.5, 0.5}}, all, box, 0.1, 0.05), std::invalid_argument);
  }
}

TEST_CASE("nearest-neighbour index matches brute force") {
  CounterRng rng(9);
  for (int shape = 0; shape < 3; ++shape) {
    std::vector<Point> pts;
    for (int i = 0; i < 300; ++i) {
      const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
      // Shapes: square, thin horizontal line, a tight cluster.
      if (shape == 0) pts.push_back({a, b});
      if (shape == 1) pts.push_back({a, 1e-4 * b});
      if (shape == 2) pts.push_back({1e-3 * a, 1e-3 * b});
    }
    const PointIndex index(pts, 1e-4);
    std::vector<int> hits;
    for (int q = 0; q < 200; ++q) {
      const Point x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pts) best = std::min(best, std::hypot(p[0] - x[0], p[1] - x[1]));
      CHECK(index.nearest(x) == doctest::Approx(best).epsilon(1e-12));
      const double r = best * 1.5;
      index.within(x, r, hits);
      std::size_t expect = 0;
      for (const auto& p : pts) expect += std::hypot(p[0] - x[0], p[1] - x[1]) <= r;
      CHECK(hits.size() == expect);
      CHECK(index.any_within(x, best * 1.0001));
      CHECK_FALSE(index.any_within(x, best * 0.9999));
    }
  }
}

TEST_CASE("sparsify keeps a spaced net with X_minus handled first") {
  const IndexPairSpec& spec = fixtures::saddle();
  const PointSamplePair raw = sample_index_pair(spec, 5000, 1);
  const double spacing = 0.05;
  const PointSamplePair net = sparsify(raw, spacing);
  CHECK(net.size() < raw.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    CHECK((classify_point(spec, net.points[i]) == PairLabel::InNminus) == (net.in_minus[i] != 0));
    for (std::size_t j = i + 1; j < net.size(); ++j)
      CHECK(std::hypot(net.points[i][0] - net.points[j][0], net.points[i][1] - net.points[j][1]) > spacing);
  }
  // Every raw point lies within the spacing of the net, and raw X_minus
  // points within the spacing of the net's X_minus.
  const PointIndex all(net.points, spacing);
  const auto minus = net.minus_points();
  const PointIndex sub(minus, spacing);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(all.nearest(raw.points[i]) <= spacing);
    if (raw.in_minus[i]) CHECK(sub.nearest(raw.points[i]) <= spacing);
  }
}
