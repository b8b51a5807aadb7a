#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "conley/complex.hpp"
#include "conley/oracle.hpp"
#include "conley/rng.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace conley;

namespace {

PointSamplePair triangle_sample() {
  PointSamplePair s;
  s.points = {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2}};
  s.in_minus = {0, 0, 0};
  return s;
}

PointSamplePair random_sample(int n, int dim, std::uint64_t seed, double minus_share = 0.3) {
  CounterRng rng(seed);
  PointSamplePair s;
  for (int i = 0; i < n; ++i) {
    Point p(dim);
    for (auto& v : p) v = rng.uniform();
    s.points.push_back(p);
    s.in_minus.push_back(rng.uniform() < minus_share);
  }
  return s;
}

bool has(const SimplicialPair& p, std::vector<int> s) {
  const auto all = p.all_simplices();
  return std::find(all.begin(), all.end(), s) != all.end();
}

}  // namespace

TEST_CASE("minimum enclosing radius") {
  const Point a{0, 0}, b{1, 0}, c{0.5, std::sqrt(3.0) / 2}, d{0.5, 0.1};
  const Point* eq[] = {&a, &b, &c};
  CHECK(min_enclosing_radius(eq) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-14));
  // Obtuse triangle: the longest side is a diameter.
  const Point* obtuse[] = {&a, &b, &d};
  CHECK(min_enclosing_radius(obtuse) == doctest::Approx(0.5).epsilon(1e-14));
  const Point* edge[] = {&a, &c};
  CHECK(min_enclosing_radius(edge) == doctest::Approx(0.5).epsilon(1e-14));
  const Point* single[] = {&a};
  CHECK(min_enclosing_radius(single) == 0.0);
}

TEST_CASE("equilateral triangle: the 2-simplex appears at the circumradius") {
  const SimplicialPair wide = build_cech_pair(triangle_sample(), 0.6, 2);
  CHECK(has(wide, {0, 1}));
  CHECK(has(wide, {1, 2}));
  CHECK(has(wide, {0, 2}));
  CHECK(has(wide, {0, 1, 2}));

  const SimplicialPair narrow = build_cech_pair(triangle_sample(), 0.55, 2);
  CHECK(has(narrow, {0, 1}));
  CHECK_FALSE(has(narrow, {0, 1, 2}));
  CHECK(relative_betti(narrow).same(BettiVector{{1, 1}}));
}

TEST_CASE("Cech pair invariants on random samples") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const PointSamplePair s = random_sample(60, 2, seed);
    const SimplicialPair small = build_cech_pair(s, 0.08, 3);
    const SimplicialPair large = build_cech_pair(s, 0.12, 3);

    const auto all = large.all_simplices();
    const std::set<std::vector<int>> present(all.begin(), all.end());
    for (const auto& simplex : all) {
      // Face closure.
      if (simplex.size() > 1)
        for (std::size_t drop = 0; drop < simplex.size(); ++drop) {
          std::vector<int> face = simplex;
          face.erase(face.begin() + static_cast<long>(drop));
          CHECK(present.count(face) == 1);
        }
      // Enclosing-ball criterion.
      std::vector<const Point*> pts;
      for (int v : simplex) pts.push_back(&s.points[v]);
      CHECK(min_enclosing_radius(pts) <= 0.12 + kBallSlack);
    }
    // Monotone in epsilon.
    for (const auto& simplex : small.all_simplices()) CHECK(present.count(simplex) == 1);

    // Subcomplex: exactly the simplices with every vertex in X_minus.
    const auto sub = large.all_simplices(true);
    const std::set<std::vector<int>> sub_set(sub.begin(), sub.end());
    for (const auto& simplex : all) {
      const bool all_minus = std::all_of(simplex.begin(), simplex.end(), [&](int v) { return s.in_minus[v] != 0; });
      CHECK(sub_set.count(simplex) == static_cast<std::size_t>(all_minus));
    }
  }
}

TEST_CASE("every enclosable triple is present") {
  const PointSamplePair s = random_sample(25, 2, 11);
  const double eps = 0.2;
  const SimplicialPair p = build_cech_pair(s, eps, 2);
  for (int a = 0; a < 25; ++a)
    for (int b = a + 1; b < 25; ++b)
      for (int c = b + 1; c < 25; ++c) {
        const Point* tri[] = {&s.points[a], &s.points[b], &s.points[c]};
        if (min_enclosing_radius(tri) <= eps) CHECK(has(p, {a, b, c}));
      }
}

TEST_CASE("simplex cap raises ComplexTooLarge") {
  const PointSamplePair s = random_sample(80, 2, 5);
  CHECK_THROWS_AS(build_cech_pair(s, 0.5, 3, 1000), ComplexTooLarge);
}

TEST_CASE("Euler closure matches the full complex one dimension higher") {
  for (int dim : {2, 3})
    for (std::uint64_t seed : {21, 22, 23})
      for (double eps : {0.1, 0.16, 0.22}) {
        const PointSamplePair s = random_sample(dim == 2 ? 70 : 45, dim, seed, 0.4);
        const SimplicialPair top = build_cech_pair(s, eps, dim);
        const SimplicialPair full = build_cech_pair(s, eps, dim + 1);
        const BettiVector closed = relative_betti_euler_closed(top, dim);
        CAPTURE(dim);
        CAPTURE(seed);
        CAPTURE(eps);
        CHECK(closed.same(relative_betti(full)));
      }
}

TEST_CASE("Euler closure rejects a complex below the ambient dimension") {
  const SimplicialPair p = build_cech_pair(random_sample(20, 2, 3), 0.2, 1);
  CHECK_THROWS(relative_betti_euler_closed(p, 2));
}

TEST_CASE("complex dump format") {
  PointSamplePair s = triangle_sample();
  s.in_minus = {1, 1, 0};
  const SimplicialPair p = build_cech_pair(s, 0.6, 2);
  std::ostringstream os;
  write_complex(os, p);
  const std::string text = os.str();
  CHECK(text.find("# epsilon 0.6") == 0);
  CHECK(text.find("\n0 1 1\n") != std::string::npos);   // edge inside X_minus
  CHECK(text.find("\n1 2 0\n") != std::string::npos);
  CHECK(text.find("\n0 1 2 0\n") != std::string::npos);
}

TEST_CASE("saddle sample: nerve homology equals the union-of-balls oracle") {
  const IndexPairSpec& spec = fixtures::saddle();
  const PointSamplePair raw = sample_index_pair(spec, 4000, 7);
  const PointSamplePair net = sparsify(raw, 0.08);
  for (double eps : {0.09, 0.12}) {
    const SimplicialPair nerve = build_cech_pair(net, eps, 2);
    const BettiVector sampled = relative_betti_euler_closed(nerve, 2);
    const BettiVector pixels =
        grid_relative_homology_stable(union_of_balls_labeler(net, eps), Box{{-1.3, -1.3}, {1.3, 1.3}}, 256);
    CAPTURE(eps);
    CHECK(sampled.same(pixels));
  }
}
