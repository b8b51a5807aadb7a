#include <cmath>
#include <vector>

#include "conley/indexpair.hpp"
#include "doctest.h"

using namespace conley;

namespace {

Region square(double half) {
  Region r;
  r.chart = ManifoldChart::flat(2);
  r.box = Box{{-half, -half}, {half, half}};
  return r;
}

double eval(const Expression& e, double x1, double x2) { return e.value(std::vector<double>{x1, x2}); }

}  // namespace

TEST_CASE("default bounding function is the squared gradient norm") {
  const Expression saddle = default_bounding_function(parse_expression("-x1^2 + x2^2", 2));
  const Expression cusp = default_bounding_function(parse_expression("-x1^2 + x2^3", 2));
  for (double a : {-0.7, 0.0, 0.4})
    for (double b : {-0.3, 0.2, 0.9}) {
      CHECK(eval(saddle, a, b) == doctest::Approx(4 * a * a + 4 * b * b).epsilon(1e-14));
      CHECK(eval(cusp, a, b) == doctest::Approx(4 * a * a + 9 * std::pow(b, 4)).epsilon(1e-14));
    }
}

TEST_CASE("step function branches") {
  const double q0 = 1.3, r0 = 0.2, r1 = 1.1;
  CHECK(step_q(r0 - 1, q0, r0, r1) == q0);
  CHECK(step_q(r1 + 0.5, q0, r0, r1) == 0.0);
  CHECK(std::abs(step_q((r0 + r1) / 2, q0, r0, r1) - q0 / 2) < 1e-12);
}

TEST_CASE("step function: monotone with bounded slope, derivatives match differences") {
  const double q0 = 0.7, r0 = 0.3, r1 = 2.0;
  const double bound = 2 * q0 / (r1 - r0);
  double prev = q0;
  for (int i = 0; i <= 20000; ++i) {
    const double t = r0 - 0.1 + (r1 - r0 + 0.2) * i / 20000.0;
    const StepJet j = step_q_jet(t, q0, r0, r1);
    CHECK(j.q <= prev);
    CHECK(std::abs(j.dq) <= bound * (1 + 1e-9));
    prev = j.q;
  }
  CHECK(std::abs(step_q_jet((r0 + r1) / 2, q0, r0, r1).dq) == doctest::Approx(bound).epsilon(1e-12));
  for (double t : {0.4, 0.9, 1.15, 1.6, 1.9}) {
    const double h = 1e-6;
    const StepJet j = step_q_jet(t, q0, r0, r1);
    CHECK(j.dq == doctest::Approx((step_q(t + h, q0, r0, r1) - step_q(t - h, q0, r0, r1)) / (2 * h)).epsilon(1e-6));
    CHECK(j.d2q == doctest::Approx((step_q_jet(t + h, q0, r0, r1).dq - step_q_jet(t - h, q0, r0, r1).dq) / (2 * h))
                       .epsilon(1e-5));
  }
}

TEST_CASE("regularity interval: quadratic bounding functions") {
  const Region box = square(1);
  const Expression g1 = parse_expression("4*x1^2 + 4*x2^2", 2);
  const RegularityInterval a = find_regularity_interval(g1, box, 200);
  CHECK(a.r0 > 0);
  CHECK(a.r0 < a.r1);
  CHECK(a.r1 <= 4);
  // grid oracle: the band has no near-critical nodes and {g <= r1} avoids the boundary
  const Grid grid(box.box, 200);
  bool ok = true;
  grid.for_each([&](long long id, std::span<const double> x) {
    const Jet1 j = g1.jet1(x);
    if (grid.on_boundary(id) && j.value <= a.r1) ok = false;
    if (j.value >= a.r0 && j.value <= a.r1 && std::hypot(j.grad[0], j.grad[1]) < 1e-6) ok = false;
  });
  CHECK(ok);

  const RegularityInterval b = find_regularity_interval(parse_expression("4*x1^2 + 9*x2^4", 2), box, 200);
  CHECK(b.r0 > 0);
  CHECK(b.r1 > b.r0);
}

TEST_CASE("regularity interval: a second critical set is rejected") {
  // Saddle at the origin and minima at x1 = +-0.5; the g barrier between them
  // (about 2.47) exceeds every admissible r1.
  Region box = square(1);
  box.box = Box{{-0.8, -1.0}, {0.8, 1.0}};
  const Expression f = parse_expression("x2^2 + 0.25*cos(6.283185307179586*x1)", 2);
  CHECK_THROWS_AS(find_regularity_interval(default_bounding_function(f), box, 200), NoIntervalFound);
}

TEST_CASE("q0 for parallel gradients") {
  // f = |x|^2, g = 4|x|^2: |grad f| / |grad g| = 1/4 everywhere.
  const Region box = square(1);
  const Expression f = parse_expression("x1^2 + x2^2", 2);
  const Expression g = parse_expression("4*x1^2 + 4*x2^2", 2);
  const double q0 = compute_q0(f, g, 0.2, 3.0, box, 200);
  CHECK(q0 == doctest::Approx(0.9 * (3.0 - 0.2) / 8).epsilon(1e-12));
}

TEST_CASE("q0 rejects a band where grad f vanishes") {
  // f constant in x2 on the band: grad f = 0 along x1 = 0.
  const Expression f = parse_expression("x1^2", 2);
  const Expression g = parse_expression("x1^2 + x2^2", 2);
  CHECK_THROWS_AS(compute_q0(f, g, 0.1, 0.5, square(1), 100), NonPositiveAlignment);
}

TEST_CASE("choose_constants: default arithmetic") {
  const Expression f = parse_expression("x1^2 + x2^2", 2);
  const Expression g = parse_expression("4*x1^2 + 4*x2^2", 2);
  const Constants c = choose_constants(1.0, 0.1, 0.9, f, g, square(1), 200);
  CHECK(c.jitters == 0);
  CHECK(c.alpha == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(c.s == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(c.r == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(c.beta == doctest::Approx(0.25 + step_q(0.8, 1.0, 0.1, 0.9)).epsilon(1e-15));
  CHECK(c.gamma == doctest::Approx(0.25 + step_q(0.7, 1.0, 0.1, 0.9)).epsilon(1e-15));
  CHECK((0.1 + 0.9) / 2 < c.s);
  CHECK(c.s <= c.r);
  CHECK(c.r < 0.9);
}

TEST_CASE("saddle index pair: construction, invariants and classification") {
  const Expression f = parse_expression("-x1^2 + x2^2", 2);
  const IndexPairSpec spec = build_index_pair(f, nullptr, square(1));
  CHECK(spec.violations().empty());
  CHECK(spec.beta > spec.alpha);
  CHECK(spec.gamma >= spec.beta);

  const std::vector<double> origin{0, 0};
  CHECK(classify_point(spec, origin) == PairLabel::InNonly);
  CHECK(perturbation_value(spec, origin) == spec.f.value(origin) + spec.q0);
  CHECK(classify_point(spec, std::vector<double>{0, 0.9}) == PairLabel::Outside);

  // A point on {h = beta} with f < alpha, found by bisection along the x1 axis.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (perturbation_value(spec, std::vector<double>{mid, 0}) >= spec.beta ? lo : hi) = mid;
  }
  CHECK(classify_point(spec, std::vector<double>{lo, 0}) == PairLabel::InNminus);

  IndexPairSpec bad = spec;
  std::swap(bad.beta, bad.gamma);
  CHECK_FALSE(bad.violations().empty());
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
}

TEST_CASE("perturbation branches and the jet of h") {
  const Expression f = parse_expression("-x1^2 + x2^2", 2);
  const IndexPairSpec spec = build_index_pair(f, nullptr, square(1));
  const std::vector<double> far{0.99, 0.99};
  CHECK(spec.g.value(far) >= spec.r1);
  CHECK(perturbation_value(spec, far) == f.value(far));
  const std::vector<double> p{0.5, 0.3};
  const Jet2 j = perturbation_h(spec, p);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> a = p, b = p;
    a[i] += h;
    b[i] -= h;
    CHECK(j.grad[i] == doctest::Approx((perturbation_value(spec, a) - perturbation_value(spec, b)) / (2 * h))
                           .epsilon(1e-6));
  }
}
