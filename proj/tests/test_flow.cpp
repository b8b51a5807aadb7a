#include <cmath>
#include <sstream>

#include "conley/flow.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace conley;

TEST_CASE("RK4 on a linear decay matches the exponential") {
  const Field f = fixtures::field("x1^2 / 2", 1);
  const std::vector<double> x0{1.0};
  const Trajectory t = simulate_flow(f, x0, 1e-3, 3.0);
  CHECK(t.terminated == Termination::TimeBudget);
  REQUIRE(t.states.size() == t.times.size());
  for (std::size_t i = 0; i < t.states.size(); i += 250) CHECK(std::abs(t.states[i][0] - std::exp(-t.times[i])) < 1e-6);
  CHECK(t.times.back() == doctest::Approx(3.0));
}

TEST_CASE("escape from a maximum is monotone") {
  const Field f = fixtures::field("-x1^2 / 2", 1);
  const std::vector<double> x0{1e-3};
  const Trajectory t = simulate_flow(f, x0, 1e-3, 20.0, [](std::span<const double> x) { return std::abs(x[0]) > 1; });
  CHECK(t.terminated == Termination::LeftRegion);
  for (std::size_t i = 1; i < t.states.size(); ++i) {
    CHECK(t.states[i][0] > t.states[i - 1][0]);
    CHECK(f.value(t.states[i]) < f.value(t.states[i - 1]));
  }
}

TEST_CASE("flow termination modes and errors") {
  const Field bowl = fixtures::field("x1^2 + x2^2");
  const std::vector<double> origin{0.0, 0.0};
  CHECK(simulate_flow(bowl, origin, 1e-2, 1.0).terminated == Termination::Converged);
  CHECK_THROWS_AS(simulate_flow(bowl, origin, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(simulate_flow(bowl, origin, 1e-2, -1.0), std::invalid_argument);
  // x' = 4 x^3 blows up in finite time.
  const Field quartic = fixtures::field("-x1^4", 1);
  const std::vector<double> x0{10.0};
  CHECK_THROWS_AS(simulate_flow(quartic, x0, 0.1, 100.0), NonFiniteState);
}

TEST_CASE("saddle: a start near the stable manifold exits through N_minus") {
  const IndexPairSpec& spec = fixtures::saddle();
  const std::vector<double> x0{1e-3, 0.3};
  REQUIRE(classify_point(spec, x0) != PairLabel::Outside);
  const Trajectory t = simulate_flow(Field(spec.f), x0, 1e-3, 30.0, [&](std::span<const double> x) {
    return classify_point(spec, x) == PairLabel::Outside;
  });
  REQUIRE(t.terminated == Termination::LeftRegion);
  bool seen_minus = false;
  for (std::size_t i = 0; i + 1 < t.states.size(); ++i)
    seen_minus = seen_minus || classify_point(spec, t.states[i]) == PairLabel::InNminus;
  CHECK(seen_minus);
  CHECK(classify_point(spec, t.states[t.states.size() - 2]) == PairLabel::InNminus);
}

TEST_CASE("audit on the attracting and saddle fixtures") {
  SUBCASE("minimum: nothing leaves") {
    const AuditReport r = audit_dynamics(fixtures::minimum(), 60, 1);
    CHECK(r.exits == 0);
    CHECK(r.violations() == 0);
    CHECK(r.ok());
  }
  SUBCASE("saddle: every start eventually exits, with no violations") {
    const AuditReport r = audit_dynamics(fixtures::saddle(), 200, 7);
    CHECK(r.trajectories == 200);
    CHECK(r.near_boundary_starts == 40);
    CHECK(r.exits == 200);
    CHECK(r.ip2_violations == 0);
    CHECK(r.ip3_violations == 0);
    CHECK(r.h4_violations == 0);
    CHECK(r.f_violations == 0);
    CHECK(r.band == doctest::Approx(10 * 1e-3 * 2 * std::sqrt(2.0)).epsilon(1e-6));
  }
}

TEST_CASE("a corrupted spec is reported, not thrown") {
  IndexPairSpec bad = fixtures::saddle();
  std::swap(bad.beta, bad.gamma);
  AuditReport r;
  CHECK_NOTHROW(r = audit_dynamics(bad, 20, 3));
  CHECK_FALSE(r.spec_violations.empty());
  CHECK_FALSE(r.ok());
}

TEST_CASE("kept trajectories and their CSV") {
  const IndexPairSpec& spec = fixtures::saddle();
  const AuditReport r = audit_dynamics(spec, 5, 2, AuditOptions{}, true);
  REQUIRE(r.kept.size() == 5);
  std::ostringstream os;
  write_trajectory_csv(os, r.kept[0], spec);
  const std::string text = os.str();
  CHECK(text.rfind("t,x1,x2,f,h\n", 0) == 0);
  const auto rows = std::count(text.begin(), text.end(), '\n');
  CHECK(rows == static_cast<long>(r.kept[0].states.size()) + 1);
}
