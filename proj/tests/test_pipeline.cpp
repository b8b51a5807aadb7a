#include <sstream>

#include "conley/pipeline.hpp"
#include "conley/plot.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace conley;
using nlohmann::json;

namespace {

json saddle_json() {
  return json::parse(R"({
    "function": "-x1^2 + x2^2",
    "region": {"box": {"lo": [-1, -1], "hi": [1, 1]}},
    "seed": 7,
    "theoretical_bounds": false
  })");
}

}  // namespace

TEST_CASE("config parsing: defaults and overrides") {
  const PipelineConfig c = parse_config(saddle_json());
  CHECK(c.dim() == 2);
  CHECK(c.seed == 7);
  CHECK(c.kappa == 0.05);
  CHECK_FALSE(c.n.has_value());
  CHECK(c.chart.mode == ChartMode::Flat);

  json j = saddle_json();
  j["kappa"] = 0.1;
  j["n"] = 5000;
  j["g"] = "x1^2 + x2^2";
  j["region"]["conditions"] = json::array({{{"expr", "x1^2 + x2^2"}, {"hi", 0.9}}});
  const PipelineConfig d = parse_config(j);
  CHECK(d.kappa == 0.1);
  CHECK(*d.n == 5000);
  CHECK(*d.g == "x1^2 + x2^2");
  REQUIRE(d.conditions.size() == 1);
  CHECK(*d.conditions[0].hi == 0.9);
  CHECK_FALSE(d.conditions[0].lo.has_value());

  // Round trip through JSON.
  const PipelineConfig e = parse_config(to_json(d));
  CHECK(to_json(e) == to_json(d));
}

TEST_CASE("config parsing rejects malformed input") {
  const auto rejects = [](const std::function<void(json&)>& edit) {
    json j = saddle_json();
    edit(j);
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  };
  rejects([](json& j) { j.erase("function"); });
  rejects([](json& j) { j["function"] = 3; });
  rejects([](json& j) { j["region"]["box"]["hi"] = {1}; });
  rejects([](json& j) { j["region"]["box"]["hi"] = {1, -2}; });
  rejects([](json& j) { j["seed"] = "seven"; });
  rejects([](json& j) { j["kappa"] = 1.5; });
  rejects([](json& j) { j["n"] = 0; });
  rejects([](json& j) { j["unknown"] = true; });
  rejects([](json& j) { j["chart"] = {{"mode", "flat"}, {"dim", 3}}; });
  rejects([](json& j) { j["chart"] = {{"mode", "klein"}}; });
  rejects([](json& j) { j["region"]["conditions"] = json::array({{{"expr", "x1"}}}); });
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("index pair spec JSON round trip") {
  const IndexPairSpec& s = fixtures::saddle();
  const IndexPairSpec t = spec_from_json(to_json(s));
  CHECK(t.q0 == s.q0);
  CHECK(t.beta == s.beta);
  CHECK(t.gamma == s.gamma);
  CHECK(t.r1 == s.r1);
  for (const auto& p : std::vector<std::vector<double>>{{0, 0}, {0.5, 0.2}, {-0.3, 0.7}}) {
    CHECK(t.f.value(p) == s.f.value(p));
    CHECK(t.g.value(p) == s.g.value(p));
    CHECK(classify_point(t, p) == classify_point(s, p));
  }
}

TEST_CASE("saddle pipeline: Morse index one, matching the oracle at three epsilons") {
  const PipelineConfig c = parse_config(saddle_json());
  RunReport rep;
  PointSamplePair net;
  SimplicialPair complex;
  run_pipeline(c, rep, &net, &complex);
  REQUIRE(rep.probes.size() == 3);
  for (const auto& p : rep.probes) {
    CHECK(p.betti.same(BettiVector{{0, 1, 0}}));
    CHECK(p.euler_ok);
  }
  CHECK(rep.epsilon_agreement);
  CHECK(rep.interpretation->label() == "morse_index:1");
  REQUIRE(rep.oracle.has_value());
  CHECK(rep.oracle->same(BettiVector{{0, 1, 0}}));
  CHECK(rep.agreement);
  CHECK(rep.density_certified);
  CHECK(rep.interval->lo == doctest::Approx(4 * rep.delta / 3));
  CHECK(rep.interval->hi == doctest::Approx(4 * rep.delta));
  CHECK(net.size() == rep.net_samples);
  CHECK(complex.epsilon == rep.probes[1].epsilon);

  const json j = rep.to_json();
  CHECK(j["agreement"] == true);
  CHECK(j["inference"]["probes"].size() == 3);
  CHECK(j["oracle"]["betti"] == json::array({0, 1, 0}));
  CHECK(j["oracle"]["interpretation"] == "morse_index:1");
  CHECK(j.contains("timings_seconds"));

  std::ostringstream csv;
  write_points_csv(csv, net);
  CHECK(csv.str().rfind("x1,x2,in_n_minus\n", 0) == 0);
}

TEST_CASE("single epsilon override") {
  PipelineConfig c = parse_config(saddle_json());
  c.epsilon = 0.15;
  RunReport rep;
  run_pipeline(c, rep);
  REQUIRE(rep.probes.size() == 1);
  CHECK(rep.probes[0].epsilon == 0.15);
  CHECK(rep.probes[0].betti.same(BettiVector{{0, 1, 0}}));
}

TEST_CASE("stage errors carry the stage name and a partial report") {
  json j = saddle_json();
  j["function"] = "-x1^2 + * x2^2";
  RunReport rep;
  try {
    run_pipeline(parse_config(j), rep);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "parse");
  }
  CHECK(rep.failed_stage == "parse");
  CHECK(rep.to_json()["error"]["stage"] == "parse");

  // A box far from any critical point has no regularity interval.
  json far = saddle_json();
  far["region"]["box"] = {{"lo", {2, 2}}, {"hi", {3, 3}}};
  RunReport rep2;
  try {
    run_pipeline(parse_config(far), rep2);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "index_pair");
  }
  CHECK(rep2.timings.size() >= 1);
}

TEST_CASE("curved charts are rejected by the pipeline") {
  json j = saddle_json();
  j["chart"] = {{"mode", "sphere"}, {"radius", 2.0}};
  RunReport rep;
  CHECK_THROWS_AS(run_pipeline(parse_config(j), rep), StageError);
}

TEST_CASE("contour segments and figure") {
  const Box box{{-1, -1}, {1, 1}};
  const auto r2 = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
  const auto segs = contour_segments(r2, box, 64, 0.25);
  REQUIRE_FALSE(segs.empty());
  double length = 0;
  for (const auto& s : segs) {
    CHECK(std::hypot(s.x0, s.y0) == doctest::Approx(0.5).epsilon(0.01));
    length += std::hypot(s.x1 - s.x0, s.y1 - s.y0);
  }
  CHECK(length == doctest::Approx(std::numbers::pi).epsilon(0.01));

  std::ostringstream os;
  write_figure_svg(os, fixtures::saddle());
  const std::string svg = os.str();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("#fdae6b") != std::string::npos);  // N_minus shading

  const IndexPairSpec one_d =
      build_index_pair(parse_expression("x1^2", 1), nullptr, fixtures::box_region({-1}, {1}));
  std::ostringstream ignored;
  CHECK_THROWS_AS(write_figure_svg(ignored, one_d), std::invalid_argument);
}
