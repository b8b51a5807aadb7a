#include "conley/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "conley/oracle.hpp"
#include "conley/sampler.hpp"

namespace conley {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, json::value_t type, const char* where) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing \"" + key + "\"");
  const json& v = j.at(key);
  const bool ok = type == json::value_t::number_float ? v.is_number() : v.type() == type;
  if (!ok) throw ConfigError(std::string(where) + ": \"" + key + "\" has the wrong type");
  return v;
}

std::vector<double> number_array(const json& v, const char* what) {
  if (!v.is_array() || v.empty()) throw ConfigError(std::string(what) + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(std::string(what) + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

template <typename T>
void optional_number(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
  out = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
  }
}

ManifoldChart parse_chart(const json& j) {
  if (!j.is_object()) throw ConfigError("chart must be an object");
  check_keys(j, {"mode", "dim", "radius", "major", "minor"}, "chart");
  const std::string mode = require(j, "mode", json::value_t::string, "chart").get<std::string>();
  if (mode == "flat") {
    const int dim = require(j, "dim", json::value_t::number_float, "chart").get<int>();
    if (dim < 1 || dim > kMaxDim) throw ConfigError("chart.dim must lie in 1.." + std::to_string(kMaxDim));
    return ManifoldChart::flat(dim);
  }
  if (mode == "sphere") return ManifoldChart::sphere(require(j, "radius", json::value_t::number_float, "chart"));
  if (mode == "torus")
    return ManifoldChart::torus(require(j, "major", json::value_t::number_float, "chart"),
                                require(j, "minor", json::value_t::number_float, "chart"));
  throw ConfigError("chart.mode must be flat, sphere or torus");
}

json chart_json(const ManifoldChart& c) {
  switch (c.mode) {
    case ChartMode::Flat:
      return {{"mode", "flat"}, {"dim", c.dim}};
    case ChartMode::Sphere:
      return {{"mode", "sphere"}, {"radius", c.radius}};
    case ChartMode::Torus:
      return {{"mode", "torus"}, {"major", c.radius}, {"minor", c.minor}};
  }
  return {};
}

json number_or_inf(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

double number_from(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("expected a number or \"inf\", got \"" + s + "\"");
  }
  return v.get<double>();
}

}  // namespace

PipelineConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j,
             {"function", "g", "chart", "region", "grid", "safety", "qmc_log2", "theoretical_bounds", "kappa", "seed",
              "n", "spacing", "epsilon", "euler_closure", "max_simplices", "oracle", "audit", "output"},
             "config");
  PipelineConfig c;
  c.function = require(j, "function", json::value_t::string, "config").get<std::string>();
  if (j.contains("g")) {
    if (!j.at("g").is_string()) throw ConfigError("\"g\" must be a string");
    c.g = j.at("g").get<std::string>();
  }
  if (j.contains("chart")) c.chart = parse_chart(j.at("chart"));

  const json& region = require(j, "region", json::value_t::object, "config");
  check_keys(region, {"box", "conditions"}, "region");
  const json& box = require(region, "box", json::value_t::object, "region");
  check_keys(box, {"lo", "hi"}, "region.box");
  c.box_lo = number_array(require(box, "lo", json::value_t::array, "region.box"), "region.box.lo");
  c.box_hi = number_array(require(box, "hi", json::value_t::array, "region.box"), "region.box.hi");
  if (c.box_lo.size() != c.box_hi.size()) throw ConfigError("region.box.lo and hi differ in length");
  for (std::size_t a = 0; a < c.box_lo.size(); ++a)
    if (!(c.box_lo[a] < c.box_hi[a])) throw ConfigError("region.box is empty along axis " + std::to_string(a + 1));
  if (c.chart.mode == ChartMode::Flat && c.chart.dim != c.dim())
    throw ConfigError("chart.dim does not match the box dimension");
  if (c.dim() > kMaxDim) throw ConfigError("dimension exceeds " + std::to_string(kMaxDim));
  if (region.contains("conditions")) {
    const json& conds = region.at("conditions");
    if (!conds.is_array()) throw ConfigError("region.conditions must be an array");
    for (const auto& cj : conds) {
      if (!cj.is_object()) throw ConfigError("each region condition must be an object");
      check_keys(cj, {"expr", "lo", "hi"}, "region condition");
      ConditionText ct;
      ct.expr = require(cj, "expr", json::value_t::string, "region condition").get<std::string>();
      if (cj.contains("lo")) ct.lo = number_from(cj.at("lo"));
      if (cj.contains("hi")) ct.hi = number_from(cj.at("hi"));
      if (!ct.lo && !ct.hi) throw ConfigError("region condition needs lo or hi");
      c.conditions.push_back(ct);
    }
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (!g.is_object()) throw ConfigError("grid must be an object");
    check_keys(g, {"indexpair", "geometry"}, "grid");
    optional_number(g, "indexpair", c.indexpair_grid);
    optional_number(g, "geometry", c.geometry_grid);
    if (c.indexpair_grid < 8 || c.geometry_grid < 8) throw ConfigError("grid sizes must be at least 8");
  }
  if (j.contains("safety")) {
    const json& s = j.at("safety");
    if (!s.is_object()) throw ConfigError("safety must be an object");
    check_keys(s, {"q0", "inf", "sup"}, "safety");
    optional_number(s, "q0", c.q0_factor);
    optional_number(s, "inf", c.factors.inf);
    optional_number(s, "sup", c.factors.sup);
  }
  optional_number(j, "qmc_log2", c.qmc_log2);
  if (c.qmc_log2 < 8 || c.qmc_log2 > 26) throw ConfigError("qmc_log2 must lie in 8..26");
  if (j.contains("theoretical_bounds")) {
    if (!j.at("theoretical_bounds").is_boolean()) throw ConfigError("theoretical_bounds must be a boolean");
    c.theoretical_bounds = j.at("theoretical_bounds").get<bool>();
  }
  optional_number(j, "kappa", c.kappa);
  if (!(c.kappa > 0 && c.kappa < 1)) throw ConfigError("kappa must lie in (0, 1)");
  optional_number(j, "seed", c.seed);
  if (j.contains("n")) {
    std::size_t n = 0;
    optional_number(j, "n", n);
    if (n == 0) throw ConfigError("n must be positive");
    c.n = n;
  }
  if (j.contains("spacing")) {
    double s = 0;
    optional_number(j, "spacing", s);
    if (!(s > 0)) throw ConfigError("spacing must be positive");
    c.spacing = s;
  }
  if (j.contains("epsilon")) {
    double e = 0;
    optional_number(j, "epsilon", e);
    if (!(e > 0)) throw ConfigError("epsilon must be positive");
    c.epsilon = e;
  }
  if (j.contains("euler_closure")) {
    if (!j.at("euler_closure").is_boolean()) throw ConfigError("euler_closure must be a boolean");
    c.euler_closure = j.at("euler_closure").get<bool>();
  }
  optional_number(j, "max_simplices", c.max_simplices);
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    if (!o.is_object()) throw ConfigError("oracle must be an object");
    check_keys(o, {"resolution"}, "oracle");
    optional_number(o, "resolution", c.oracle_resolution);
    if (c.oracle_resolution < 8) throw ConfigError("oracle.resolution must be at least 8");
  }
  if (j.contains("audit")) {
    const json& a = j.at("audit");
    if (!a.is_object()) throw ConfigError("audit must be an object");
    check_keys(a, {"trajectories"}, "audit");
    optional_number(a, "trajectories", c.audit_trajectories);
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("output must be a string");
    c.output_dir = j.at("output").get<std::string>();
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const PipelineConfig& c) {
  json j;
  j["function"] = c.function;
  if (c.g) j["g"] = *c.g;
  j["chart"] = chart_json(c.chart);
  j["region"]["box"] = {{"lo", c.box_lo}, {"hi", c.box_hi}};
  json conds = json::array();
  for (const auto& ct : c.conditions) {
    json cj{{"expr", ct.expr}};
    if (ct.lo) cj["lo"] = number_or_inf(*ct.lo);
    if (ct.hi) cj["hi"] = number_or_inf(*ct.hi);
    conds.push_back(cj);
  }
  j["region"]["conditions"] = conds;
  j["grid"] = {{"indexpair", c.indexpair_grid}, {"geometry", c.geometry_grid}};
  j["safety"] = {{"q0", c.q0_factor}, {"inf", c.factors.inf}, {"sup", c.factors.sup}};
  j["qmc_log2"] = c.qmc_log2;
  j["theoretical_bounds"] = c.theoretical_bounds;
  j["kappa"] = c.kappa;
  j["seed"] = c.seed;
  if (c.n) j["n"] = *c.n;
  if (c.spacing) j["spacing"] = *c.spacing;
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  j["euler_closure"] = c.euler_closure;
  j["max_simplices"] = c.max_simplices;
  j["oracle"] = {{"resolution", c.oracle_resolution}};
  j["audit"] = {{"trajectories", c.audit_trajectories}};
  if (!c.output_dir.empty()) j["output"] = c.output_dir;
  return j;
}

Expression parse_function(const PipelineConfig& c) { return parse_expression(c.function, c.dim()); }

Region build_region(const PipelineConfig& c) {
  Region r;
  r.chart = c.chart;
  r.box = Box{c.box_lo, c.box_hi};
  for (const auto& ct : c.conditions) {
    LevelCondition lc{parse_expression(ct.expr, c.dim())};
    if (ct.lo) lc.lo = *ct.lo;
    if (ct.hi) lc.hi = *ct.hi;
    r.conditions.push_back(std::move(lc));
  }
  return r;
}

json to_json(const IndexPairSpec& s) {
  json conds = json::array();
  for (const auto& lc : s.region.conditions)
    conds.push_back({{"expr", to_string(lc.expr)}, {"lo", number_or_inf(lc.lo)}, {"hi", number_or_inf(lc.hi)}});
  return {{"f", to_string(s.f)},
          {"g", to_string(s.g)},
          {"dim", s.dim()},
          {"chart", chart_json(s.region.chart)},
          {"box", {{"lo", s.region.box.lo}, {"hi", s.region.box.hi}}},
          {"conditions", conds},
          {"r0", s.r0},
          {"r1", s.r1},
          {"q0", s.q0},
          {"alpha", s.alpha},
          {"s", s.s},
          {"r", s.r},
          {"beta", s.beta},
          {"gamma", s.gamma}};
}

IndexPairSpec spec_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  Region region;
  region.chart = parse_chart(j.at("chart"));
  region.box = Box{j.at("box").at("lo").get<std::vector<double>>(), j.at("box").at("hi").get<std::vector<double>>()};
  for (const auto& cj : j.at("conditions"))
    region.conditions.push_back(
        {parse_expression(cj.at("expr").get<std::string>(), dim), number_from(cj.at("lo")), number_from(cj.at("hi"))});
  IndexPairSpec s{parse_expression(j.at("f").get<std::string>(), dim),
                  parse_expression(j.at("g").get<std::string>(), dim), region};
  s.r0 = j.at("r0");
  s.r1 = j.at("r1");
  s.q0 = j.at("q0");
  s.alpha = j.at("alpha");
  s.s = j.at("s");
  s.r = j.at("r");
  s.beta = j.at("beta");
  s.gamma = j.at("gamma");
  return s;
}

json to_json(const BettiVector& b) {
  return {{"betti", b.ranks}, {"interpretation", interpret_conley(b).label()}};
}

json to_json(const ReachAndSamplingReport& r) {
  json j{{"mu", r.mu},
         {"lambda", r.lambda},
         {"k_max", r.k_max},
         {"tau_recip", r.tau_recip},
         {"rho_k", number_or_inf(r.rho_k)},
         {"delta", number_or_inf(r.delta)},
         {"delta_max", number_or_inf(r.delta_max)},
         {"K_half", r.K_half},
         {"K_quarter", r.K_quarter},
         {"sample_count", r.sample_count},
         {"kappa", r.kappa},
         {"volume", r.volume},
         {"provenance",
          {{"grid_cells_per_axis", r.n_grid}, {"inf_factor", r.factors.inf}, {"sup_factor", r.factors.sup}}}};
  if (r.epsilon_interval)
    j["epsilon_interval"] = {number_or_inf(r.epsilon_interval->lo), number_or_inf(r.epsilon_interval->hi)};
  else
    j["epsilon_interval"] = nullptr;
  return j;
}

json to_json(const AuditReport& r) {
  json w = json::array();
  for (const auto& x : r.witnesses)
    w.push_back({{"check", to_string(x.check)}, {"trajectory", x.trajectory}, {"state", x.state}, {"x", x.x}});
  return {{"trajectories", r.trajectories},
          {"near_boundary_starts", r.near_boundary_starts},
          {"exits", r.exits},
          {"converged", r.converged},
          {"ip2_violations", r.ip2_violations},
          {"ip3_violations", r.ip3_violations},
          {"h4_violations", r.h4_violations},
          {"f_violations", r.f_violations},
          {"band", r.band},
          {"spec_violations", r.spec_violations},
          {"witnesses", w},
          {"ok", r.ok()}};
}

json RunReport::to_json() const {
  using conley::to_json;
  json j;
  if (spec) j["index_pair"] = to_json(*spec);
  if (geometry_n || geometry_minus) {
    json g;
    if (geometry_n) g["N"] = to_json(*geometry_n);
    if (geometry_minus) g["N_minus"] = to_json(*geometry_minus);
    g["theoretical_samples"] = theoretical_samples;
    j["geometry"] = g;
  }
  if (raw_samples > 0) {
    j["sampling"] = {{"raw_samples", raw_samples},     {"raw_minus", raw_minus},
                     {"net_samples", net_samples},     {"net_minus", net_minus},
                     {"spacing", spacing},             {"density_pitch", density_pitch},
                     {"covering_N", covering_n},       {"covering_N_minus", covering_minus},
                     {"delta", delta},                 {"binding", binding},
                     {"density_certified", density_certified},
                     {"theory_certified", theory_certified},
                     {"theoretical_bound_met", theoretical_samples > 0 && raw_samples >= theoretical_samples}};
    if (interval) j["sampling"]["epsilon_interval"] = {interval->lo, interval->hi};
  }
  if (!probes.empty()) {
    json ps = json::array();
    for (const auto& p : probes)
      ps.push_back({{"epsilon", p.epsilon},
                    {"fraction", p.fraction},
                    {"betti", p.betti.ranks},
                    {"simplices", p.simplices},
                    {"euler_identity", p.euler_ok}});
    j["inference"] = {{"probes", ps}, {"epsilon_agreement", epsilon_agreement}};
    if (interpretation) j["inference"]["interpretation"] = interpretation->label();
  }
  if (oracle) j["oracle"] = to_json(*oracle);
  if (!oracle_note.empty()) j["oracle_note"] = oracle_note;
  j["agreement"] = agreement;
  if (audit) j["audit"] = to_json(*audit);
  json t = json::object();
  for (const auto& [stage, secs] : timings) t[stage] = t.value(stage, 0.0) + secs;
  j["timings_seconds"] = t;
  if (!failed_stage.empty()) j["error"] = {{"stage", failed_stage}, {"message", error}};
  return j;
}

namespace {

class Stage {
 public:
  Stage(RunReport& rep, std::string name)
      : rep_(rep), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~Stage() {
    rep_.timings.emplace_back(name_, std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
  }
  template <typename Fn>
  auto run(Fn&& fn) {
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      rep_.failed_stage = name_;
      rep_.error = e.what();
      throw StageError(name_, e.what());
    }
  }

 private:
  RunReport& rep_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto stage(RunReport& rep, const char* name, Fn&& fn) {
  Stage s(rep, name);
  return s.run(std::forward<Fn>(fn));
}

// Three interior points of the practical interval.
constexpr double kFractions[3] = {0.25, 0.5, 0.75};

}  // namespace

void run_pipeline(const PipelineConfig& config, RunReport& rep, PointSamplePair* net_out,
                  SimplicialPair* complex_out) {
  const int m = config.dim();
  Expression f = stage(rep, "parse", [&] { return parse_function(config); });
  Region region = stage(rep, "parse", [&] { return build_region(config); });
  std::optional<Expression> g;
  if (config.g) g = stage(rep, "parse", [&] { return parse_expression(*config.g, m); });
  stage(rep, "parse", [&] {
    if (config.chart.mode != ChartMode::Flat) throw ConfigError("the pipeline runs in flat charts only");
    return 0;
  });

  const IndexPairSpec spec = stage(rep, "index_pair", [&] {
    BuildOptions opts;
    opts.n_grid = config.indexpair_grid;
    opts.q0_factor = config.q0_factor;
    opts.seed = config.seed;
    IndexPairSpec s = build_index_pair(f, g ? &*g : nullptr, region, opts);
    s.validate();
    return s;
  });
  rep.spec = spec;

  const RegularIntersectionSpec set_n = index_pair_set(spec), set_minus = index_pair_exit_set(spec);
  GeometryOptions gopts;
  gopts.n_grid = config.geometry_grid;
  gopts.factors = config.factors;
  gopts.qmc_log2 = config.qmc_log2;
  if (config.theoretical_bounds) {
    stage(rep, "geometry", [&] {
      rep.geometry_n = reach_and_sampling_report(set_n, 0, config.kappa, gopts);
      try {
        rep.geometry_minus = reach_and_sampling_report(set_minus, 0, config.kappa, gopts);
      } catch (const std::invalid_argument&) {
        // N_minus misses the grid (attracting fixtures): no exit-set bound.
      }
      // Samples are uniform on N; N_minus receives a vol(N_minus)/vol(N) share.
      const double share = rep.geometry_minus && rep.geometry_n->volume > 0
                               ? rep.geometry_minus->volume / rep.geometry_n->volume
                               : 1.0;
      double n = static_cast<double>(rep.geometry_n->sample_count);
      if (rep.geometry_minus && share > 0) n = std::max(n, static_cast<double>(rep.geometry_minus->sample_count) / share);
      rep.theoretical_samples =
          n < 1.8e19 ? static_cast<std::uint64_t>(n) : std::numeric_limits<std::uint64_t>::max();
      return 0;
    });
  }

  const std::size_t n_raw = config.n.value_or(20000);
  const PointSamplePair raw = stage(rep, "sample", [&] { return sample_index_pair(spec, n_raw, config.seed); });
  rep.raw_samples = raw.size();
  rep.raw_minus = raw.minus_count();

  double diameter = 0;
  for (int a = 0; a < m; ++a) diameter += region.box.width(a) * region.box.width(a);
  diameter = std::sqrt(diameter);
  rep.spacing = config.spacing.value_or(diameter / 60);
  PointSamplePair net = stage(rep, "sparsify", [&] { return sparsify(raw, rep.spacing); });
  rep.net_samples = net.size();
  rep.net_minus = net.minus_count();

  stage(rep, "certify_density", [&] {
    rep.density_pitch = rep.spacing / 8;
    const auto in_n = [&](std::span<const double> x) { return classify_point(spec, x) != PairLabel::Outside; };
    const auto in_minus = [&](std::span<const double> x) { return classify_point(spec, x) == PairLabel::InNminus; };
    const auto minus = net.minus_points();
    // Measure covering radii over the grid, then certify at the padded value.
    const double probe = 4 * rep.density_pitch;
    rep.covering_n = certify_density(net.points, in_n, region.box, probe, rep.density_pitch).covering_radius;
    rep.covering_minus = minus.empty() ? 0.0
                                       : certify_density(minus, in_minus, region.box, probe, rep.density_pitch)
                                             .covering_radius;
    rep.binding = rep.covering_minus > rep.covering_n ? "N_minus" : "N";
    rep.delta = (std::max(rep.covering_n, rep.covering_minus) + rep.density_pitch * std::sqrt(double(m))) *
                (1 + 1e-12);
    const bool ok_n = certify_density(net.points, in_n, region.box, rep.delta, rep.density_pitch).certified;
    const bool ok_minus =
        minus.empty() || certify_density(minus, in_minus, region.box, rep.delta, rep.density_pitch).certified;
    rep.density_certified = ok_n && ok_minus;
    if (!rep.density_certified) throw std::runtime_error("density certification failed at the measured radius");
    net.delta_target = rep.delta;
    double rho2 = std::numeric_limits<double>::infinity();
    if (rep.geometry_n) rho2 = std::min(rho2, rep.geometry_n->rho_k);
    if (rep.geometry_minus) rho2 = std::min(rho2, rep.geometry_minus->rho_k);
    rep.theory_certified = rep.geometry_n && rep.delta < rho2 / 4;
    // Practical interval: the epsilon interval of a reach 16 delta / 3,
    // which is (4 delta / 3, 4 delta).
    rep.interval = epsilon_interval(rep.delta, 16 * rep.delta / 3);
    return 0;
  });
  if (net_out) *net_out = net;

  stage(rep, "infer", [&] {
    std::vector<std::pair<double, double>> eps;
    if (config.epsilon)
      eps.emplace_back(*config.epsilon, -1.0);
    else
      for (double fr : kFractions) eps.emplace_back(rep.interval->at(fr), fr);
    const int max_dim = config.euler_closure ? m : m + 1;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      SimplicialPair pair = build_cech_pair(net, eps[i].first, max_dim, config.max_simplices);
      EpsilonProbe probe;
      probe.epsilon = eps[i].first;
      probe.fraction = eps[i].second;
      for (const auto& layer : pair.layers) probe.simplices.push_back(layer.size());
      probe.euler_ok = euler_identity_holds(pair, relative_betti_all(pair));
      probe.betti = config.euler_closure ? relative_betti_euler_closed(pair, m) : relative_betti(pair);
      probe.betti.ranks.resize(m + 1, 0);
      rep.probes.push_back(std::move(probe));
      if (complex_out && (eps.size() == 1 || i == 1)) *complex_out = std::move(pair);
    }
    rep.epsilon_agreement = true;
    for (const auto& p : rep.probes) rep.epsilon_agreement = rep.epsilon_agreement && p.betti.same(rep.probes[0].betti);
    rep.interpretation = interpret_conley(rep.probes[rep.probes.size() / 2].betti);
    return 0;
  });

  if (m <= 3) {
    stage(rep, "oracle", [&] {
      try {
        rep.oracle = grid_relative_homology_stable(index_pair_labeler(spec), region.box, config.oracle_resolution);
        rep.oracle->ranks.resize(m + 1, 0);
      } catch (const UnstableResolution& e) {
        rep.oracle_note = e.what();
      }
      return 0;
    });
  } else {
    rep.oracle_note = "grid oracle supports dimensions 1 to 3";
  }
  rep.agreement = rep.oracle.has_value() && rep.epsilon_agreement;
  if (rep.oracle)
    for (const auto& p : rep.probes) rep.agreement = rep.agreement && p.betti.same(*rep.oracle);

  if (config.audit_trajectories > 0)
    stage(rep, "audit", [&] {
      rep.audit = audit_dynamics(spec, config.audit_trajectories, config.seed);
      return 0;
    });
}

void write_points_csv(std::ostream& os, const PointSamplePair& sample) {
  const int d = sample.points.empty() ? 0 : static_cast<int>(sample.points.front().size());
  for (int a = 0; a < d; ++a) os << 'x' << a + 1 << ',';
  os << "in_n_minus\n";
  os.precision(17);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (double v : sample.points[i]) os << v << ',';
    os << static_cast<int>(sample.in_minus[i]) << '\n';
  }
}

}  // namespace conley
