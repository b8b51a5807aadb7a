// Command-line front end: one verb per pipeline stage plus `run`.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "conley/oracle.hpp"
#include "conley/pipeline.hpp"
#include "conley/plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> eps;
  std::optional<int> resolution;
};

conley::PipelineConfig load(const Options& o) {
  conley::PipelineConfig c = conley::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.eps) {
    if (!(*o.eps > 0)) throw conley::ConfigError("--eps must be positive");
    c.epsilon = *o.eps;
  }
  if (o.resolution) {
    if (*o.resolution < 8) throw conley::ConfigError("--resolution must be at least 8");
    c.oracle_resolution = *o.resolution;
  }
  if (!o.out.empty()) c.output_dir = o.out;
  if (c.output_dir.empty()) c.output_dir = ".";
  return c;
}

fs::path output(const conley::PipelineConfig& c, const char* name) {
  fs::create_directories(c.output_dir);
  return fs::path(c.output_dir) / name;
}

void write_json(const conley::PipelineConfig& c, const json& j) {
  std::ofstream os(output(c, "report.json"));
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("cannot write report.json");
}

// Parse-stage failures (expression syntax, dimensions) are configuration errors.
conley::IndexPairSpec build_spec(const conley::PipelineConfig& c) {
  conley::Expression f = [&] {
    try {
      return conley::parse_function(c);
    } catch (const std::exception& e) {
      throw conley::StageError("parse", e.what());
    }
  }();
  conley::Region region;
  std::optional<conley::Expression> g;
  try {
    region = conley::build_region(c);
    if (c.g) g = conley::parse_expression(*c.g, c.dim());
  } catch (const std::exception& e) {
    throw conley::StageError("parse", e.what());
  }
  conley::BuildOptions opts;
  opts.n_grid = c.indexpair_grid;
  opts.q0_factor = c.q0_factor;
  opts.seed = c.seed;
  try {
    return conley::build_index_pair(f, g ? &*g : nullptr, region, opts);
  } catch (const std::exception& e) {
    throw conley::StageError("index_pair", e.what());
  }
}

json audit_json(const conley::PerturbationAudit& a) {
  return {{"nodes", a.nodes},         {"h1", a.h1},
          {"h2", a.h2},               {"h3", a.h3},
          {"h4_sign", a.h4_sign},     {"h4_strict", a.h4_strict},
          {"h5", a.h5},               {"containment", a.containment},
          {"q_monotone", a.q_monotone}, {"q_slope", a.q_slope},
          {"max_q_slope_ratio", a.max_q_slope_ratio}, {"ok", a.ok()}};
}

int cmd_bounds(const conley::PipelineConfig& c) {
  const conley::IndexPairSpec spec = build_spec(c);
  conley::GeometryOptions g;
  g.n_grid = c.geometry_grid;
  g.factors = c.factors;
  g.qmc_log2 = c.qmc_log2;
  json j{{"index_pair", conley::to_json(spec)}};
  j["N"] = conley::to_json(conley::reach_and_sampling_report(conley::index_pair_set(spec), 0, c.kappa, g));
  try {
    j["N_minus"] = conley::to_json(conley::reach_and_sampling_report(conley::index_pair_exit_set(spec), 0, c.kappa, g));
  } catch (const std::invalid_argument& e) {
    j["N_minus"] = {{"unavailable", e.what()}};
  }
  write_json(c, j);
  std::cout << "rho_k(N) = " << j["N"]["rho_k"] << ", samples(N) = " << j["N"]["sample_count"] << '\n';
  return kExitOk;
}

int cmd_build_pair(const conley::PipelineConfig& c) {
  const conley::IndexPairSpec spec = build_spec(c);
  const conley::PerturbationAudit a = conley::audit_perturbation(spec, c.geometry_grid);
  write_json(c, {{"index_pair", conley::to_json(spec)}, {"perturbation_audit", audit_json(a)}});
  std::cout << "q0 = " << spec.q0 << ", alpha = " << spec.alpha << ", beta = " << spec.beta
            << ", gamma = " << spec.gamma << ", audit " << (a.ok() ? "ok" : "FAILED") << '\n';
  return a.ok() ? kExitOk : kExitFailed;
}

int cmd_sample(const conley::PipelineConfig& c) {
  const conley::IndexPairSpec spec = build_spec(c);
  const conley::PointSamplePair s = conley::sample_index_pair(spec, c.n.value_or(20000), c.seed);
  std::ofstream os(output(c, "points.csv"));
  conley::write_points_csv(os, s);
  write_json(c, {{"samples", s.size()}, {"in_n_minus", s.minus_count()}, {"seed", c.seed}});
  std::cout << s.size() << " points, " << s.minus_count() << " in N_minus\n";
  return kExitOk;
}

int cmd_audit(const conley::PipelineConfig& c) {
  const conley::IndexPairSpec spec = build_spec(c);
  const int n = c.audit_trajectories > 0 ? c.audit_trajectories : 200;
  const conley::AuditReport r = conley::audit_dynamics(spec, n, c.seed);
  write_json(c, {{"audit", conley::to_json(r)}});
  std::cout << r.trajectories << " trajectories, " << r.exits << " exits, " << r.violations() << " violations\n";
  return r.ok() ? kExitOk : kExitFailed;
}

int cmd_oracle(const conley::PipelineConfig& c) {
  const conley::IndexPairSpec spec = build_spec(c);
  json j{{"resolution", c.oracle_resolution}};
  int code = kExitOk;
  try {
    const conley::BettiVector b =
        conley::grid_relative_homology_stable(conley::index_pair_labeler(spec), spec.region.box, c.oracle_resolution);
    j["oracle"] = conley::to_json(b);
    std::cout << "oracle betti " << b.str() << " (" << conley::interpret_conley(b).label() << ")\n";
  } catch (const conley::UnstableResolution& e) {
    j["oracle_note"] = e.what();
    std::cout << e.what() << '\n';
    code = kExitFailed;
  }
  write_json(c, j);
  return code;
}

void write_figure(const conley::PipelineConfig& c, const conley::IndexPairSpec& spec,
                  const conley::PointSamplePair* points) {
  if (spec.dim() != 2) return;
  std::ofstream os(output(c, "figure.svg"));
  conley::write_figure_svg(os, spec, points);
}

int cmd_plot(const conley::PipelineConfig& c) {
  const conley::IndexPairSpec spec = build_spec(c);
  if (spec.dim() != 2) throw conley::ConfigError("plot needs a 2-dimensional config");
  const conley::PointSamplePair s = conley::sample_index_pair(spec, c.n.value_or(2000), c.seed);
  write_figure(c, spec, &s);
  std::cout << "wrote " << output(c, "figure.svg").string() << '\n';
  return kExitOk;
}

// `infer` and `run` share the pipeline; `infer` skips the theoretical bounds
// and the flow audit.
int cmd_pipeline(conley::PipelineConfig c, bool full) {
  if (!full) {
    c.theoretical_bounds = false;
    c.audit_trajectories = 0;
  }
  conley::RunReport rep;
  conley::PointSamplePair net;
  conley::SimplicialPair complex;
  int code = kExitOk;
  try {
    conley::run_pipeline(c, rep, &net, &complex);
  } catch (const conley::StageError& e) {
    write_json(c, rep.to_json());
    std::cerr << "error in stage " << e.what() << '\n';
    return e.stage() == "parse" ? kExitConfig : kExitFailed;
  }
  write_json(c, rep.to_json());
  {
    std::ofstream os(output(c, "points.csv"));
    conley::write_points_csv(os, net);
  }
  {
    std::ofstream os(output(c, "complex.txt"));
    conley::write_complex(os, complex);
  }
  if (full) write_figure(c, *rep.spec, &net);

  const auto& mid = rep.probes[rep.probes.size() / 2];
  std::cout << "betti " << mid.betti.str() << " (" << rep.interpretation->label() << ")";
  if (rep.oracle) std::cout << ", oracle " << rep.oracle->str();
  std::cout << ", delta " << rep.delta << ", agreement " << (rep.agreement ? "yes" : "no") << '\n';
  if (full && rep.audit && !rep.audit->ok()) code = kExitFailed;
  if (!rep.agreement) code = kExitFailed;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conley index pairs from point samples"};
  app.require_subcommand(1);
  Options o;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON pipeline config")->required();
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--eps", o.eps, "single epsilon instead of the three-point probe");
    sub->add_option("--resolution", o.resolution, "oracle grid resolution");
    return sub;
  };
  CLI::App* bounds = add("bounds", "reach, epsilon interval and sample-count bounds");
  CLI::App* build = add("build-pair", "construct (N, N_minus) and audit the perturbation");
  CLI::App* sample = add("sample", "uniform sample of N");
  CLI::App* infer = add("infer", "sample, certify and compute Cech pair homology");
  CLI::App* audit = add("audit-flow", "gradient-flow audit of the index-pair axioms");
  CLI::App* oracle = add("oracle", "cubical grid homology of (N, N_minus)");
  CLI::App* run = add("run", "full pipeline with oracle cross-check");
  CLI::App* plot = add("plot", "SVG figure of a 2-D index pair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }

  try {
    const conley::PipelineConfig c = load(o);
    if (*bounds) return cmd_bounds(c);
    if (*build) return cmd_build_pair(c);
    if (*sample) return cmd_sample(c);
    if (*infer) return cmd_pipeline(c, false);
    if (*audit) return cmd_audit(c);
    if (*oracle) return cmd_oracle(c);
    if (*run) return cmd_pipeline(c, true);
    if (*plot) return cmd_plot(c);
  } catch (const conley::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const conley::StageError& e) {
    std::cerr << "error in stage " << e.what() << '\n';
    return e.stage() == "parse" ? kExitConfig : kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitFailed;
}
