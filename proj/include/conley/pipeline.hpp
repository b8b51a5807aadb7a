#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conley/complex.hpp"
#include "conley/flow.hpp"
#include "conley/geometry.hpp"
#include "conley/homology.hpp"
#include "conley/indexpair.hpp"

namespace conley {

/// Configuration rejected by the schema check.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A failure inside run_pipeline, tagged with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ConditionText {
  std::string expr;
  std::optional<double> lo, hi;
};

struct PipelineConfig {
  std::string function;
  std::optional<std::string> g;
  ManifoldChart chart = ManifoldChart::flat(2);
  std::vector<double> box_lo, box_hi;
  std::vector<ConditionText> conditions;

  int indexpair_grid = 200;
  int geometry_grid = 400;
  double q0_factor = 0.9;
  SafetyFactors factors;
  int qmc_log2 = 20;
  bool theoretical_bounds = true;

  double kappa = 0.05;
  std::uint64_t seed = 0;
  std::optional<std::size_t> n;      // raw sample count; default 20000
  std::optional<double> spacing;     // sparsification spacing; default diameter / 60
  std::optional<double> epsilon;     // single-epsilon override
  bool euler_closure = true;         // Čech up to dim m, top degree from the Euler characteristic
  std::size_t max_simplices = 5'000'000;

  int oracle_resolution = 256;
  int audit_trajectories = 0;        // 0 skips the flow audit
  std::string output_dir;

  int dim() const { return static_cast<int>(box_lo.size()); }
};

/// Validates the JSON schema before any parsing of expressions.
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);
nlohmann::json to_json(const PipelineConfig& c);

/// Parses the function, region and optional g; errors carry the stage "parse".
Region build_region(const PipelineConfig& c);
Expression parse_function(const PipelineConfig& c);

nlohmann::json to_json(const IndexPairSpec& spec);
IndexPairSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BettiVector& b);
nlohmann::json to_json(const ReachAndSamplingReport& r);
nlohmann::json to_json(const AuditReport& r);

struct EpsilonProbe {
  double epsilon = 0.0;
  double fraction = 0.0;  // position inside the practical interval
  BettiVector betti;
  std::vector<std::size_t> simplices;  // per dimension
  bool euler_ok = false;
};

struct RunReport {
  std::optional<IndexPairSpec> spec;
  std::optional<ReachAndSamplingReport> geometry_n, geometry_minus;
  std::uint64_t theoretical_samples = 0;

  std::size_t raw_samples = 0, raw_minus = 0;
  std::size_t net_samples = 0, net_minus = 0;
  double spacing = 0.0;
  double density_pitch = 0.0;
  double covering_n = 0.0, covering_minus = 0.0;
  double delta = 0.0;               // certified density of the net
  std::string binding;              // "N" or "N_minus"
  bool density_certified = false;
  bool theory_certified = false;    // delta below rho_2/4 of both sets
  std::optional<OpenInterval> interval;

  std::vector<EpsilonProbe> probes;
  bool epsilon_agreement = false;
  std::optional<ConleyInterpretation> interpretation;
  std::optional<BettiVector> oracle;
  std::string oracle_note;
  bool agreement = false;
  std::optional<AuditReport> audit;

  std::vector<std::pair<std::string, double>> timings;
  std::string failed_stage, error;

  nlohmann::json to_json() const;
};

/// Constructs (N, N_minus), reports the theoretical bounds, samples, certifies
/// density, infers homology at three epsilons and cross-checks the oracle.
/// On failure `report` holds every completed stage and StageError is thrown.
void run_pipeline(const PipelineConfig& config, RunReport& report, PointSamplePair* net_out = nullptr,
                  SimplicialPair* complex_out = nullptr);

/// Point cloud CSV: x1..xd, in_n_minus.
void write_points_csv(std::ostream& os, const PointSamplePair& sample);

}  // namespace conley
