#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "conley/field.hpp"
#include "conley/indexpair.hpp"
#include "conley/manifold.hpp"
#include "conley/sampler.hpp"

namespace conley {

class DegenerateJacobian : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ConstraintKind { LevelSet, Sublevel };

/// E = region ∩ {f_i ∈ I_i}, with I_i = {0} (LevelSet) or (-inf, 0] (Sublevel).
struct RegularIntersectionSpec {
  std::vector<Field> fields;
  std::vector<ConstraintKind> kinds;
  ManifoldChart chart;
  Region region;

  int ell() const { return static_cast<int>(fields.size()); }
  int dim() const { return region.dim(); }
  /// Membership with an absolute slack on each constraint value.
  bool contains(std::span<const double> x, double slack = 0.0) const;
};

/// The two-sublevel description of N = {f <= alpha} ∩ {h >= beta}.
RegularIntersectionSpec index_pair_set(const IndexPairSpec& spec);
/// N_minus = {f <= alpha} ∩ {(h - beta)(h - gamma) <= 0}.
RegularIntersectionSpec index_pair_exit_set(const IndexPairSpec& spec);

/// Multipliers applied to grid infima and suprema.
struct SafetyFactors {
  double inf = 0.9;
  double sup = 1.1;
};

struct MuLambda {
  double mu = 0.0;
  double lambda = 0.0;
  int k_max = 0;              // largest active set met on the grid
  long long locus_points = 0;  // projected grid points used for mu
  double grid_pitch = 0.0;
};

MuLambda estimate_mu_lambda(const RegularIntersectionSpec& spec, int n_grid, SafetyFactors factors = {});

/// 1 / (tau_recip + sqrt(k) lambda / mu); +inf when the denominator vanishes.
double rho_k(double tau_recip, double mu, double lambda, int k);

struct OpenInterval {
  double lo = 0.0;
  double hi = 0.0;
  double at(double fraction) const { return lo + fraction * (hi - lo); }
};

/// (rho (1/2 - sqrt(1/4 - delta/rho)), rho (1/2 + sqrt(1/4 - delta/rho))), empty
/// unless delta < rho/4.
std::optional<OpenInterval> epsilon_interval(double delta, double rho);

struct Bottleneck {
  double eta_bar = 0.0;
  double mu_F = 0.0;
  double lambda_F = 0.0;
  double rho_F = 0.0;
  bool empty_band = false;  // no grid points on E_{r/2} ∩ {F = 0}; eta_bar = r/2
  long long band_points = 0;
};

/// eta_bar(r) = min(r/2, rho_F(r)) for E = {f1 <= 0} ∩ {f2 <= 0} inside the
/// context's region, with F = f1 f2.
Bottleneck bottleneck_lower_bound(const Field& f1, const Field& f2, double r, const RegularIntersectionSpec& context,
                                  int n_grid, SafetyFactors factors = {});

struct CapVolumes {
  double vball = 0.0;
  double vhs = 0.0;
  double vhstwo = 0.0;  // NaN without an angle
};

/// Ball, single-cap and two-cap volumes in R^m. Caps are balls of radius rho
/// tangent at the origin (rho = inf gives half-spaces); the QMC values are
/// estimate minus three standard errors.
CapVolumes cap_volumes(int m, double t, double rho, std::optional<double> phi, int log2_points = 20);

struct GeometryOptions {
  int n_grid = 400;
  SafetyFactors factors;
  int qmc_log2 = 20;
};

struct CoverageBound {
  double K = 0.0;       // cap / volume
  double cap = 0.0;     // vhstwo or vhs at radius t
  double volume = 0.0;  // grid estimate of vol(E)
  double t = 0.0;       // eta_bar/2 * cos(theta(eta_bar/2))
  double rho = 0.0;     // cap radius
  double cos_phi = 0.0;
  bool two_caps = false;
  Bottleneck bottleneck;
};

/// Lower bound on inf_p vol(B(p, r) ∩ E) / vol(E) for a two-sublevel
/// intersection. `ml` may carry a precomputed estimate.
CoverageBound coverage_lower_bound_K(const RegularIntersectionSpec& spec, double r, const GeometryOptions& opts,
                                     const MuLambda* ml = nullptr);

/// ceil((1/K_half) (ln(nu_total/K_quarter) + ln(1/kappa))), saturating at
/// the largest uint64.
std::uint64_t required_samples(double K_half, double K_quarter, double nu_total, double kappa);

struct ReachAndSamplingReport {
  double mu = 0.0;
  double lambda = 0.0;
  int k_max = 0;
  double tau_recip = 0.0;
  double rho_k = 0.0;
  double delta = 0.0;
  double delta_max = 0.0;  // rho_k / 4
  std::optional<OpenInterval> epsilon_interval;
  double K_half = 0.0;
  double K_quarter = 0.0;
  std::uint64_t sample_count = 0;
  double kappa = 0.0;
  double volume = 0.0;
  int n_grid = 0;
  SafetyFactors factors;
  std::function<double(double)> eta_bar;
  std::function<double(double)> K_of_r;
};

/// Full geometric report for density target delta (<= 0 picks 3 rho_k / 16,
/// whose epsilon interval is (rho_k/4, 3 rho_k/4)).
ReachAndSamplingReport reach_and_sampling_report(const RegularIntersectionSpec& spec, double delta, double kappa,
                                                 const GeometryOptions& opts = {});

/// Points of the grid projected onto {f_i = 0, i in active} and kept when they
/// lie in E. Exposed for tests and the reach probe.
std::vector<Point> locus_points(const RegularIntersectionSpec& spec, const std::vector<int>& active, int n_grid);

struct ReachEstimate {
  double reach = 0.0;  // +inf when no probe meets the medial axis
  int probes = 0;
  std::size_t cloud_size = 0;
};

/// Medial-axis probing: from random boundary points p inside `probe_box`,
/// follow the outward normal n until some boundary point q is as close as p,
/// i.e. t = |q - p|^2 / (2 <q - p, n>). The minimum over probes estimates the
/// reach from above.
ReachEstimate estimate_reach_mc(const RegularIntersectionSpec& spec, const Box& probe_box, int n_grid, int n_probes,
                                std::uint64_t seed);

/// Brute-force inf over grid points p of E of vol(B(p, r) ∩ E) / vol(E), at
/// `n_grid` cells per axis. Used to calibrate the sampling bound.
double empirical_coverage(const std::function<bool(std::span<const double>)>& inside, const Box& box, double r,
                          int n_grid);

}  // namespace conley
