#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conley/field.hpp"
#include "conley/manifold.hpp"

namespace conley {

class NoIntervalFound : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class NonPositiveAlignment : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class RegularValueSearchFailed : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class InvalidSpec : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// g = sum_i (df/dx_i)^2, built symbolically.
Expression default_bounding_function(const Expression& f);

struct RegularityInterval {
  double r0 = 0.0;
  double r1 = 0.0;
  double s_bar = 0.0;  // min of g over the region boundary
};

/// Searches candidate intervals inside (0, s_bar) and returns the widest one
/// passing the grid checks: no near-critical g values in the band, and both
/// {g <= r1} and {g <= r0} are single components away from the region
/// boundary.
RegularityInterval find_regularity_interval(const Expression& g, const Region& region, int n_grid);

/// q0 = factor * inf over the band {r0 <= g <= r1} of |grad f| / |grad g| * (r1 - r0) / 2.
double compute_q0(const Expression& f, const Expression& g, double r0, double r1, const Region& region,
                  int n_grid, double factor = 0.9);

/// Value and first two derivatives of the step function q.
struct StepJet {
  double q = 0.0;
  double dq = 0.0;
  double d2q = 0.0;
};

double step_q(double t, double q0, double r0, double r1);
StepJet step_q_jet(double t, double q0, double r0, double r1);

struct IndexPairSpec {
  Expression f;
  Expression g;
  Region region;
  double r0 = 0.0, r1 = 0.0, q0 = 0.0;
  double alpha = 0.0, s = 0.0, r = 0.0;
  double beta = 0.0, gamma = 0.0;

  int dim() const { return f.dim(); }

  /// Every violated invariant, human readable; empty when valid.
  std::vector<std::string> violations() const;
  /// Throws InvalidSpec listing the violations.
  void validate() const;
};

struct Constants {
  double alpha, s, r, beta, gamma;
  int jitters = 0;
};

/// Default constants (alpha = q0/4, s and r at 3/4 and 7/8 of [r0, r1]),
/// jittered until (alpha, r) and (alpha, s) are regular values of (f, g) on
/// the grid.
Constants choose_constants(double q0, double r0, double r1, const Expression& f, const Expression& g,
                           const Region& region, int n_grid, std::uint64_t seed = 0);

/// h = f + q(g) inside the region, f outside.
Jet2 perturbation_h(const IndexPairSpec& spec, std::span<const double> p);
double perturbation_value(const IndexPairSpec& spec, std::span<const double> p);

/// h as a Field, for reach and bottleneck estimates.
Field perturbation_field(const IndexPairSpec& spec);

enum class PairLabel { Outside = 0, InNonly = 1, InNminus = 2 };

PairLabel classify_point(const IndexPairSpec& spec, std::span<const double> p);

const char* to_string(PairLabel label);

/// Grid audit of the perturbation h over the region box. Each count is the
/// number of grid nodes (or sampled step-function abscissae) failing a check.
struct PerturbationAudit {
  long long nodes = 0;
  long long h1 = 0;           // h >= f
  long long h2 = 0;           // g <= r0 implies h = f + q0
  long long h3 = 0;           // g >= r1 iff h = f
  long long h4_sign = 0;      // <grad h, grad f> >= -1e-12
  long long h4_strict = 0;    // ... and > 0 where |grad f| > 1e-6
  long long h5 = 0;           // |grad h| < 1e-6 iff |grad f| < 1e-6
  long long containment = 0;  // N_minus in N in {g <= r}
  long long q_monotone = 0;
  long long q_slope = 0;      // |q'| <= 2 q0 / (r1 - r0)
  double max_q_slope_ratio = 0.0;

  long long failures() const { return h1 + h2 + h3 + h4_sign + h4_strict + h5 + containment + q_monotone + q_slope; }
  bool ok() const { return failures() == 0; }
};

PerturbationAudit audit_perturbation(const IndexPairSpec& spec, int n_grid = 400);

/// Full automatic construction: g (default if empty), interval, q0, constants.
struct BuildOptions {
  int n_grid = 200;
  double q0_factor = 0.9;
  std::uint64_t seed = 0;
};
IndexPairSpec build_index_pair(const Expression& f, const Expression* g, const Region& region,
                               const BuildOptions& opts = {});

}  // namespace conley
