#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "conley/field.hpp"
#include "conley/indexpair.hpp"
#include "conley/sampler.hpp"

namespace conley {

class NonFiniteState : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Termination { LeftRegion, TimeBudget, Converged };

const char* to_string(Termination t);

struct Trajectory {
  Point start;
  std::vector<double> times;
  std::vector<Point> states;
  double step = 0.0;
  Termination terminated = Termination::TimeBudget;
};

using StopPredicate = std::function<bool(std::span<const double>)>;

/// Fixed-step RK4 on x' = -grad f. Stops when `stop` holds at a state
/// (LeftRegion), when |grad f| < 1e-10 (Converged) or at t_max.
Trajectory simulate_flow(const Field& f, std::span<const double> x0, double step, double t_max,
                         const StopPredicate& stop = nullptr);

enum class AuditCheck { IP2, IP3, H4, FMonotone };

const char* to_string(AuditCheck c);

struct AuditWitness {
  AuditCheck check;
  int trajectory = 0;
  int state = 0;
  Point x;
};

struct AuditOptions {
  double step = 1e-3;
  double t_max = 20.0;
  double near_fraction = 0.2;  // share of starts seeded within 2 step of {h = beta}
  double monotone_slack = 1e-9;
  std::size_t max_witnesses = 20;
};

struct AuditReport {
  int trajectories = 0;
  int near_boundary_starts = 0;
  int exits = 0;
  int converged = 0;
  int ip2_violations = 0;
  int ip3_violations = 0;
  int h4_violations = 0;
  int f_violations = 0;
  double band = 0.0;  // IP3 tolerance in h units
  std::vector<std::string> spec_violations;
  std::vector<AuditWitness> witnesses;
  std::vector<Trajectory> kept;  // filled only when requested

  int violations() const { return ip2_violations + ip3_violations + h4_violations + f_violations; }
  bool ok() const { return spec_violations.empty() && violations() == 0; }
};

/// Flows seeded starts in N and checks that N_minus is positively invariant
/// in N (IP2), that every exit passes through N_minus (IP3) and that f and h
/// never increase along trajectories (H4). A corrupted spec is reported, not
/// thrown.
AuditReport audit_dynamics(const IndexPairSpec& spec, int n_trajectories, std::uint64_t seed,
                           const AuditOptions& opts = {}, bool keep_trajectories = false);

/// CSV with columns t, x1..xd, f, h.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const IndexPairSpec& spec);

}  // namespace conley
