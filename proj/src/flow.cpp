#include "conley/flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "conley/rng.hpp"

namespace conley {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::LeftRegion:
      return "left_region";
    case Termination::TimeBudget:
      return "time_budget";
    case Termination::Converged:
      return "converged";
  }
  return "?";
}

const char* to_string(AuditCheck c) {
  switch (c) {
    case AuditCheck::IP2:
      return "IP2";
    case AuditCheck::IP3:
      return "IP3";
    case AuditCheck::H4:
      return "H4";
    case AuditCheck::FMonotone:
      return "f_monotone";
  }
  return "?";
}

Trajectory simulate_flow(const Field& f, std::span<const double> x0, double step, double t_max,
                         const StopPredicate& stop) {
  if (!(step > 0) || !(t_max > 0)) throw std::invalid_argument("simulate_flow needs step > 0 and t_max > 0");
  const int d = static_cast<int>(x0.size());
  Trajectory traj;
  traj.start.assign(x0.begin(), x0.end());
  traj.step = step;
  traj.times.push_back(0.0);
  traj.states.push_back(traj.start);

  std::vector<double> x = traj.start, y(d), k1(d), k2(d), k3(d), k4(d);
  double t = 0.0;
  auto slope = [&](std::span<const double> at, std::vector<double>& out) {
    Jet1 j;
    try {
      j = f.jet1(at);
    } catch (const DomainError& e) {
      throw NonFiniteState(std::string("flow field failed at t = ") + std::to_string(t) + ": " + e.what());
    }
    for (int a = 0; a < d; ++a) out[a] = -j.grad[a];
  };
  if (stop && stop(x)) {
    traj.terminated = Termination::LeftRegion;
    return traj;
  }
  const long long steps = static_cast<long long>(std::ceil(t_max / step - 1e-9));
  for (long long n = 1; n <= steps; ++n) {
    t = static_cast<double>(n - 1) * step;
    slope(x, k1);
    if (norm(k1) < 1e-10) {
      traj.terminated = Termination::Converged;
      return traj;
    }
    for (int a = 0; a < d; ++a) y[a] = x[a] + 0.5 * step * k1[a];
    slope(y, k2);
    for (int a = 0; a < d; ++a) y[a] = x[a] + 0.5 * step * k2[a];
    slope(y, k3);
    for (int a = 0; a < d; ++a) y[a] = x[a] + step * k3[a];
    slope(y, k4);
    for (int a = 0; a < d; ++a) {
      x[a] += step / 6 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
      if (!std::isfinite(x[a])) throw NonFiniteState("flow state left the floating range at t = " +
                                                     std::to_string(static_cast<double>(n) * step));
    }
    traj.times.push_back(static_cast<double>(n) * step);
    traj.states.push_back(x);
    if (stop && stop(x)) {
      traj.terminated = Termination::LeftRegion;
      return traj;
    }
  }
  traj.terminated = Termination::TimeBudget;
  return traj;
}

namespace {

// Newton steps along grad h onto {h = beta}.
bool project_to_exit_level(const IndexPairSpec& spec, std::vector<double>& x) {
  const int d = spec.dim();
  for (int it = 0; it < 30; ++it) {
    const Jet2 j = perturbation_h(spec, x);
    const double r = j.value - spec.beta;
    double g2 = 0;
    for (int a = 0; a < d; ++a) g2 += j.grad[a] * j.grad[a];
    if (!(g2 > 0)) return false;
    if (std::abs(r) <= 1e-13 * std::sqrt(g2)) return true;
    for (int a = 0; a < d; ++a) x[a] -= r * j.grad[a] / g2;
  }
  return false;
}

double sup_gradient(const IndexPairSpec& spec) {
  const Grid grid(spec.region.box, 100);
  double sup = 0;
  grid.for_each([&](long long, std::span<const double> x) {
    if (!spec.region.contains(x)) return;
    const Jet1 j = spec.f.jet1(x);
    sup = std::max(sup, norm(std::span<const double>(j.grad.data(), j.dim)));
  });
  return sup;
}

}  // namespace

AuditReport audit_dynamics(const IndexPairSpec& spec, int n_trajectories, std::uint64_t seed,
                           const AuditOptions& opts, bool keep_trajectories) {
  AuditReport rep;
  rep.spec_violations = spec.violations();
  rep.band = std::max(10 * opts.step * sup_gradient(spec), 1e-6);
  const int d = spec.dim();

  const int n_near = static_cast<int>(std::round(opts.near_fraction * n_trajectories));
  std::vector<Point> starts;
  try {
    starts = sample_index_pair(spec, std::max(1, n_trajectories), seed).points;
  } catch (const RejectionStall&) {
    rep.spec_violations.push_back("N is empty or too small to seed trajectories");
    return rep;
  }
  starts.resize(n_trajectories);

  // Replace the first n_near starts by points within 2 step of {h = beta}.
  CounterRng rng(mix64(seed ^ 0x3c6ef372fe94f82bULL));
  std::vector<double> y(d), dir(d);
  for (int i = 0; i < n_near; ++i) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      y = starts[(i + attempt) % starts.size()];
      if (!project_to_exit_level(spec, y)) continue;
      double dn = 0;
      for (int a = 0; a < d; ++a) {
        dir[a] = rng.uniform(-1, 1);
        dn += dir[a] * dir[a];
      }
      const double radius = 2 * opts.step * rng.uniform() / std::max(std::sqrt(dn), 1e-300);
      for (int a = 0; a < d; ++a) y[a] += radius * dir[a];
      if (classify_point(spec, y) == PairLabel::Outside) continue;
      starts[i] = y;
      ++rep.near_boundary_starts;
      break;
    }
  }

  const Field f(spec.f);
  const auto outside = [&spec](std::span<const double> x) { return classify_point(spec, x) == PairLabel::Outside; };
  auto witness = [&](AuditCheck c, int t, int s, const Point& x) {
    if (rep.witnesses.size() < opts.max_witnesses) rep.witnesses.push_back({c, t, s, x});
  };

  for (int t = 0; t < n_trajectories; ++t) {
    Trajectory traj = simulate_flow(f, starts[t], opts.step, opts.t_max, outside);
    ++rep.trajectories;
    if (traj.terminated == Termination::Converged) ++rep.converged;

    bool seen_minus = false, h_bad = false, f_bad = false, ip2_bad = false;
    double h_prev = 0, f_prev = 0;
    PairLabel prev = PairLabel::Outside;
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
      const Point& x = traj.states[s];
      const double hv = perturbation_value(spec, x), fv = spec.f.value(x);
      const PairLabel label = classify_point(spec, x);
      if (s > 0) {
        if (!h_bad && hv > h_prev + opts.monotone_slack) {
          h_bad = true;
          witness(AuditCheck::H4, t, static_cast<int>(s), x);
        }
        if (!f_bad && fv > f_prev + opts.monotone_slack) {
          f_bad = true;
          witness(AuditCheck::FMonotone, t, static_cast<int>(s), x);
        }
        if (!ip2_bad && prev == PairLabel::InNminus && label == PairLabel::InNonly) {
          ip2_bad = true;
          witness(AuditCheck::IP2, t, static_cast<int>(s), x);
        }
      }
      if (label == PairLabel::Outside) {
        // First exit: the previous state must be in N_minus, or within one
        // step's band above {h = gamma} when the flow jumped across it.
        ++rep.exits;
        const bool crossed = seen_minus || (s > 0 && h_prev - spec.gamma <= rep.band);
        if (!crossed) {
          ++rep.ip3_violations;
          witness(AuditCheck::IP3, t, static_cast<int>(s), x);
        }
        break;
      }
      seen_minus = seen_minus || label == PairLabel::InNminus;
      h_prev = hv;
      f_prev = fv;
      prev = label;
    }
    rep.h4_violations += h_bad;
    rep.f_violations += f_bad;
    rep.ip2_violations += ip2_bad;
    if (keep_trajectories) rep.kept.push_back(std::move(traj));
  }
  return rep;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const IndexPairSpec& spec) {
  os << "t";
  for (int a = 0; a < spec.dim(); ++a) os << ",x" << a + 1;
  os << ",f,h\n";
  os.precision(17);
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    os << traj.times[s];
    for (double v : traj.states[s]) os << ',' << v;
    os << ',' << spec.f.value(traj.states[s]) << ',' << perturbation_value(spec, traj.states[s]) << '\n';
  }
}

}  // namespace conley
