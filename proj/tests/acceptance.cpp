// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "conley/pipeline.hpp"
#include "conley/rng.hpp"
#include "conley/sampler.hpp"
#include "fixtures.hpp"

using namespace conley;
using clk = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << title << ": " << detail << std::endl;
}

struct FixtureRun {
  std::string name;
  RunReport rep;
  double seconds = 0.0;
  int oracle_resolution = 0;
  std::string error;
};

FixtureRun run_fixture(const std::string& name) {
  FixtureRun out{name};
  const auto path = std::filesystem::path(CONLEY_CONFIG_DIR) / (name + ".json");
  const auto t0 = clk::now();
  try {
    PipelineConfig c = load_config(path.string());
    c.audit_trajectories = 200;
    out.oracle_resolution = c.oracle_resolution;
    run_pipeline(c, out.rep);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(clk::now() - t0).count();
  return out;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string probes_str(const RunReport& r) {
  std::string s;
  for (const auto& p : r.probes) s += (s.empty() ? "" : " ") + p.betti.str(3);
  return s;
}

/// Betti vector, interpretation and oracle match for one fixture.
bool recovered(const FixtureRun& f, const BettiVector* expect, const std::string* label, std::string& detail) {
  std::ostringstream os;
  if (!f.error.empty()) {
    detail = f.name + " failed: " + f.error;
    return false;
  }
  const RunReport& r = f.rep;
  const bool have = !r.probes.empty() && r.oracle.has_value() && r.interpretation.has_value();
  bool ok = have && r.agreement;
  if (have && expect) ok = ok && r.probes[1].betti.same(*expect) && r.oracle->same(*expect);
  if (have && label) ok = ok && r.interpretation->label() == *label;
  os << f.name << " probes " << probes_str(r);
  if (r.oracle)
    os << " oracle@" << f.oracle_resolution << "/" << 2 * f.oracle_resolution << " " << r.oracle->str(3);
  if (!r.oracle_note.empty()) os << " (" << r.oracle_note << ")";
  if (r.interpretation) os << " " << r.interpretation->label();
  os << ", " << fmt(f.seconds, 3) << " s";
  detail = os.str();
  return ok;
}

void criterion_recovery(int id, const std::string& title, const std::vector<const FixtureRun*>& runs,
                        const std::vector<BettiVector>& expect, const std::vector<std::string>& labels,
                        double time_limit) {
  bool ok = true;
  std::string all;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::string d;
    const BettiVector* e = i < expect.size() ? &expect[i] : nullptr;
    const std::string* l = i < labels.size() ? &labels[i] : nullptr;
    ok = recovered(*runs[i], e, l, d) && ok;
    if (time_limit > 0 && runs[i]->seconds >= time_limit) ok = false;
    all += (all.empty() ? "" : "; ") + d;
  }
  report(id, title, ok, all);
}

void criterion_reach() {
  CounterRng rng(2024);
  const int scalings = 100, probes = 1000, grid = 300;
  int pass_q = 0, pass_s = 0;
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scalings; ++i) {
    const double a1 = std::exp(rng.uniform(-1.5, 1.5)), a2 = std::exp(rng.uniform(-1.5, 1.5));
    const double c1 = rng.uniform(-0.6, 0.6), c2 = rng.uniform(-0.6, 0.6);
    const double s1 = rng.uniform(-0.2, 0.2), s2 = rng.uniform(-0.2, 0.2);
    for (int kind = 0; kind < 2; ++kind) {
      const RegularIntersectionSpec spec =
          kind == 0 ? fixtures::quadrant(a1, a2, c1, c2) : fixtures::strip(a1, a2, s1, s2);
      const MuLambda ml = estimate_mu_lambda(spec, grid);
      const double rho = rho_k(0.0, ml.mu, ml.lambda, ml.k_max);
      const ReachEstimate est =
          estimate_reach_mc(spec, kind == 0 ? fixtures::kQuadrantProbe : fixtures::kStripProbe, grid, probes, i);
      const bool ok = est.reach >= rho - 1e-3;
      (kind == 0 ? pass_q : pass_s) += ok;
      margin = std::min(margin, est.reach - rho);
    }
  }
  report(6, "reach lower bound", pass_q == scalings && pass_s == scalings,
         "quadrant " + std::to_string(pass_q) + "/100, strip " + std::to_string(pass_s) +
             "/100, smallest (estimate - rho_k) " + fmt(margin));
}

void criterion_sampling(const RunReport* saddle_rep) {
  // The theoretical K bound asks for more samples than can be drawn, so the
  // sample count uses the grid-measured coverage of the actual sets, shrunk
  // by the infimum safety factor. N_minus coverage is measured against the
  // sampling measure on N.
  const IndexPairSpec& spec = fixtures::saddle();
  const Box& box = spec.region.box;
  const double delta = 0.1, kappa = 0.05, shrink = SafetyFactors{}.inf;
  const int grid = 400;
  const auto in_n = [&](std::span<const double> x) { return classify_point(spec, x) != PairLabel::Outside; };
  const auto in_minus = [&](std::span<const double> x) { return classify_point(spec, x) == PairLabel::InNminus; };

  long long cells_n = 0, cells_minus = 0;
  std::vector<double> x(2);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      x[0] = box.lo[0] + (i + 0.5) * box.width(0) / grid;
      x[1] = box.lo[1] + (j + 0.5) * box.width(1) / grid;
      cells_n += in_n(x);
      cells_minus += in_minus(x);
    }
  const double share = static_cast<double>(cells_minus) / cells_n;
  const std::uint64_t n_n = required_samples(shrink * empirical_coverage(in_n, box, delta / 2, grid),
                                             shrink * empirical_coverage(in_n, box, delta / 4, grid), 1.0, kappa);
  const std::uint64_t n_minus =
      required_samples(shrink * share * empirical_coverage(in_minus, box, delta / 2, grid),
                       shrink * share * empirical_coverage(in_minus, box, delta / 4, grid), 1.0, kappa);
  const std::size_t n = std::max(n_n, n_minus);

  int passed = 0;
  for (int s = 0; s < 50; ++s) {
    const PointSamplePair sample = sample_index_pair(spec, n, 5000 + s);
    const bool a = certify_density(sample.points, in_n, box, delta, delta / 8).certified;
    const bool b = certify_density(sample.minus_points(), in_minus, box, delta, delta / 8).certified;
    passed += a && b;
  }
  std::string detail = "delta " + fmt(delta) + ", n " + std::to_string(n) + " (N " + std::to_string(n_n) +
                       ", N_minus " + std::to_string(n_minus) + "), certified " + std::to_string(passed) + "/50";
  if (saddle_rep) detail += "; theoretical-K count " + fmt(static_cast<double>(saddle_rep->theoretical_samples), 3);
  report(7, "sampling bound calibration", passed >= 45, detail);
}

void criterion_audit(const std::vector<const FixtureRun*>& runs) {
  bool ok = true;
  std::string detail;
  for (const FixtureRun* f : runs) {
    std::string part = f->name + " ";
    if (!f->rep.spec) {
      ok = false;
      part += "no index pair";
    } else {
      const AuditReport a = f->rep.audit ? *f->rep.audit : audit_dynamics(*f->rep.spec, 200, 11);
      ok = ok && a.trajectories == 200 && a.ip2_violations == 0 && a.ip3_violations == 0 && a.h4_violations == 0 &&
           a.spec_violations.empty();
      part += std::to_string(a.trajectories) + " traj, IP2/IP3/H4 " + std::to_string(a.ip2_violations) + "/" +
              std::to_string(a.ip3_violations) + "/" + std::to_string(a.h4_violations) + ", exits " +
              std::to_string(a.exits);
    }
    detail += (detail.empty() ? "" : "; ") + part;
  }
  report(8, "index-pair axioms along the flow", ok, detail);
}

void criterion_perturbation(const std::vector<const FixtureRun*>& runs) {
  bool ok = true;
  double worst_ratio = 0.0;
  std::string detail;
  for (const FixtureRun* f : runs) {
    if (!f->rep.spec) {
      ok = false;
      detail += f->name + " no index pair; ";
      continue;
    }
    const PerturbationAudit a = audit_perturbation(*f->rep.spec, 400);
    ok = ok && a.ok() && a.max_q_slope_ratio <= 1.0 + 1e-9;
    worst_ratio = std::max(worst_ratio, a.max_q_slope_ratio);
    detail += f->name + " " + std::to_string(a.failures()) + " failures; ";
  }
  detail += "max |q'| / (2 q0 / (r1 - r0)) = " + fmt(worst_ratio, 12);
  report(9, "perturbation properties", ok, detail);
}

void criterion_homology(const std::vector<const FixtureRun*>& runs) {
  const SimplicialPair triangle = pair_from_simplices({{0, 1, 2}}, {{0, 1}, {1, 2}, {0, 2}});
  const SimplicialPair hollow = pair_from_simplices({{0, 1}, {1, 2}, {0, 2}}, {{0}});
  const BettiVector bt = relative_betti_all(triangle), bh = relative_betti_all(hollow);
  bool ok = bt.same(BettiVector{{0, 0, 1}}) && bh.same(BettiVector{{0, 1}});
  ok = ok && euler_identity_holds(triangle, bt) && euler_identity_holds(hollow, bh);
  int pairs = 2, euler_ok = 2;
  for (const FixtureRun* f : runs)
    for (const auto& p : f->rep.probes) {
      ++pairs;
      euler_ok += p.euler_ok;
    }
  ok = ok && euler_ok == pairs;
  report(10, "homology engine", ok,
         "triangle/boundary " + bt.str(3) + ", hollow triangle/vertex " + bh.str(2) + ", Euler identity " +
             std::to_string(euler_ok) + "/" + std::to_string(pairs) + " pairs");
}

void criterion_arithmetic() {
  const double r = rho_k(0.0, 1.0, 1.0, 2);
  const bool a = std::abs(r - 1.0 / std::numbers::sqrt2) <= 1e-12;
  const double rho = 0.8;
  const auto iv = epsilon_interval(3 * rho / 16, rho);
  const bool b = iv && std::abs(iv->lo - rho / 4) <= 1e-12 && std::abs(iv->hi - 3 * rho / 4) <= 1e-12;
  const std::uint64_t n = required_samples(0.1, 0.05, 1.0, 0.05);
  const bool c = n == 60;
  const double q0 = 0.38475, r0 = 0.18, r1 = 3.6;
  const double mid = step_q((r0 + r1) / 2, q0, r0, r1);
  const bool d = std::abs(mid - q0 / 2) <= 1e-12;
  report(11, "arithmetic identities", a && b && c && d,
         "rho_k " + fmt(r, 17) + ", interval (" + (iv ? fmt(iv->lo, 17) + ", " + fmt(iv->hi, 17) : "empty") +
             "), required_samples " + std::to_string(n) + ", q(mid) - q0/2 = " + fmt(mid - q0 / 2, 3));
}

}  // namespace

int main() {
  std::cout << "acceptance run" << std::endl;
  const FixtureRun saddle = run_fixture("saddle");
  const FixtureRun minimum = run_fixture("minimum");
  const FixtureRun maximum = run_fixture("maximum");
  const FixtureRun cusp = run_fixture("cusp");
  const FixtureRun bott = run_fixture("morse_bott");
  const std::vector<const FixtureRun*> all{&saddle, &minimum, &maximum, &cusp, &bott};

  criterion_recovery(1, "saddle recovery", {&saddle}, {BettiVector{{0, 1, 0}}}, {"morse_index:1"}, 120);
  criterion_recovery(2, "extremum recovery", {&minimum, &maximum}, {BettiVector{{1, 0, 0}}, BettiVector{{0, 0, 1}}},
                     {"morse_index:0", "morse_index:2"}, 120);
  criterion_recovery(3, "degenerate critical point", {&cusp}, {}, {}, 0);
  criterion_recovery(4, "Morse-Bott circle", {&bott}, {BettiVector{{1, 1, 0}}}, {"non_morse"}, 0);

  bool agree = true;
  std::string detail;
  for (const FixtureRun* f : all) {
    const bool ok = f->rep.probes.size() == 3 && f->rep.epsilon_agreement;
    agree = agree && ok;
    detail += (detail.empty() ? "" : "; ") + f->name + " " + (ok ? "3/3" : "disagree") + " at eps " +
              (f->rep.interval ? fmt(f->rep.interval->at(0.25)) + "/" + fmt(f->rep.interval->at(0.5)) + "/" +
                                     fmt(f->rep.interval->at(0.75))
                               : "none");
  }
  report(5, "epsilon-interval robustness", agree, detail);

  criterion_reach();
  criterion_sampling(saddle.rep.spec ? &saddle.rep : nullptr);
  criterion_audit(all);
  criterion_perturbation(all);
  criterion_homology(all);
  criterion_arithmetic();

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
