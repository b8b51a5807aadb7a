#include "conley/indexpair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conley/rng.hpp"

namespace conley {

Expression default_bounding_function(const Expression& f) {
  NodePtr sum;
  for (int i = 0; i < f.dim(); ++i) {
    const NodePtr d = derivative(f, i).root();
    const NodePtr sq = build::pow(d, 2);
    sum = sum ? build::add(sum, sq) : sq;
  }
  return Expression(sum, f.dim());
}

namespace {

double box_diameter(const Box& b) {
  double s = 0.0;
  for (int i = 0; i < b.dim(); ++i) s += b.width(i) * b.width(i);
  return std::sqrt(s);
}

struct NodeSample {
  std::vector<double> g;
  std::vector<double> grad_g;
  std::vector<char> mask;
  std::vector<char> boundary;
};

NodeSample sample_g(const Expression& g, const Region& region, const Grid& grid) {
  NodeSample ns;
  ns.mask = region_mask(region, grid);
  ns.boundary = region_boundary(ns.mask, grid);
  ns.g.assign(ns.mask.size(), std::numeric_limits<double>::quiet_NaN());
  ns.grad_g.assign(ns.mask.size(), 0.0);
  grid.for_each([&](long long id, std::span<const double> x) {
    if (!ns.mask[id]) return;
    const Jet1 j = g.jet1(x);
    ns.g[id] = j.value;
    ns.grad_g[id] = norm({j.grad.data(), static_cast<std::size_t>(j.dim)});
  });
  return ns;
}

}  // namespace

RegularityInterval find_regularity_interval(const Expression& g, const Region& region, int n_grid) {
  const Grid grid(region.box, n_grid);
  const NodeSample ns = sample_g(g, region, grid);

  double s_bar = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ns.mask.size(); ++i)
    if (ns.boundary[i]) s_bar = std::min(s_bar, ns.g[i]);
  if (!(s_bar > 0) || !std::isfinite(s_bar))
    throw NoIntervalFound("g does not stay positive on the region boundary");

  const double grad_floor = 1e-3 * s_bar / box_diameter(region.box);
  auto sublevel_single = [&](double level) {
    std::vector<char> sub(ns.mask.size(), 0);
    for (std::size_t i = 0; i < ns.mask.size(); ++i) sub[i] = ns.mask[i] && ns.g[i] <= level;
    return count_components(sub, grid) == 1;
  };

  static constexpr double kR1[] = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
  static constexpr double kR0[] = {0.05, 0.1, 0.2, 0.3, 0.5};
  for (double a : kR1) {
    const double r1 = a * s_bar;
    if (!sublevel_single(r1)) continue;
    for (double b : kR0) {
      const double r0 = b * r1;
      bool regular = true;
      for (std::size_t i = 0; i < ns.mask.size() && regular; ++i)
        if (ns.mask[i] && ns.g[i] >= r0 && ns.g[i] <= r1 && ns.grad_g[i] < grad_floor) regular = false;
      if (!regular || !sublevel_single(r0)) continue;
      return {r0, r1, s_bar};
    }
  }
  throw NoIntervalFound("every candidate interval contains near-critical values of g");
}

double compute_q0(const Expression& f, const Expression& g, double r0, double r1, const Region& region,
                  int n_grid, double factor) {
  if (!(r0 < r1)) throw std::invalid_argument("compute_q0 needs r0 < r1");
  const Grid grid(region.box, n_grid);
  double inf = std::numeric_limits<double>::infinity();
  bool any = false;
  grid.for_each([&](long long, std::span<const double> x) {
    if (!region.contains(x)) return;
    const Jet1 jg = g.jet1(x);
    if (jg.value < r0 || jg.value > r1) return;
    const Jet1 jf = f.jet1(x);
    const double ng = norm({jg.grad.data(), static_cast<std::size_t>(jg.dim)});
    const double nf = norm({jf.grad.data(), static_cast<std::size_t>(jf.dim)});
    if (ng == 0.0) return;
    any = true;
    inf = std::min(inf, nf / ng);
  });
  if (!any) throw std::invalid_argument("the band r0 <= g <= r1 has no grid points");
  if (!(inf > 0)) throw NonPositiveAlignment("grad f vanishes on the band r0 <= g <= r1");
  return factor * inf * (r1 - r0) / 2.0;
}

// ---- step function ---------------------------------------------------------

namespace {

// Logistic L(x) = 1 / (1 + exp(-x)) without overflow.
double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double step_q(double t, double q0, double r0, double r1) { return step_q_jet(t, q0, r0, r1).q; }

StepJet step_q_jet(double t, double q0, double r0, double r1) {
  if (t <= r0) return {q0, 0.0, 0.0};
  if (t >= r1) return {0.0, 0.0, 0.0};
  const double w = r1 - r0;
  const double a = r1 - t;  // > 0
  const double b = r0 - t;  // < 0
  const double e = w / a + w / b;
  const double e1 = w * (1.0 / (a * a) + 1.0 / (b * b));
  const double e2 = 2.0 * w * (1.0 / (a * a * a) + 1.0 / (b * b * b));
  // q = q0 / (1 + exp(e)) = q0 L(-e)
  const double l = logistic(-e);
  const double l1 = l * (1.0 - l);
  const double l2 = l1 * (1.0 - 2.0 * l);
  StepJet j;
  j.q = q0 * l;
  j.dq = l1 == 0.0 ? 0.0 : -q0 * l1 * e1;
  j.d2q = l1 == 0.0 ? 0.0 : q0 * (l2 * e1 * e1 - l1 * e2);
  return j;
}

// ---- spec ------------------------------------------------------------------

std::vector<std::string> IndexPairSpec::violations() const {
  std::vector<std::string> out;
  auto fail = [&](const std::string& s) { out.push_back(s); };
  if (f.dim() != g.dim() || f.dim() != region.dim()) fail("f, g and region dimensions differ");
  if (!(r0 < r1)) fail("r0 < r1");
  if (!(r0 > 0)) fail("r0 > 0");
  if (!(q0 > 0)) fail("q0 > 0");
  if (!(alpha > 0 && alpha <= q0 / 2)) fail("0 < alpha <= q0/2");
  if (!((r0 + r1) / 2 < s && s <= r && r < r1)) fail("(r0+r1)/2 < s <= r < r1");
  const double qb = step_q(r, q0, r0, r1), qg = step_q(s, q0, r0, r1);
  const double tol = 1e-12 * std::max(1.0, std::abs(alpha) + q0);
  if (std::abs(beta - (alpha + qb)) > tol) fail("beta = alpha + q(r)");
  if (std::abs(gamma - (alpha + qg)) > tol) fail("gamma = alpha + q(s)");
  if (!(beta > alpha)) fail("beta > alpha");
  if (!(gamma >= beta)) fail("gamma >= beta");
  return out;
}

void IndexPairSpec::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream os;
  os << "index pair spec violates:";
  for (const auto& s : v) os << ' ' << s << ';';
  throw InvalidSpec(os.str());
}

namespace {

// Smallest singular value of the 2 x d Jacobian with rows a, b.
double sigma_min_2(std::span<const double> a, std::span<const double> b) {
  const double aa = dot(a, a), bb = dot(b, b), ab = dot(a, b);
  const double tr = aa + bb;
  const double det = std::max(0.0, aa * bb - ab * ab);
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
  // det / hi is the small eigenvalue without the cancellation in tr/2 - disc.
  const double hi = tr / 2 + disc;
  return hi > 0 ? std::sqrt(det / hi) : 0.0;
}

bool regular_values(const Expression& f, const Expression& g, double a, double b, const Region& region,
                    const Grid& grid) {
  const double pitch = grid.max_pitch();
  bool ok = true;
  grid.for_each([&](long long, std::span<const double> x) {
    if (!ok || !region.contains(x)) return;
    const Jet1 jf = f.jet1(x);
    const Jet1 jg = g.jet1(x);
    const std::span<const double> gf(jf.grad.data(), jf.dim), gg(jg.grad.data(), jg.dim);
    const double nf = norm(gf), ng = norm(gg);
    if (std::abs(jf.value - a) > pitch * nf || std::abs(jg.value - b) > pitch * ng) return;
    if (jf.dim < 2) {
      ok = false;
      return;
    }
    if (sigma_min_2(gf, gg) < 1e-6 * std::max(nf, ng)) ok = false;
  });
  return ok;
}

}  // namespace

Constants choose_constants(double q0, double r0, double r1, const Expression& f, const Expression& g,
                           const Region& region, int n_grid, std::uint64_t seed) {
  if (!(q0 > 0)) throw std::invalid_argument("choose_constants needs q0 > 0");
  const double alpha0 = q0 / 4, s0 = (r0 + 3 * r1) / 4, r_0 = (r0 + 7 * r1) / 8;
  const Grid grid(region.box, n_grid);
  CounterRng rng(seed ^ 0x6a09e667f3bcc909ULL);
  for (int attempt = 0; attempt <= 20; ++attempt) {
    double alpha = alpha0, s = s0, r = r_0;
    if (attempt > 0) {
      alpha *= 1 + rng.uniform(-0.02, 0.02);
      s *= 1 + rng.uniform(-0.02, 0.02);
      r *= 1 + rng.uniform(-0.02, 0.02);
      if (!(alpha <= q0 / 2 && (r0 + r1) / 2 < s && s <= r && r < r1)) continue;
    }
    if (!regular_values(f, g, alpha, r, region, grid) || !regular_values(f, g, alpha, s, region, grid)) continue;
    Constants c{alpha, s, r, alpha + step_q(r, q0, r0, r1), alpha + step_q(s, q0, r0, r1), attempt};
    return c;
  }
  throw RegularValueSearchFailed("(alpha, r) or (alpha, s) stayed singular after 20 jitters");
}

// ---- perturbation ----------------------------------------------------------

Jet2 perturbation_h(const IndexPairSpec& spec, std::span<const double> p) {
  Jet2 jf = spec.f.jet2(p);
  if (!spec.region.contains(p)) return jf;
  const Jet2 jg = spec.g.jet2(p);
  if (jg.value >= spec.r1) return jf;
  const StepJet q = step_q_jet(jg.value, spec.q0, spec.r0, spec.r1);
  return jf + chain(jg, q.q, q.dq, q.d2q);
}

double perturbation_value(const IndexPairSpec& spec, std::span<const double> p) {
  const double fv = spec.f.value(p);
  if (!spec.region.contains(p)) return fv;
  const double gv = spec.g.value(p);
  if (gv >= spec.r1) return fv;
  return fv + step_q(gv, spec.q0, spec.r0, spec.r1);
}

namespace {

class PerturbationField final : public Field::Impl {
 public:
  explicit PerturbationField(IndexPairSpec spec) : spec_(std::move(spec)) {}
  int dim() const override { return spec_.dim(); }
  double value(std::span<const double> x) const override { return perturbation_value(spec_, x); }
  Jet1 jet1(std::span<const double> x) const override {
    const Jet2 j = perturbation_h(spec_, x);
    Jet1 r = Jet1::constant(j.dim, j.value);
    r.grad = j.grad;
    return r;
  }
  Jet2 jet2(std::span<const double> x) const override { return perturbation_h(spec_, x); }

 private:
  IndexPairSpec spec_;
};

}  // namespace

Field perturbation_field(const IndexPairSpec& spec) { return Field(std::make_shared<PerturbationField>(spec)); }

PairLabel classify_point(const IndexPairSpec& spec, std::span<const double> p) {
  if (spec.f.value(p) > spec.alpha) return PairLabel::Outside;
  const double h = perturbation_value(spec, p);
  if (h < spec.beta) return PairLabel::Outside;
  return h <= spec.gamma ? PairLabel::InNminus : PairLabel::InNonly;
}

const char* to_string(PairLabel label) {
  switch (label) {
    case PairLabel::Outside:
      return "outside";
    case PairLabel::InNonly:
      return "in_n_only";
    case PairLabel::InNminus:
      return "in_n_minus";
  }
  return "?";
}

PerturbationAudit audit_perturbation(const IndexPairSpec& spec, int n_grid) {
  PerturbationAudit a;
  const int d = spec.dim();
  const double w = spec.r1 - spec.r0;
  const double slope_bound = 2 * spec.q0 / w;
  const Grid grid(spec.region.box, n_grid);
  grid.for_each([&](long long, std::span<const double> x) {
    ++a.nodes;
    const Jet2 jf = spec.f.jet2(x);
    const Jet2 jh = perturbation_h(spec, x);
    const double tol = 1e-12 * std::max(1.0, std::abs(jf.value));
    double dot = 0, nf = 0, nh = 0;
    for (int i = 0; i < d; ++i) {
      dot += jh.grad[i] * jf.grad[i];
      nf += jf.grad[i] * jf.grad[i];
      nh += jh.grad[i] * jh.grad[i];
    }
    nf = std::sqrt(nf);
    nh = std::sqrt(nh);
    a.h1 += jh.value < jf.value - tol;
    if (spec.region.contains(x)) {
      const double g = spec.g.value(x);
      a.h2 += g <= spec.r0 && std::abs(jh.value - (jf.value + spec.q0)) > tol;
      // The converse tests h - f = q(g) directly, since f + q(g) rounds to f
      // once q falls below the ulp of f. Within w/500 of r1, q ~ exp(-w/(r1-g))
      // underflows, so the converse is only testable below that.
      if (g >= spec.r1)
        a.h3 += jh.value != jf.value;
      else if (g < spec.r1 - w / 500)
        a.h3 += !(step_q(g, spec.q0, spec.r0, spec.r1) > 0);
    } else {
      a.h3 += jh.value != jf.value;
    }
    a.h4_sign += dot < -1e-12;
    a.h4_strict += nf > 1e-6 && !(dot > 0);
    a.h5 += (nh < 1e-6) != (nf < 1e-6);
    const PairLabel label = classify_point(spec, x);
    if (label != PairLabel::Outside)
      a.containment += !spec.region.contains(x) || spec.g.value(x) > spec.r * (1 + 1e-12);
  });
  const int n_t = 100 * n_grid;
  double prev = spec.q0;
  for (int i = 0; i <= n_t; ++i) {
    const StepJet q = step_q_jet(spec.r0 + w * i / n_t, spec.q0, spec.r0, spec.r1);
    a.q_monotone += q.q > prev;
    a.q_slope += std::abs(q.dq) > slope_bound * (1 + 1e-9);
    a.max_q_slope_ratio = std::max(a.max_q_slope_ratio, std::abs(q.dq) / slope_bound);
    prev = q.q;
  }
  return a;
}

IndexPairSpec build_index_pair(const Expression& f, const Expression* g, const Region& region,
                               const BuildOptions& opts) {
  IndexPairSpec spec{f, g ? *g : default_bounding_function(f), region};
  const RegularityInterval iv = find_regularity_interval(spec.g, region, opts.n_grid);
  spec.r0 = iv.r0;
  spec.r1 = iv.r1;
  spec.q0 = compute_q0(f, spec.g, iv.r0, iv.r1, region, opts.n_grid, opts.q0_factor);
  const Constants c = choose_constants(spec.q0, spec.r0, spec.r1, f, spec.g, region, opts.n_grid, opts.seed);
  spec.alpha = c.alpha;
  spec.s = c.s;
  spec.r = c.r;
  spec.beta = c.beta;
  spec.gamma = c.gamma;
  spec.validate();
  return spec;
}

}  // namespace conley
