#include "conley/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "conley/rng.hpp"

namespace conley {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double box_diameter(const Box& box) {
  double s = 0;
  for (int a = 0; a < box.dim(); ++a) s += box.width(a) * box.width(a);
  return std::sqrt(s);
}

Eigen::VectorXd grad_of(const Jet1& j) {
  Eigen::VectorXd g(j.dim);
  for (int a = 0; a < j.dim; ++a) g[a] = j.grad[a];
  return g;
}

// Gauss-Newton with the minimum-norm step onto {f_i = 0, i in active}.
// Returns false when the iteration does not settle near the start.
bool project(const RegularIntersectionSpec& spec, const std::vector<int>& active, std::vector<double>& x,
             double max_move, double tol) {
  const int d = spec.dim();
  const int k = static_cast<int>(active.size());
  const std::vector<double> start = x;
  Eigen::MatrixXd J(k, d);
  Eigen::VectorXd F(k);
  for (int it = 0; it < 40; ++it) {
    double worst = 0;
    for (int r = 0; r < k; ++r) {
      const Jet1 j = spec.fields[active[r]].jet1(x);
      F[r] = j.value;
      J.row(r) = grad_of(j).transpose();
      const double gn = J.row(r).norm();
      worst = std::max(worst, gn > 0 ? std::abs(j.value) / gn : kInf);
    }
    if (worst <= tol) {
      double moved = 0;
      for (int a = 0; a < d; ++a) moved += (x[a] - start[a]) * (x[a] - start[a]);
      return std::sqrt(moved) <= max_move;
    }
    const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(F);
    if (!step.allFinite()) return false;
    for (int a = 0; a < d; ++a) x[a] -= step[a];
  }
  return false;
}

// Smallest and largest singular values of the stacked gradients.
std::pair<double, double> sigma_range(const RegularIntersectionSpec& spec, const std::vector<int>& active,
                                      std::span<const double> x) {
  const int d = spec.dim();
  const int k = static_cast<int>(active.size());
  Eigen::MatrixXd J(k, d);
  for (int r = 0; r < k; ++r) J.row(r) = grad_of(spec.fields[active[r]].jet1(x)).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  return {k > d ? 0.0 : sv[k - 1], sv[0]};
}

// Every subset of constraint indices containing all level-set constraints.
std::vector<std::vector<int>> active_sets(const RegularIntersectionSpec& spec) {
  std::vector<std::vector<int>> out;
  const int ell = spec.ell();
  for (unsigned mask = 1; mask < (1u << ell); ++mask) {
    std::vector<int> s;
    bool ok = true;
    for (int i = 0; i < ell; ++i) {
      if (mask & (1u << i))
        s.push_back(i);
      else if (spec.kinds[i] == ConstraintKind::LevelSet)
        ok = false;
    }
    if (ok) out.push_back(std::move(s));
  }
  return out;
}

// Slack for "on E" after projection, scaled to the field's local size.
constexpr double kLocusTol = 1e-10;

}  // namespace

bool RegularIntersectionSpec::contains(std::span<const double> x, double slack) const {
  if (!region.contains(x)) return false;
  for (int i = 0; i < ell(); ++i) {
    const double v = fields[i].value(x);
    if (kinds[i] == ConstraintKind::LevelSet ? std::abs(v) > slack : v > slack) return false;
  }
  return true;
}

RegularIntersectionSpec index_pair_set(const IndexPairSpec& spec) {
  const Field f(spec.f);
  const Field h = perturbation_field(spec);
  return {{f.affine(1.0, -spec.alpha), h.affine(-1.0, spec.beta)},
          {ConstraintKind::Sublevel, ConstraintKind::Sublevel},
          spec.region.chart,
          spec.region};
}

RegularIntersectionSpec index_pair_exit_set(const IndexPairSpec& spec) {
  const Field f(spec.f);
  const Field h = perturbation_field(spec);
  return {{f.affine(1.0, -spec.alpha), h.affine(1.0, -spec.beta).times(h.affine(1.0, -spec.gamma))},
          {ConstraintKind::Sublevel, ConstraintKind::Sublevel},
          spec.region.chart,
          spec.region};
}

std::vector<Point> locus_points(const RegularIntersectionSpec& spec, const std::vector<int>& active, int n_grid) {
  const Grid grid(spec.region.box, n_grid);
  const double pitch = grid.max_pitch();
  const double reach = pitch * std::sqrt(static_cast<double>(spec.dim()));
  const double tol = kLocusTol * box_diameter(spec.region.box);
  std::vector<Point> out;
  std::vector<double> y;
  grid.for_each([&](long long, std::span<const double> x) {
    if (!spec.region.box.contains(x)) return;
    for (int i : active) {
      const Jet1 j = spec.fields[i].jet1(x);
      if (std::abs(j.value) > reach * norm(std::span<const double>(j.grad.data(), j.dim))) return;
    }
    y.assign(x.begin(), x.end());
    if (!project(spec, active, y, 2 * reach, tol)) return;
    if (!spec.region.contains(y)) return;
    for (int i = 0; i < spec.ell(); ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const Jet1 j = spec.fields[i].jet1(y);
      const double scale = tol * std::max(1.0, norm(std::span<const double>(j.grad.data(), j.dim)));
      if (spec.kinds[i] == ConstraintKind::LevelSet ? std::abs(j.value) > scale : j.value > scale) return;
    }
    out.push_back(y);
  });
  return out;
}

MuLambda estimate_mu_lambda(const RegularIntersectionSpec& spec, int n_grid, SafetyFactors factors) {
  if (spec.ell() < 1) throw std::invalid_argument("regular intersection needs at least one field");
  if (spec.kinds.size() != spec.fields.size()) throw std::invalid_argument("one kind per field required");
  const Grid grid(spec.region.box, n_grid);
  MuLambda out;
  out.grid_pitch = grid.max_pitch();

  double hess = 0;
  grid.for_each([&](long long, std::span<const double> x) {
    if (!spec.region.contains(x)) return;
    for (const Field& f : spec.fields) hess = std::max(hess, hessian_norm(f.jet2(x)));
  });
  out.lambda = factors.sup * hess;

  double mu = kInf;
  for (const auto& active : active_sets(spec)) {
    const auto pts = locus_points(spec, active, n_grid);
    if (pts.empty()) continue;
    out.k_max = std::max(out.k_max, static_cast<int>(active.size()));
    out.locus_points += static_cast<long long>(pts.size());
    for (const auto& p : pts) {
      const auto [s, top] = sigma_range(spec, active, p);
      if (!(s > 1e-12 * std::max(1.0, top)))
        throw DegenerateJacobian("Jacobian of " + std::to_string(active.size()) +
                                 " active constraints is rank deficient on the grid");
      mu = std::min(mu, s);
    }
  }
  if (!std::isfinite(mu)) throw std::invalid_argument("the grid does not meet the boundary of E");
  out.mu = factors.inf * mu;
  return out;
}

double rho_k(double tau_recip, double mu, double lambda, int k) {
  if (!(mu > 0)) throw std::invalid_argument("rho_k needs mu > 0");
  if (k < 0) throw std::invalid_argument("rho_k needs k >= 0");
  const double denom = tau_recip + std::sqrt(static_cast<double>(k)) * lambda / mu;
  return denom > 0 ? 1.0 / denom : kInf;
}

std::optional<OpenInterval> epsilon_interval(double delta, double rho) {
  if (!(rho > 0)) throw std::invalid_argument("epsilon_interval needs rho > 0");
  if (std::isinf(rho)) return OpenInterval{delta, kInf};
  if (!(delta < rho / 4)) return std::nullopt;
  const double root = std::sqrt(0.25 - delta / rho);
  // lo = rho (1/2 - root) without cancellation; lo + hi = rho.
  const double lo = delta / (0.5 + root);
  return OpenInterval{lo, rho * (0.5 + root)};
}

Bottleneck bottleneck_lower_bound(const Field& f1, const Field& f2, double r, const RegularIntersectionSpec& context,
                                  int n_grid, SafetyFactors factors) {
  if (!(r > 0)) throw std::invalid_argument("bottleneck radius must be positive");
  RegularIntersectionSpec pair{{f1, f2}, {ConstraintKind::Sublevel, ConstraintKind::Sublevel}, context.chart,
                               context.region};
  const Field F = f1.times(f2);
  RegularIntersectionSpec product{{F}, {ConstraintKind::LevelSet}, context.chart, context.region};

  const auto corners = locus_points(pair, {0, 1}, n_grid);
  const PointIndex corner_index(corners, std::max(r / 2, 1e-9));

  Bottleneck out;
  const double tol = kLocusTol * box_diameter(context.region.box);
  double mu = kInf;
  for (const auto& p : locus_points(product, {0}, n_grid)) {
    if (f1.value(p) > tol || f2.value(p) > tol) continue;
    if (corner_index.any_within(p, r / 2)) continue;
    const Jet1 j = F.jet1(p);
    mu = std::min(mu, norm(std::span<const double>(j.grad.data(), j.dim)));
    ++out.band_points;
  }

  const Grid grid(context.region.box, n_grid);
  double hess = 0;
  grid.for_each([&](long long, std::span<const double> x) {
    if (context.region.contains(x)) hess = std::max(hess, hessian_norm(F.jet2(x)));
  });
  out.lambda_F = factors.sup * hess;

  if (out.band_points == 0) {
    out.empty_band = true;
    out.rho_F = kInf;
    out.eta_bar = r / 2;
    return out;
  }
  out.mu_F = factors.inf * mu;
  const double denom = reciprocal_tau(context.chart) + out.lambda_F / out.mu_F;
  out.rho_F = denom > 0 ? 1.0 / denom : kInf;
  out.eta_bar = std::min(r / 2, out.rho_F);
  return out;
}

namespace {

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, v = 0;
  while (i > 0) {
    v += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return v;
}

constexpr int kPrimes[kMaxDim] = {2, 3, 5, 7, 11, 13};

}  // namespace

CapVolumes cap_volumes(int m, double t, double rho, std::optional<double> phi, int log2_points) {
  if (m < 1 || m > kMaxDim) throw std::invalid_argument("cap_volumes dimension out of range");
  if (!(t > 0) || !(rho > 0)) throw std::invalid_argument("cap_volumes needs t, rho > 0");
  if (phi && (m < 2 || !(*phi > 0) || !(*phi < std::numbers::pi)))
    throw std::invalid_argument("cap angle must lie in (0, pi) and needs m >= 2");
  CapVolumes out;
  out.vball = std::pow(std::numbers::pi, m / 2.0) * std::pow(t, m) / std::tgamma(m / 2.0 + 1);
  out.vhstwo = std::numeric_limits<double>::quiet_NaN();

  const std::uint64_t n = 1ULL << log2_points;
  const double c = phi ? std::cos(*phi) : 0.0, s = phi ? std::sin(*phi) : 0.0;
  const bool flat = std::isinf(rho);
  std::uint64_t one = 0, two = 0;
  std::vector<double> x(m);
  for (std::uint64_t i = 1; i <= n; ++i) {
    double r2 = 0;
    for (int a = 0; a < m; ++a) {
      x[a] = t * (2 * radical_inverse(i, kPrimes[a]) - 1);
      r2 += x[a] * x[a];
    }
    if (r2 > t * t) continue;
    // |x - rho u|^2 <= rho^2  <=>  |x|^2 <= 2 rho <x, u>
    const double u1 = x[0];
    const bool in1 = flat ? u1 >= 0 : r2 <= 2 * rho * u1;
    if (!in1) continue;
    ++one;
    if (phi) {
      const double u2 = c * x[0] + s * x[1];
      if (flat ? u2 >= 0 : r2 <= 2 * rho * u2) ++two;
    }
  }
  const double cube = std::pow(2 * t, m);
  auto lower = [&](std::uint64_t hits) {
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    const double se = cube * std::sqrt(p * (1 - p) / static_cast<double>(n));
    return std::max(0.0, cube * p - 3 * se);
  };
  out.vhs = lower(one);
  if (phi) out.vhstwo = lower(two);
  return out;
}

CoverageBound coverage_lower_bound_K(const RegularIntersectionSpec& spec, double r, const GeometryOptions& opts,
                                     const MuLambda* ml) {
  if (spec.ell() != 2 || spec.kinds[0] != ConstraintKind::Sublevel || spec.kinds[1] != ConstraintKind::Sublevel)
    throw std::invalid_argument("coverage bound needs two sublevel constraints");
  MuLambda local;
  if (!ml) {
    local = estimate_mu_lambda(spec, opts.n_grid, opts.factors);
    ml = &local;
  }
  CoverageBound out;
  const double tau_recip = reciprocal_tau(spec.chart);
  out.rho = rho_k(tau_recip, ml->mu, ml->lambda, 1);
  out.bottleneck = bottleneck_lower_bound(spec.fields[0], spec.fields[1], r, spec, opts.n_grid, opts.factors);

  const double half = out.bottleneck.eta_bar / 2;
  const double theta = tau_recip > 0 ? std::asin(std::min(1.0, half * tau_recip / 2)) : 0.0;
  out.t = half * std::cos(theta);

  const auto corners = locus_points(spec, {0, 1}, opts.n_grid);
  out.two_caps = !corners.empty();
  if (out.two_caps) {
    double cmin = 1.0;
    for (const auto& p : corners) {
      const Jet1 a = spec.fields[0].jet1(p), b = spec.fields[1].jet1(p);
      const std::span<const double> ga(a.grad.data(), a.dim), gb(b.grad.data(), b.dim);
      cmin = std::min(cmin, dot(ga, gb) / (norm(ga) * norm(gb)));
    }
    out.cos_phi = std::clamp(cmin, -1 + 1e-12, 1 - 1e-12);
    out.cap = cap_volumes(spec.dim(), out.t, out.rho, std::acos(out.cos_phi), opts.qmc_log2).vhstwo;
  } else {
    out.cap = cap_volumes(spec.dim(), out.t, out.rho, std::nullopt, opts.qmc_log2).vhs;
  }

  const Grid grid(spec.region.box, opts.n_grid);
  double cell = 1;
  for (int a = 0; a < spec.dim(); ++a) cell *= grid.pitch(a);
  long long inside = 0;
  grid.for_each([&](long long, std::span<const double> x) { inside += spec.contains(x) ? 1 : 0; });
  out.volume = static_cast<double>(inside) * cell;
  out.K = out.volume > 0 ? out.cap / out.volume : 0.0;
  return out;
}

std::uint64_t required_samples(double K_half, double K_quarter, double nu_total, double kappa) {
  auto unit = [](double v) { return v > 0 && v <= 1; };
  if (!unit(K_half) || !unit(K_quarter) || !unit(nu_total) || !unit(kappa) || !(kappa < 1))
    throw std::invalid_argument("required_samples arguments must lie in (0, 1] with kappa < 1");
  const double n = std::ceil((std::log(nu_total / K_quarter) + std::log(1 / kappa)) / K_half);
  if (!(n < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::max(1.0, n));
}

ReachAndSamplingReport reach_and_sampling_report(const RegularIntersectionSpec& spec, double delta, double kappa,
                                                 const GeometryOptions& opts) {
  ReachAndSamplingReport rep;
  const MuLambda ml = estimate_mu_lambda(spec, opts.n_grid, opts.factors);
  rep.mu = ml.mu;
  rep.lambda = ml.lambda;
  rep.k_max = ml.k_max;
  rep.tau_recip = reciprocal_tau(spec.chart);
  rep.rho_k = rho_k(rep.tau_recip, rep.mu, rep.lambda, rep.k_max);
  rep.delta_max = rep.rho_k / 4;
  rep.delta = delta > 0 ? delta : 3 * rep.rho_k / 16;
  rep.epsilon_interval = epsilon_interval(rep.delta, rep.rho_k);
  rep.kappa = kappa;
  rep.n_grid = opts.n_grid;
  rep.factors = opts.factors;

  const CoverageBound half = coverage_lower_bound_K(spec, rep.delta / 2, opts, &ml);
  const CoverageBound quarter = coverage_lower_bound_K(spec, rep.delta / 4, opts, &ml);
  rep.K_half = half.K;
  rep.K_quarter = quarter.K;
  rep.volume = half.volume;
  rep.sample_count = (half.K > 0 && quarter.K > 0) ? required_samples(std::min(1.0, half.K), std::min(1.0, quarter.K),
                                                                      1.0, kappa)
                                                   : std::numeric_limits<std::uint64_t>::max();
  rep.eta_bar = [spec, opts](double r) {
    return bottleneck_lower_bound(spec.fields[0], spec.fields[1], r, spec, opts.n_grid, opts.factors).eta_bar;
  };
  rep.K_of_r = [spec, opts, ml](double r) { return coverage_lower_bound_K(spec, r, opts, &ml).K; };
  return rep;
}

ReachEstimate estimate_reach_mc(const RegularIntersectionSpec& spec, const Box& probe_box, int n_grid, int n_probes,
                                std::uint64_t seed) {
  struct BoundaryPoint {
    Point x;
    std::vector<int> active;
  };
  std::vector<BoundaryPoint> cloud;
  for (const auto& active : active_sets(spec))
    for (auto& p : locus_points(spec, active, n_grid)) cloud.push_back({std::move(p), active});

  ReachEstimate out;
  out.cloud_size = cloud.size();
  out.reach = kInf;
  std::vector<int> probes;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (probe_box.contains(cloud[i].x)) probes.push_back(static_cast<int>(i));
  if (probes.empty()) return out;

  const int d = spec.dim();
  // Projections of neighbouring grid nodes nearly coincide; pairs closer than
  // this carry only rounding noise in <q - p, n>.
  const double min_sep = 0.5 * Grid(spec.region.box, n_grid).max_pitch();
  CounterRng rng(seed);
  std::vector<double> n(d);
  for (int k = 0; k < n_probes; ++k) {
    const auto& p = cloud[probes[std::min<std::size_t>(probes.size() - 1,
                                                       static_cast<std::size_t>(rng.uniform() * probes.size()))]];
    // A random direction in the normal cone; level sets contribute both signs.
    std::fill(n.begin(), n.end(), 0.0);
    for (int i : p.active) {
      const Jet1 j = spec.fields[i].jet1(p.x);
      const double gn = norm(std::span<const double>(j.grad.data(), j.dim));
      double w = p.active.size() > 1 ? rng.uniform() : 1.0;
      if (spec.kinds[i] == ConstraintKind::LevelSet && rng.uniform() < 0.5) w = -w;
      for (int a = 0; a < d; ++a) n[a] += w * j.grad[a] / gn;
    }
    const double nn = norm(n);
    if (!(nn > 0)) continue;
    for (double& v : n) v /= nn;
    ++out.probes;
    for (const auto& q : cloud) {
      double along = 0, sq = 0;
      for (int a = 0; a < d; ++a) {
        const double diff = q.x[a] - p.x[a];
        along += diff * n[a];
        sq += diff * diff;
      }
      if (along > 0 && sq >= min_sep * min_sep) out.reach = std::min(out.reach, sq / (2 * along));
    }
  }
  return out;
}

double empirical_coverage(const std::function<bool(std::span<const double>)>& inside, const Box& box, double r,
                          int n_grid) {
  const Grid grid(box, n_grid);
  const int d = grid.dim();
  std::vector<char> mask(grid.node_count());
  grid.for_each([&](long long id, std::span<const double> x) { mask[id] = inside(x) ? 1 : 0; });
  const long long total = std::count(mask.begin(), mask.end(), 1);
  if (total == 0) return 0.0;

  // Offsets of the nodes within r of a node.
  std::vector<std::vector<int>> stencil;
  std::vector<int> reach(d), off(d);
  for (int a = 0; a < d; ++a) reach[a] = static_cast<int>(std::floor(r / grid.pitch(a)));
  for (int a = 0; a < d; ++a) off[a] = -reach[a];
  for (;;) {
    double s = 0;
    for (int a = 0; a < d; ++a) s += (off[a] * grid.pitch(a)) * (off[a] * grid.pitch(a));
    if (s <= r * r) stencil.push_back(off);
    int a = 0;
    while (a < d && ++off[a] > reach[a]) {
      off[a] = -reach[a];
      ++a;
    }
    if (a == d) break;
  }

  long long worst = std::numeric_limits<long long>::max();
  std::vector<int> c(d), e(d);
  for (long long id = 0; id < grid.node_count(); ++id) {
    if (!mask[id]) continue;
    grid.coords(id, c);
    long long hits = 0;
    for (const auto& o : stencil) {
      bool ok = true;
      for (int a = 0; a < d && ok; ++a) {
        e[a] = c[a] + o[a];
        ok = e[a] >= 0 && e[a] <= grid.cells();
      }
      if (ok && mask[grid.id(e)]) ++hits;
    }
    worst = std::min(worst, hits);
  }
  return static_cast<double>(worst) / static_cast<double>(total);
}

}  // namespace conley
