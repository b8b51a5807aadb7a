#include "conley/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace conley {

ManifoldChart ManifoldChart::flat(int dim) {
  if (dim < 1) throw std::invalid_argument("flat chart dimension must be positive");
  ManifoldChart c;
  c.mode = ChartMode::Flat;
  c.dim = dim;
  return c;
}

ManifoldChart ManifoldChart::sphere(double radius) {
  if (!(radius > 0)) throw std::invalid_argument("sphere radius must be positive");
  ManifoldChart c;
  c.mode = ChartMode::Sphere;
  c.dim = 3;
  c.radius = radius;
  return c;
}

ManifoldChart ManifoldChart::torus(double major, double minor) {
  if (!(minor > 0) || !(major > minor)) throw std::invalid_argument("torus needs major > minor > 0");
  ManifoldChart c;
  c.mode = ChartMode::Torus;
  c.dim = 3;
  c.radius = major;
  c.minor = minor;
  return c;
}

double ManifoldChart::tau() const {
  switch (mode) {
    case ChartMode::Flat:
      return std::numeric_limits<double>::infinity();
    case ChartMode::Sphere:
      return radius;
    case ChartMode::Torus:
      return minor;
  }
  return std::numeric_limits<double>::infinity();
}

double reciprocal_tau(const ManifoldChart& chart) {
  switch (chart.mode) {
    case ChartMode::Flat:
      return 0.0;
    case ChartMode::Sphere:
      return 1.0 / chart.radius;
    case ChartMode::Torus:
      return 1.0 / chart.minor;
  }
  return 0.0;
}

std::vector<double> surface_point(const ManifoldChart& chart, double u, double v) {
  switch (chart.mode) {
    case ChartMode::Sphere:
      return {chart.radius * std::sin(u) * std::cos(v), chart.radius * std::sin(u) * std::sin(v),
              chart.radius * std::cos(u)};
    case ChartMode::Torus: {
      const double w = chart.radius + chart.minor * std::cos(v);
      return {w * std::cos(u), w * std::sin(u), chart.minor * std::sin(v)};
    }
    case ChartMode::Flat:
      break;
  }
  throw std::invalid_argument("flat charts have no embedded surface");
}

std::vector<double> nearest_surface_point(const ManifoldChart& chart, std::span<const double> x) {
  if (x.size() != 3) throw std::invalid_argument("curved charts live in R^3");
  switch (chart.mode) {
    case ChartMode::Sphere: {
      const double n = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      if (n == 0.0) return {0.0, 0.0, chart.radius};
      const double s = chart.radius / n;
      return {x[0] * s, x[1] * s, x[2] * s};
    }
    case ChartMode::Torus: {
      const double rho = std::hypot(x[0], x[1]);
      const double cu = rho == 0.0 ? 1.0 : x[0] / rho;
      const double su = rho == 0.0 ? 0.0 : x[1] / rho;
      // centre of the tube cross-section closest to x
      const double c0 = chart.radius * cu, c1 = chart.radius * su;
      const double d0 = x[0] - c0, d1 = x[1] - c1, d2 = x[2];
      const double dn = std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
      if (dn == 0.0) return {c0 + chart.minor * cu, c1 + chart.minor * su, 0.0};
      const double s = chart.minor / dn;
      return {c0 + d0 * s, c1 + d1 * s, d2 * s};
    }
    case ChartMode::Flat:
      break;
  }
  return {x.begin(), x.end()};
}

bool Box::contains(std::span<const double> x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

bool Region::contains(std::span<const double> x) const {
  if (!box.contains(x)) return false;
  for (const auto& c : conditions) {
    const double v = c.expr.value(x);
    if (v < c.lo || v > c.hi) return false;
  }
  return true;
}

Grid::Grid(Box box, int cells) : box_(std::move(box)), cells_(cells) {
  if (cells_ < 1) throw std::invalid_argument("grid needs at least one cell per axis");
  if (box_.lo.size() != box_.hi.size() || box_.lo.empty()) throw std::invalid_argument("malformed box");
  for (int i = 0; i < box_.dim(); ++i)
    if (!(box_.hi[i] > box_.lo[i])) throw std::invalid_argument("empty box");
  count_ = 1;
  for (int i = 0; i < box_.dim(); ++i) count_ *= (cells_ + 1);
}

double Grid::max_pitch() const {
  double p = 0.0;
  for (int i = 0; i < dim(); ++i) p = std::max(p, pitch(i));
  return p;
}

void Grid::node(long long id, std::span<double> out) const {
  for (int i = 0; i < dim(); ++i) {
    const long long c = id % (cells_ + 1);
    id /= (cells_ + 1);
    out[i] = c == cells_ ? box_.hi[i] : box_.lo[i] + pitch(i) * static_cast<double>(c);
  }
}

void Grid::coords(long long id, std::span<int> out) const {
  for (int i = 0; i < dim(); ++i) {
    out[i] = static_cast<int>(id % (cells_ + 1));
    id /= (cells_ + 1);
  }
}

long long Grid::id(std::span<const int> c) const {
  long long r = 0;
  for (int i = dim() - 1; i >= 0; --i) r = r * (cells_ + 1) + c[i];
  return r;
}

bool Grid::on_boundary(long long id) const {
  for (int i = 0; i < dim(); ++i) {
    const long long c = id % (cells_ + 1);
    if (c == 0 || c == cells_) return true;
    id /= (cells_ + 1);
  }
  return false;
}

std::vector<char> region_mask(const Region& region, const Grid& grid) {
  std::vector<char> mask(static_cast<std::size_t>(grid.node_count()), 0);
  grid.for_each([&](long long id, std::span<const double> x) { mask[id] = region.contains(x) ? 1 : 0; });
  return mask;
}

namespace {
template <typename Fn>
void for_each_axis_neighbour(const Grid& grid, long long id, Fn&& fn) {
  long long stride = 1;
  long long rest = id;
  for (int a = 0; a < grid.dim(); ++a) {
    const long long c = rest % (grid.cells() + 1);
    rest /= (grid.cells() + 1);
    fn(c > 0 ? id - stride : -1);
    fn(c < grid.cells() ? id + stride : -1);
    stride *= (grid.cells() + 1);
  }
}
}  // namespace

std::vector<char> region_boundary(const std::vector<char>& mask, const Grid& grid) {
  std::vector<char> out(mask.size(), 0);
  for (long long id = 0; id < grid.node_count(); ++id) {
    if (!mask[id]) continue;
    bool edge = false;
    for_each_axis_neighbour(grid, id, [&](long long nb) {
      if (nb < 0 || !mask[nb]) edge = true;
    });
    out[id] = edge ? 1 : 0;
  }
  return out;
}

int count_components(const std::vector<char>& mask, const Grid& grid) {
  std::vector<char> seen(mask.size(), 0);
  std::vector<long long> stack;
  int components = 0;
  for (long long id = 0; id < grid.node_count(); ++id) {
    if (!mask[id] || seen[id]) continue;
    ++components;
    seen[id] = 1;
    stack.push_back(id);
    while (!stack.empty()) {
      const long long cur = stack.back();
      stack.pop_back();
      for_each_axis_neighbour(grid, cur, [&](long long nb) {
        if (nb >= 0 && mask[nb] && !seen[nb]) {
          seen[nb] = 1;
          stack.push_back(nb);
        }
      });
    }
  }
  return components;
}

}  // namespace conley
