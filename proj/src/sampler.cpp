#include "conley/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "conley/rng.hpp"

namespace conley {

std::size_t PointSamplePair::minus_count() const {
  return static_cast<std::size_t>(std::count(in_minus.begin(), in_minus.end(), 1));
}

std::vector<Point> PointSamplePair::minus_points() const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (in_minus[i]) out.push_back(points[i]);
  return out;
}

namespace {

constexpr std::uint64_t kStallWindow = 1000000;
constexpr double kStallRate = 1e-4;

template <typename Accept>
void rejection_loop(const Box& box, std::size_t n, std::uint64_t seed, SampleStats* stats, Accept&& accept) {
  const int d = box.dim();
  std::vector<double> x(d);
  std::uint64_t proposals = 0, accepted = 0;
  while (accepted < n) {
    for (int a = 0; a < d; ++a)
      x[a] = box.lo[a] + box.width(a) * uniform01(seed, proposals * static_cast<std::uint64_t>(d) + a);
    ++proposals;
    if (accept(std::span<const double>(x))) ++accepted;
    if (proposals >= kStallWindow && static_cast<double>(accepted) < kStallRate * static_cast<double>(proposals))
      throw RejectionStall("acceptance rate below 1e-4 after " + std::to_string(proposals) + " proposals");
  }
  if (stats) {
    stats->proposals = proposals;
    stats->accepted = accepted;
  }
}

}  // namespace

PointSamplePair sample_index_pair(const IndexPairSpec& spec, std::size_t n, std::uint64_t seed,
                                  SampleStats* stats) {
  if (n == 0) throw std::invalid_argument("sample_index_pair needs n >= 1");
  PointSamplePair out;
  out.seed = seed;
  out.points.reserve(n);
  out.in_minus.reserve(n);
  rejection_loop(spec.region.box, n, seed, stats, [&](std::span<const double> x) {
    const PairLabel label = classify_point(spec, x);
    if (label == PairLabel::Outside) return false;
    out.points.emplace_back(x.begin(), x.end());
    out.in_minus.push_back(label == PairLabel::InNminus ? 1 : 0);
    return true;
  });
  return out;
}

std::vector<Point> sample_predicate(const Box& box, const std::function<bool(std::span<const double>)>& inside,
                                    std::size_t n, std::uint64_t seed, SampleStats* stats) {
  std::vector<Point> out;
  out.reserve(n);
  if (n == 0) return out;
  rejection_loop(box, n, seed, stats, [&](std::span<const double> x) {
    if (!inside(x)) return false;
    out.emplace_back(x.begin(), x.end());
    return true;
  });
  return out;
}

// ---- nearest neighbour index ----------------------------------------------

PointIndex::PointIndex(const std::vector<Point>& points, double cell) : points_(&points), cell_(cell) {
  if (points.empty()) return;
  dim_ = static_cast<int>(points.front().size());
  std::vector<double> lo(dim_, std::numeric_limits<double>::infinity()), hi(dim_, -lo[0]);
  for (const auto& p : points)
    for (int a = 0; a < dim_; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  // Keep the bucket count near the point count.
  const double budget = std::max(1024.0, 2.0 * static_cast<double>(points.size()));
  for (;;) {
    double cells = 1;
    for (int a = 0; a < dim_; ++a) cells *= std::floor((hi[a] - lo[a]) / cell_) + 1;
    if (cells <= budget) break;
    cell_ *= 1.5;
  }
  origin_ = lo;
  extent_.resize(dim_);
  long long total = 1;
  for (int a = 0; a < dim_; ++a) {
    extent_[a] = static_cast<int>(std::floor((hi[a] - lo[a]) / cell_)) + 1;
    total *= extent_[a];
  }
  std::vector<int> c(dim_);
  std::vector<int> counts(total + 1, 0);
  std::vector<long long> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    cell_of(points[i], c);
    keys[i] = key(c);
    ++counts[keys[i] + 1];
  }
  for (long long k = 0; k < total; ++k) counts[k + 1] += counts[k];
  start_ = counts;
  items_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) items_[counts[keys[i]]++] = static_cast<int>(i);
}

void PointIndex::cell_of(std::span<const double> x, std::span<int> c) const {
  for (int a = 0; a < dim_; ++a)
    c[a] = std::clamp(static_cast<int>(std::floor((x[a] - origin_[a]) / cell_)), 0, extent_[a] - 1);
}

long long PointIndex::key(std::span<const int> c) const {
  long long k = 0;
  for (int a = dim_ - 1; a >= 0; --a) k = k * extent_[a] + c[a];
  return k;
}

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Visits every cell in the cube [c - k, c + k] clipped to the extents, with
// `shell_only` restricting to cells at Chebyshev distance exactly k.
template <typename Fn>
void visit_cube(std::span<const int> c, int k, std::span<const int> extent, bool shell_only, Fn&& fn) {
  const int d = static_cast<int>(c.size());
  // Offsets are clipped to the extents so thin grids cost O(k) per shell.
  std::vector<int> lo(d), hi(d), off(d), cur(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = std::max(-k, -c[a]);
    hi[a] = std::min(k, extent[a] - 1 - c[a]);
    if (lo[a] > hi[a]) return;
  }
  off = lo;
  for (;;) {
    bool on_shell = !shell_only;
    for (int a = 0; a < d; ++a) {
      cur[a] = c[a] + off[a];
      if (std::abs(off[a]) == k) on_shell = true;
    }
    if (on_shell) fn(std::span<const int>(cur));
    int a = 0;
    while (a < d && ++off[a] > hi[a]) {
      off[a] = lo[a];
      ++a;
    }
    if (a == d) break;
  }
}

}  // namespace

double PointIndex::nearest(std::span<const double> x) const {
  if (items_.empty()) return std::numeric_limits<double>::infinity();
  std::vector<int> c(dim_);
  cell_of(x, c);
  double best = std::numeric_limits<double>::infinity();
  int max_extent = *std::max_element(extent_.begin(), extent_.end());
  // Distance from x to the bucket grid; a lower bound for every point.
  double outside = 0;
  for (int a = 0; a < dim_; ++a) {
    const double lo = origin_[a], hi = origin_[a] + extent_[a] * cell_;
    const double e = x[a] < lo ? lo - x[a] : (x[a] > hi ? x[a] - hi : 0.0);
    outside = std::max(outside, e);
  }
  for (int k = 0; k <= max_extent; ++k) {
    visit_cube(c, k, extent_, k > 0, [&](std::span<const int> cell) {
      const long long id = key(cell);
      for (int j = start_[id]; j < start_[id + 1]; ++j) best = std::min(best, dist2(x, (*points_)[items_[j]]));
    });
    // Unvisited cells are at least k cells away along some axis, and every
    // point lies inside the bucket grid.
    const double reach = std::max(k * cell_, outside);
    if (best <= reach * reach) break;
  }
  return std::sqrt(best);
}

void PointIndex::within(std::span<const double> x, double r, std::vector<int>& out) const {
  out.clear();
  if (items_.empty()) return;
  std::vector<int> c(dim_);
  cell_of(x, c);
  const int k = static_cast<int>(std::ceil(r / cell_));
  const double r2 = r * r;
  visit_cube(c, k, extent_, false, [&](std::span<const int> cell) {
    const long long id = key(cell);
    for (int j = start_[id]; j < start_[id + 1]; ++j)
      if (dist2(x, (*points_)[items_[j]]) <= r2) out.push_back(items_[j]);
  });
  std::sort(out.begin(), out.end());
}

bool PointIndex::any_within(std::span<const double> x, double r) const {
  if (items_.empty()) return false;
  std::vector<int> c(dim_);
  cell_of(x, c);
  const int k = static_cast<int>(std::ceil(r / cell_));
  const double r2 = r * r;
  bool found = false;
  visit_cube(c, k, extent_, false, [&](std::span<const int> cell) {
    if (found) return;
    const long long id = key(cell);
    for (int j = start_[id]; j < start_[id + 1] && !found; ++j)
      if (dist2(x, (*points_)[items_[j]]) <= r2) found = true;
  });
  return found;
}

// ---- density certification -------------------------------------------------

DensityResult certify_density(const std::vector<Point>& points,
                              const std::function<bool(std::span<const double>)>& predicate, const Box& box,
                              double delta, double grid_pitch) {
  if (!(grid_pitch > 0)) throw std::invalid_argument("grid pitch must be positive");
  if (grid_pitch > delta / 4 * (1 + 1e-12)) throw std::invalid_argument("certify_density needs pitch <= delta/4");
  double widest = 0;
  for (int a = 0; a < box.dim(); ++a) widest = std::max(widest, box.width(a));
  const Grid grid(box, static_cast<int>(std::ceil(widest / grid_pitch)));
  const double pitch = grid.max_pitch();
  const double reach = delta - pitch * std::sqrt(static_cast<double>(box.dim()));
  const PointIndex index(points, std::max(delta, pitch));

  DensityResult res;
  res.certified = true;
  grid.for_each([&](long long, std::span<const double> x) {
    if (!predicate(x)) return;
    ++res.grid_points;
    const double d = index.nearest(x);
    res.covering_radius = std::max(res.covering_radius, d);
    if (d > reach && res.certified) {
      res.certified = false;
      res.witness = Point(x.begin(), x.end());
    }
  });
  return res;
}

// ---- sparsification --------------------------------------------------------

PointSamplePair sparsify(const PointSamplePair& sample, double spacing) {
  PointSamplePair out;
  out.seed = sample.seed;
  out.delta_target = sample.delta_target;
  if (sample.points.empty()) return out;
  const int d = static_cast<int>(sample.points.front().size());
  std::unordered_map<long long, std::vector<int>> buckets;
  auto cell = [&](const Point& p, int a) { return static_cast<long long>(std::floor(p[a] / spacing)); };
  auto bucket_key = [&](std::span<const long long> c) {
    std::uint64_t h = 0;
    for (long long v : c) h = mix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<long long>(h);
  };
  const double s2 = spacing * spacing;
  std::vector<long long> c(d), cur(d);
  auto near_kept = [&](const Point& p) {
    for (int a = 0; a < d; ++a) c[a] = cell(p, a);
    std::vector<int> off(d, -1);
    for (;;) {
      for (int a = 0; a < d; ++a) cur[a] = c[a] + off[a];
      const auto it = buckets.find(bucket_key(cur));
      if (it != buckets.end())
        for (int j : it->second)
          if (dist2(p, out.points[j]) < s2) return true;
      int a = 0;
      while (a < d && ++off[a] > 1) off[a++] = -1;
      if (a == d) return false;
    }
  };
  auto keep = [&](std::size_t i) {
    const Point& p = sample.points[i];
    for (int a = 0; a < d; ++a) c[a] = cell(p, a);
    buckets[bucket_key(c)].push_back(static_cast<int>(out.points.size()));
    out.points.push_back(p);
    out.in_minus.push_back(sample.in_minus[i]);
  };
  for (int pass = 1; pass >= 0; --pass)
    for (std::size_t i = 0; i < sample.points.size(); ++i)
      if (sample.in_minus[i] == pass && !near_kept(sample.points[i])) keep(i);
  return out;
}

}  // namespace conley
