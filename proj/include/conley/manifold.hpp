#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "conley/field.hpp"

namespace conley {

enum class ChartMode { Flat, Sphere, Torus };

/// Ambient setting. Flat charts model M = R^m with infinite reach; the
/// sphere and torus are the standard embeddings in R^3.
struct ManifoldChart {
  ChartMode mode = ChartMode::Flat;
  int dim = 2;            // chart (ambient coordinate) dimension
  double radius = 1.0;    // Sphere: R; Torus: major radius
  double minor = 0.5;     // Torus: minor radius

  static ManifoldChart flat(int dim);
  static ManifoldChart sphere(double radius);
  static ManifoldChart torus(double major, double minor);

  /// Reach of M; +inf for flat charts.
  double tau() const;
};

/// 0 for flat charts, 1/R for a sphere of radius R, 1/r for a torus with
/// minor radius r.
double reciprocal_tau(const ManifoldChart& chart);

/// Nearest point on a curved chart's surface (closed form). For points on the
/// medial axis an arbitrary nearest point is returned.
std::vector<double> nearest_surface_point(const ManifoldChart& chart, std::span<const double> x);

/// Surface point from angles: sphere (polar u, azimuth v); torus (u around
/// the core circle, v around the tube).
std::vector<double> surface_point(const ManifoldChart& chart, double u, double v);

/// Axis-aligned box in chart coordinates.
struct Box {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double width(int axis) const { return hi[axis] - lo[axis]; }
  bool contains(std::span<const double> x) const;
};

/// lo <= e(x) <= hi; either bound may be infinite (sub- or superlevel).
struct LevelCondition {
  Expression expr;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// The isolating neighbourhood K: a chart box intersected with any number of
/// sub/super/interlevel conditions (e.g. an annulus).
struct Region {
  ManifoldChart chart;
  Box box;
  std::vector<LevelCondition> conditions;

  int dim() const { return box.dim(); }
  bool contains(std::span<const double> x) const;
};

/// Regular grid over a box with `cells` cells per axis (cells + 1 nodes).
class Grid {
 public:
  Grid(Box box, int cells);

  int dim() const { return box_.dim(); }
  int cells() const { return cells_; }
  long long node_count() const { return count_; }
  double pitch(int axis) const { return box_.width(axis) / cells_; }
  double max_pitch() const;
  const Box& box() const { return box_; }

  /// Coordinates of node `id` written into `out`.
  void node(long long id, std::span<double> out) const;
  /// Integer coordinates of node `id`.
  void coords(long long id, std::span<int> out) const;
  long long id(std::span<const int> c) const;
  bool on_boundary(long long id) const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::vector<double> x(dim());
    for (long long i = 0; i < count_; ++i) {
      node(i, x);
      fn(i, std::span<const double>(x));
    }
  }

 private:
  Box box_;
  int cells_;
  long long count_;
};

/// 1 for grid nodes inside the region, 0 otherwise.
std::vector<char> region_mask(const Region& region, const Grid& grid);

/// Region nodes with an axis neighbour outside the region (or on the box
/// boundary).
std::vector<char> region_boundary(const std::vector<char>& mask, const Grid& grid);

/// Number of axis-connected components among masked nodes.
int count_components(const std::vector<char>& mask, const Grid& grid);

}  // namespace conley
