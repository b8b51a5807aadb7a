#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "conley/indexpair.hpp"

namespace conley {

class RejectionStall : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Point = std::vector<double>;

/// Samples X of N and the flags marking X_minus = X ∩ N_minus.
struct PointSamplePair {
  std::vector<Point> points;
  std::vector<char> in_minus;
  double delta_target = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
  std::size_t minus_count() const;
  std::vector<Point> minus_points() const;
};

struct SampleStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
};

/// n points uniform on N by rejection from the region box. Proposal i uses
/// counters (seed, i*d .. i*d+d-1), so the output depends only on (spec, n, seed).
PointSamplePair sample_index_pair(const IndexPairSpec& spec, std::size_t n, std::uint64_t seed,
                                  SampleStats* stats = nullptr);

/// Uniform samples from the region restricted to an arbitrary predicate.
std::vector<Point> sample_predicate(const Box& box, const std::function<bool(std::span<const double>)>& inside,
                                    std::size_t n, std::uint64_t seed, SampleStats* stats = nullptr);

struct DensityResult {
  bool certified = false;
  std::optional<Point> witness;  // uncovered grid point when violated
  double covering_radius = 0.0;  // max over predicate grid nodes of the distance to the sample
  long long grid_points = 0;
};

/// Certified iff every grid node satisfying the predicate lies within
/// delta - pitch*sqrt(m) of a sample point. Also reports the measured
/// covering radius over the grid nodes.
DensityResult certify_density(const std::vector<Point>& points,
                              const std::function<bool(std::span<const double>)>& predicate, const Box& box,
                              double delta, double grid_pitch);

/// Nearest-neighbour index over a point set (uniform bucket grid).
class PointIndex {
 public:
  PointIndex(const std::vector<Point>& points, double cell);

  /// Distance from x to the nearest point, or +inf if the set is empty.
  double nearest(std::span<const double> x) const;
  /// Indices of points within distance r of x.
  void within(std::span<const double> x, double r, std::vector<int>& out) const;
  /// True iff some point lies within distance r of x.
  bool any_within(std::span<const double> x, double r) const;

 private:
  long long key(std::span<const int> c) const;
  void cell_of(std::span<const double> x, std::span<int> c) const;

  const std::vector<Point>* points_;
  int dim_ = 0;
  double cell_;
  std::vector<double> origin_;
  std::vector<int> extent_;
  std::vector<int> start_;  // bucket offsets (CSR)
  std::vector<int> items_;
};

/// Greedy net of spacing `spacing`: the X_minus points are thinned first, then
/// X points farther than `spacing` from every kept point are added. The
/// result keeps Y ∩ N_minus = Y_minus.
PointSamplePair sparsify(const PointSamplePair& sample, double spacing);

}  // namespace conley
