#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "conley/homology.hpp"
#include "conley/indexpair.hpp"
#include "conley/sampler.hpp"

namespace conley {

class UnstableResolution : public std::runtime_error {
 public:
  UnstableResolution(const std::string& what, BettiVector coarse, BettiVector fine)
      : std::runtime_error(what), coarse_(std::move(coarse)), fine_(std::move(fine)) {}
  const BettiVector& coarse() const { return coarse_; }
  const BettiVector& fine() const { return fine_; }

 private:
  BettiVector coarse_, fine_;
};

using Labeler = std::function<PairLabel(std::span<const double>)>;

/// Pixel (voxel) labels of a box at `resolution` cells per axis, taken at
/// cell centres.
struct GridPair {
  Box box;
  int resolution = 0;
  std::vector<PairLabel> labels;

  int dim() const { return box.dim(); }
  long long cell_count() const { return static_cast<long long>(labels.size()); }
  void centre(long long cell, std::span<double> out) const;
};

GridPair label_grid(const Labeler& labeler, const Box& box, int resolution);

/// H(K, L) over Z/2 where K is the closed cubical set of labelled cells and L
/// the closed set of InNminus cells. Degrees 0..dim.
BettiVector grid_pair_homology(const GridPair& grid);

/// Homology at `resolution`; dimension at most 3.
BettiVector grid_relative_homology(const Labeler& labeler, const Box& box, int resolution);

/// Homology at R and 2R; throws UnstableResolution when they differ.
BettiVector grid_relative_homology_stable(const Labeler& labeler, const Box& box, int resolution);

/// Labeler for the index pair (N, N_minus).
Labeler index_pair_labeler(const IndexPairSpec& spec);

/// Labeler for (union of eps-balls around X, union around X_minus).
Labeler union_of_balls_labeler(const PointSamplePair& sample, double epsilon);

}  // namespace conley
