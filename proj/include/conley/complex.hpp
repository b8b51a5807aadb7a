#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "conley/homology.hpp"
#include "conley/sampler.hpp"

namespace conley {

class ComplexTooLarge : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Slack added to epsilon in the enclosing-ball test; part of the dump format
/// contract so complexes are reproducible across builds.
inline constexpr double kBallSlack = 1e-12;

/// Radius of the minimum enclosing ball of up to kMaxDim + 1 points, by
/// enumerating support subsets and their circumcentres.
double min_enclosing_radius(std::span<const Point* const> pts);

/// Simplices of one dimension stored flat: simplex i occupies
/// vertices[i*(dim+1) .. i*(dim+1)+dim], sorted ascending.
struct SimplexLayer {
  int dim = 0;
  std::vector<int> vertices;
  std::vector<double> radius;  // enclosing-ball radius (0 for hand-built pairs)
  std::vector<char> sub;       // 1 if the simplex belongs to the subcomplex

  std::size_t size() const { return radius.size(); }
  std::span<const int> simplex(std::size_t i) const {
    return {vertices.data() + i * (dim + 1), static_cast<std::size_t>(dim + 1)};
  }
};

struct SimplicialPair {
  std::vector<Point> points;  // may be empty for hand-built pairs
  std::vector<SimplexLayer> layers;
  double epsilon = 0.0;
  int max_dim = 0;
  /// Degrees reported by relative_betti: max_dim for Čech pairs (the top
  /// layer only kills cycles), max_dim + 1 for hand-built pairs.
  int homology_degrees = 0;

  std::size_t simplex_count() const;
  /// Euler characteristics of the complex and of the subcomplex.
  long long euler() const;
  long long euler_sub() const;
  /// Sorted list of all simplices (for comparisons in tests).
  std::vector<std::vector<int>> all_simplices(bool sub_only = false) const;
};

/// Čech pair at radius epsilon: cliques of the 2*epsilon graph extended one
/// vertex at a time and kept when their enclosing ball fits. Subcomplex
/// simplices are exactly those with every vertex in X_minus.
SimplicialPair build_cech_pair(const PointSamplePair& sample, double epsilon, int max_dim,
                               std::size_t max_simplices = 5'000'000);

/// Face-closed pair from maximal simplices; `sub_maximal` spans the subcomplex.
SimplicialPair pair_from_simplices(const std::vector<std::vector<int>>& maximal,
                                   const std::vector<std::vector<int>>& sub_maximal);

/// Relative Betti numbers of the quotient C(K)/C(L) over Z/2 in every stored
/// degree, including the top layer.
BettiVector relative_betti_all(const SimplicialPair& pair);

/// Absolute Betti numbers of K, or of L when `sub_only`.
BettiVector absolute_betti(const SimplicialPair& pair, bool sub_only);

/// Relative Betti numbers in degrees 0..m for a Čech pair of points in R^m
/// stored up to dimension m. Degrees below m come from the reduction; degree
/// m follows from the Euler characteristic, since a union of balls in R^m
/// has no homology in degree m or above.
BettiVector relative_betti_euler_closed(const SimplicialPair& pair, int ambient_dim);

/// relative_betti_all truncated to pair.homology_degrees.
BettiVector relative_betti(const SimplicialPair& pair);

/// chi(K) - chi(L) equals the alternating sum of the all-degree relative ranks.
bool euler_identity_holds(const SimplicialPair& pair, const BettiVector& all_degrees);

/// Text dump: one simplex per line, sorted vertex indices, trailing 0/1 flag.
void write_complex(std::ostream& os, const SimplicialPair& pair);

}  // namespace conley
