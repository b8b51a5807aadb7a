#pragma once

#include <string>
#include <vector>

namespace conley {

/// Betti numbers by degree 0..n-1; trailing zeros are kept.
struct BettiVector {
  std::vector<int> ranks;

  int total() const;
  int at(int degree) const { return degree < static_cast<int>(ranks.size()) ? ranks[degree] : 0; }
  /// Compare with missing trailing degrees read as zero.
  bool same(const BettiVector& other) const;
  /// "(0,1,0)" form, padded or trimmed to `degrees` entries when > 0.
  std::string str(int degrees = 0) const;
};

/// A finite chain complex over Z/2. Cells carry a degree and a boundary given
/// as indices of cells of degree - 1. The order of cells is the reduction
/// order; a filtration order keeps reduction sparse.
struct ChainComplex {
  std::vector<int> degree;
  std::vector<std::vector<int>> boundary;

  int add(int deg, std::vector<int> faces);
  std::size_t size() const { return degree.size(); }
};

/// Betti numbers of a Z/2 chain complex in degrees 0..max_degree by sparse
/// column reduction with clearing.
BettiVector betti_z2(const ChainComplex& complex, int max_degree);

enum class ConleyKind { MorseIndex, NonMorse, Trivial };

struct ConleyInterpretation {
  ConleyKind kind = ConleyKind::Trivial;
  int index = -1;  // Morse index when kind == MorseIndex

  /// "morse_index:1", "non_morse" or "trivial".
  std::string label() const;
};

ConleyInterpretation interpret_conley(const BettiVector& betti);

}  // namespace conley
