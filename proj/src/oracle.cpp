#include "conley/oracle.hpp"

#include <memory>

namespace conley {

void GridPair::centre(long long cell, std::span<double> out) const {
  for (int a = 0; a < dim(); ++a) {
    const long long c = cell % resolution;
    cell /= resolution;
    out[a] = box.lo[a] + (static_cast<double>(c) + 0.5) * box.width(a) / resolution;
  }
}

GridPair label_grid(const Labeler& labeler, const Box& box, int resolution) {
  if (resolution < 1) throw std::invalid_argument("resolution must be positive");
  if (box.dim() < 1 || box.dim() > 3) throw std::invalid_argument("grid oracle supports dimensions 1 to 3");
  GridPair g;
  g.box = box;
  g.resolution = resolution;
  long long n = 1;
  for (int a = 0; a < box.dim(); ++a) n *= resolution;
  g.labels.resize(n);
  std::vector<double> x(box.dim());
  for (long long i = 0; i < n; ++i) {
    g.centre(i, x);
    g.labels[i] = labeler(x);
  }
  return g;
}

BettiVector grid_pair_homology(const GridPair& grid) {
  const int d = grid.dim();
  const int res = grid.resolution;
  const long long side = 2LL * res + 1;  // doubled lattice: even = vertex coordinate, odd = interval
  long long lattice = 1;
  for (int a = 0; a < d; ++a) lattice *= side;

  // 0 = absent, 1 = in K only, 2 = in L (hence in K)
  std::vector<char> state(lattice, 0);
  std::vector<long long> stride(d);
  stride[0] = 1;
  for (int a = 1; a < d; ++a) stride[a] = stride[a - 1] * side;

  std::vector<int> c(d), off(d);
  for (long long cell = 0; cell < grid.cell_count(); ++cell) {
    const PairLabel label = grid.labels[cell];
    if (label == PairLabel::Outside) continue;
    const char mark = label == PairLabel::InNminus ? 2 : 1;
    long long rest = cell, centre = 0;
    for (int a = 0; a < d; ++a) {
      c[a] = static_cast<int>(rest % res);
      rest /= res;
      centre += (2LL * c[a] + 1) * stride[a];
    }
    // Close the top cell: every lattice point in its 3^d neighbourhood.
    std::fill(off.begin(), off.end(), -1);
    for (;;) {
      long long id = centre;
      for (int a = 0; a < d; ++a) id += off[a] * stride[a];
      if (state[id] < mark) state[id] = mark;
      int a = 0;
      while (a < d && ++off[a] > 1) off[a++] = -1;
      if (a == d) break;
    }
  }

  ChainComplex cx;
  std::vector<int> index(lattice, -1);
  int next = 0;
  for (long long id = 0; id < lattice; ++id)
    if (state[id] == 1) index[id] = next++;
  std::vector<int> coord(d);
  for (long long id = 0; id < lattice; ++id) {
    if (state[id] != 1) continue;
    long long rest = id;
    int deg = 0;
    for (int a = 0; a < d; ++a) {
      coord[a] = static_cast<int>(rest % side);
      rest /= side;
      deg += coord[a] & 1;
    }
    std::vector<int> bd;
    for (int a = 0; a < d; ++a) {
      if (!(coord[a] & 1)) continue;
      for (long long face : {id - stride[a], id + stride[a]})
        if (state[face] == 1) bd.push_back(index[face]);  // faces in L vanish in the quotient
    }
    cx.add(deg, std::move(bd));
  }
  return betti_z2(cx, d);
}

BettiVector grid_relative_homology(const Labeler& labeler, const Box& box, int resolution) {
  return grid_pair_homology(label_grid(labeler, box, resolution));
}

BettiVector grid_relative_homology_stable(const Labeler& labeler, const Box& box, int resolution) {
  BettiVector coarse = grid_relative_homology(labeler, box, resolution);
  BettiVector fine = grid_relative_homology(labeler, box, 2 * resolution);
  if (!coarse.same(fine))
    throw UnstableResolution("oracle homology " + coarse.str() + " at " + std::to_string(resolution) + " vs " +
                                 fine.str() + " at " + std::to_string(2 * resolution),
                             coarse, fine);
  return fine;
}

Labeler index_pair_labeler(const IndexPairSpec& spec) {
  auto shared = std::make_shared<IndexPairSpec>(spec);
  return [shared](std::span<const double> x) { return classify_point(*shared, x); };
}

Labeler union_of_balls_labeler(const PointSamplePair& sample, double epsilon) {
  struct State {
    std::vector<Point> all, minus;
    std::unique_ptr<PointIndex> all_index, minus_index;
  };
  auto st = std::make_shared<State>();
  st->all = sample.points;
  st->minus = sample.minus_points();
  st->all_index = std::make_unique<PointIndex>(st->all, epsilon);
  st->minus_index = std::make_unique<PointIndex>(st->minus, epsilon);
  return [st, epsilon](std::span<const double> x) {
    if (st->minus_index->any_within(x, epsilon)) return PairLabel::InNminus;
    if (st->all_index->any_within(x, epsilon)) return PairLabel::InNonly;
    return PairLabel::Outside;
  };
}

}  // namespace conley
