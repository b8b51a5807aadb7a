#include "conley/complex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

namespace conley {

double min_enclosing_radius(std::span<const Point* const> pts) {
  const int n = static_cast<int>(pts.size());
  if (n == 0) return 0.0;
  if (n == 1) return 0.0;
  const int d = static_cast<int>(pts[0]->size());
  if (n > kMaxDim + 2) throw std::invalid_argument("enclosing ball supports at most kMaxDim + 2 points");

  auto contains_all = [&](const Eigen::VectorXd& c, double r) {
    const double r2 = r * r * (1 + 1e-12) + 1e-300;
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int a = 0; a < d; ++a) s += ((*pts[i])[a] - c[a]) * ((*pts[i])[a] - c[a]);
      if (s > r2) return false;
    }
    return true;
  };

  double best = std::numeric_limits<double>::infinity();
  const int max_support = std::min(n, d + 1);
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    const int k = std::popcount(mask);
    if (k < 2 || k > max_support) continue;
    int idx[kMaxDim + 2];
    int m = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx[m++] = i;
    const Point& p0 = *pts[idx[0]];
    Eigen::MatrixXd v(d, k - 1);
    for (int j = 1; j < k; ++j)
      for (int a = 0; a < d; ++a) v(a, j - 1) = (*pts[idx[j]])[a] - p0[a];
    const Eigen::MatrixXd gram = v.transpose() * v;
    Eigen::VectorXd rhs(k - 1);
    for (int j = 0; j < k - 1; ++j) rhs[j] = gram(j, j) / 2;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    // Affinely dependent supports have no unique circumcentre.
    if (lu.rank() < k - 1) continue;
    const Eigen::VectorXd lambda = lu.solve(rhs);
    const Eigen::VectorXd offset = v * lambda;
    const double r = offset.norm();
    if (r >= best) continue;
    Eigen::VectorXd c(d);
    for (int a = 0; a < d; ++a) c[a] = p0[a] + offset[a];
    if (contains_all(c, r)) best = r;
  }
  // Only coincident points leave every support degenerate.
  return std::isfinite(best) ? best : 0.0;
}

std::size_t SimplicialPair::simplex_count() const {
  std::size_t s = 0;
  for (const auto& l : layers) s += l.size();
  return s;
}

long long SimplicialPair::euler() const {
  long long chi = 0;
  for (const auto& l : layers) chi += (l.dim % 2 ? -1 : 1) * static_cast<long long>(l.size());
  return chi;
}

long long SimplicialPair::euler_sub() const {
  long long chi = 0;
  for (const auto& l : layers)
    chi += (l.dim % 2 ? -1 : 1) * static_cast<long long>(std::count(l.sub.begin(), l.sub.end(), 1));
  return chi;
}

std::vector<std::vector<int>> SimplicialPair::all_simplices(bool sub_only) const {
  std::vector<std::vector<int>> out;
  for (const auto& l : layers)
    for (std::size_t i = 0; i < l.size(); ++i)
      if (!sub_only || l.sub[i]) {
        const auto s = l.simplex(i);
        out.emplace_back(s.begin(), s.end());
      }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Orders a layer by (radius, lexicographic vertices) in place.
void canonical_sort(SimplexLayer& layer) {
  const std::size_t n = layer.size();
  const int w = layer.dim + 1;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (layer.radius[a] != layer.radius[b]) return layer.radius[a] < layer.radius[b];
    return std::lexicographical_compare(layer.vertices.begin() + a * w, layer.vertices.begin() + (a + 1) * w,
                                        layer.vertices.begin() + b * w, layer.vertices.begin() + (b + 1) * w);
  });
  SimplexLayer out;
  out.dim = layer.dim;
  out.vertices.reserve(layer.vertices.size());
  out.radius.reserve(n);
  out.sub.reserve(n);
  for (std::size_t i : order) {
    out.vertices.insert(out.vertices.end(), layer.vertices.begin() + i * w, layer.vertices.begin() + (i + 1) * w);
    out.radius.push_back(layer.radius[i]);
    out.sub.push_back(layer.sub[i]);
  }
  layer = std::move(out);
}

}  // namespace

SimplicialPair build_cech_pair(const PointSamplePair& sample, double epsilon, int max_dim,
                               std::size_t max_simplices) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (max_dim < 0) throw std::invalid_argument("max_dim must be nonnegative");
  SimplicialPair pair;
  pair.points = sample.points;
  pair.epsilon = epsilon;
  pair.max_dim = max_dim;
  pair.homology_degrees = max_dim;
  const int n = static_cast<int>(sample.points.size());
  if (max_dim + 1 > kMaxDim + 2) throw std::invalid_argument("max_dim too large for the enclosing-ball test");
  pair.layers.resize(max_dim + 1);
  for (int k = 0; k <= max_dim; ++k) pair.layers[k].dim = k;
  if (n == 0) return pair;

  const double reach = 2 * epsilon + kBallSlack;
  const PointIndex index(pair.points, reach);
  std::vector<std::vector<int>> up(n);  // neighbours with larger index, sorted
  std::vector<int> buf;
  for (int i = 0; i < n; ++i) {
    index.within(pair.points[i], reach, buf);
    for (int j : buf)
      if (j > i) up[i].push_back(j);
  }

  std::size_t total = 0;
  auto bump = [&]() {
    if (++total > max_simplices)
      throw ComplexTooLarge("Čech complex exceeds " + std::to_string(max_simplices) + " simplices");
  };
  auto emit = [&](std::span<const int> verts, double radius) {
    SimplexLayer& layer = pair.layers[verts.size() - 1];
    bool sub = true;
    for (int v : verts) sub = sub && sample.in_minus[v];
    layer.vertices.insert(layer.vertices.end(), verts.begin(), verts.end());
    layer.radius.push_back(radius);
    layer.sub.push_back(sub ? 1 : 0);
    bump();
  };

  std::vector<int> simplex;
  std::vector<const Point*> ptrs;
  // Depth-first extension; `cand` holds common upper neighbours of `simplex`.
  auto extend = [&](auto&& self, const std::vector<int>& cand) -> void {
    if (static_cast<int>(simplex.size()) > max_dim) return;
    for (std::size_t c = 0; c < cand.size(); ++c) {
      const int v = cand[c];
      simplex.push_back(v);
      ptrs.push_back(&pair.points[v]);
      const double r = min_enclosing_radius(ptrs);
      if (r <= epsilon + kBallSlack) {
        emit(simplex, r);
        if (static_cast<int>(simplex.size()) <= max_dim) {
          std::vector<int> next;
          std::set_intersection(cand.begin() + c + 1, cand.end(), up[v].begin(), up[v].end(),
                                std::back_inserter(next));
          if (!next.empty()) self(self, next);
        }
      }
      simplex.pop_back();
      ptrs.pop_back();
    }
  };

  for (int i = 0; i < n; ++i) {
    simplex.assign(1, i);
    ptrs.assign(1, &pair.points[i]);
    emit(simplex, 0.0);
    if (max_dim >= 1) extend(extend, up[i]);
  }
  for (auto& layer : pair.layers) canonical_sort(layer);
  return pair;
}

SimplicialPair pair_from_simplices(const std::vector<std::vector<int>>& maximal,
                                   const std::vector<std::vector<int>>& sub_maximal) {
  auto close = [](const std::vector<std::vector<int>>& tops) {
    std::set<std::vector<int>> faces;
    for (auto s : tops) {
      std::sort(s.begin(), s.end());
      const int k = static_cast<int>(s.size());
      for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<int> f;
        for (int i = 0; i < k; ++i)
          if (mask & (1u << i)) f.push_back(s[i]);
        faces.insert(f);
      }
    }
    return faces;
  };
  const auto all = close(maximal);
  const auto sub = close(sub_maximal);
  for (const auto& s : sub)
    if (!all.count(s)) throw std::invalid_argument("subcomplex is not contained in the complex");
  SimplicialPair pair;
  int top = 0;
  for (const auto& s : all) top = std::max(top, static_cast<int>(s.size()) - 1);
  pair.max_dim = top;
  pair.homology_degrees = top + 1;
  pair.layers.resize(top + 1);
  for (int k = 0; k <= top; ++k) pair.layers[k].dim = k;
  for (const auto& s : all) {
    SimplexLayer& layer = pair.layers[s.size() - 1];
    layer.vertices.insert(layer.vertices.end(), s.begin(), s.end());
    layer.radius.push_back(0.0);
    layer.sub.push_back(sub.count(s) ? 1 : 0);
  }
  return pair;
}

namespace {

enum class Part { Quotient, Whole, Sub };

// Chain complex of the quotient C(K)/C(L), of K, or of L.
BettiVector part_betti(const SimplicialPair& pair, Part part) {
  auto kept = [part](char sub) {
    switch (part) {
      case Part::Quotient:
        return !sub;
      case Part::Whole:
        return true;
      case Part::Sub:
        return sub != 0;
    }
    return false;
  };
  ChainComplex cx;
  // Cell index of each kept simplex, per layer; -1 for dropped simplices.
  std::vector<std::vector<int>> cell(pair.layers.size());
  // Lexicographic order of each layer for face lookup.
  std::vector<std::vector<int>> lex(pair.layers.size());
  for (std::size_t k = 0; k < pair.layers.size(); ++k) {
    const SimplexLayer& layer = pair.layers[k];
    const int w = layer.dim + 1;
    lex[k].resize(layer.size());
    std::iota(lex[k].begin(), lex[k].end(), 0);
    std::sort(lex[k].begin(), lex[k].end(), [&](int a, int b) {
      return std::lexicographical_compare(layer.vertices.begin() + a * w, layer.vertices.begin() + (a + 1) * w,
                                          layer.vertices.begin() + b * w, layer.vertices.begin() + (b + 1) * w);
    });
    cell[k].assign(layer.size(), -1);
    std::vector<int> face(w > 1 ? w - 1 : 0);
    for (std::size_t i = 0; i < layer.size(); ++i) {
      if (!kept(layer.sub[i])) continue;
      std::vector<int> bd;
      if (k > 0) {
        const SimplexLayer& below = pair.layers[k - 1];
        const auto s = layer.simplex(i);
        for (int drop = 0; drop < w; ++drop) {
          int m = 0;
          for (int j = 0; j < w; ++j)
            if (j != drop) face[m++] = s[j];
          const auto it = std::lower_bound(lex[k - 1].begin(), lex[k - 1].end(), 0, [&](int a, int) {
            return std::lexicographical_compare(below.vertices.begin() + a * (w - 1),
                                                below.vertices.begin() + (a + 1) * (w - 1), face.begin(),
                                                face.end());
          });
          if (it == lex[k - 1].end() ||
              !std::equal(face.begin(), face.end(), below.vertices.begin() + *it * (w - 1)))
            throw std::invalid_argument("simplicial pair is not closed under faces");
          if (!kept(below.sub[*it])) continue;  // subcomplex faces vanish in the quotient
          bd.push_back(cell[k - 1][*it]);
        }
      }
      cell[k][i] = cx.add(static_cast<int>(k), std::move(bd));
    }
  }
  const int top = pair.layers.empty() ? 0 : static_cast<int>(pair.layers.size()) - 1;
  return betti_z2(cx, top);
}

}  // namespace

BettiVector relative_betti_all(const SimplicialPair& pair) { return part_betti(pair, Part::Quotient); }

BettiVector absolute_betti(const SimplicialPair& pair, bool sub_only) {
  return part_betti(pair, sub_only ? Part::Sub : Part::Whole);
}

BettiVector relative_betti_euler_closed(const SimplicialPair& pair, int ambient_dim) {
  const int m = ambient_dim;
  if (m < 1 || pair.max_dim < m)
    throw std::invalid_argument("Euler closure needs simplices up to the ambient dimension");
  BettiVector rel = relative_betti_all(pair);
  const BettiVector whole = absolute_betti(pair, false);
  const BettiVector sub = absolute_betti(pair, true);
  // chi(K) - chi(L) = sum_k (-1)^k rank_k(K, L), with H_k(K) = H_k(L) = 0 for k >= m.
  long long diff = 0, partial = 0;
  for (int k = 0; k < m; ++k) {
    const long long sign = k % 2 ? -1 : 1;
    diff += sign * (static_cast<long long>(whole.at(k)) - static_cast<long long>(sub.at(k)));
    partial += sign * static_cast<long long>(rel.at(k));
  }
  const long long top = (m % 2 ? -1 : 1) * (diff - partial);
  if (top < 0) throw std::logic_error("Euler closure produced a negative rank");
  rel.ranks.resize(m + 1, 0);
  rel.ranks[m] = static_cast<int>(top);
  return rel;
}

BettiVector relative_betti(const SimplicialPair& pair) {
  BettiVector all = relative_betti_all(pair);
  all.ranks.resize(std::max(0, pair.homology_degrees), 0);
  return all;
}

bool euler_identity_holds(const SimplicialPair& pair, const BettiVector& all_degrees) {
  long long alt = 0;
  for (std::size_t k = 0; k < all_degrees.ranks.size(); ++k) alt += (k % 2 ? -1 : 1) * all_degrees.ranks[k];
  return pair.euler() - pair.euler_sub() == alt;
}

void write_complex(std::ostream& os, const SimplicialPair& pair) {
  os << "# epsilon " << pair.epsilon << " max_dim " << pair.max_dim << " slack " << kBallSlack << '\n';
  for (const auto& layer : pair.layers)
    for (std::size_t i = 0; i < layer.size(); ++i) {
      const auto s = layer.simplex(i);
      for (std::size_t j = 0; j < s.size(); ++j) os << (j ? " " : "") << s[j];
      os << ' ' << static_cast<int>(layer.sub[i]) << '\n';
    }
}

}  // namespace conley
