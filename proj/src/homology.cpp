#include "conley/homology.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace conley {

int BettiVector::total() const { return std::accumulate(ranks.begin(), ranks.end(), 0); }

bool BettiVector::same(const BettiVector& other) const {
  const std::size_t n = std::max(ranks.size(), other.ranks.size());
  for (std::size_t i = 0; i < n; ++i)
    if (at(static_cast<int>(i)) != other.at(static_cast<int>(i))) return false;
  return true;
}

std::string BettiVector::str(int degrees) const {
  const int n = degrees > 0 ? degrees : static_cast<int>(ranks.size());
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < n; ++i) os << (i ? "," : "") << at(i);
  os << ')';
  return os.str();
}

int ChainComplex::add(int deg, std::vector<int> faces) {
  std::sort(faces.begin(), faces.end());
  degree.push_back(deg);
  boundary.push_back(std::move(faces));
  return static_cast<int>(degree.size()) - 1;
}

namespace {

// Symmetric difference of two sorted index lists.
void add_into(std::vector<int>& target, const std::vector<int>& source, std::vector<int>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                std::back_inserter(scratch));
  target.swap(scratch);
}

}  // namespace

namespace {

// Exhaustive elementary reductions: a cell with a single live face is paired
// with it (coreduction), a cell with a single live coface is paired with that
// coface (collapse). Each pair removes one cell in two adjacent degrees and
// leaves homology unchanged; the surviving boundaries are the original ones
// restricted to surviving cells.
std::vector<char> reduce_pairs(const ChainComplex& cx) {
  const int n = static_cast<int>(cx.size());
  std::vector<int> cob_start(n + 1, 0);
  for (int c = 0; c < n; ++c)
    for (int f : cx.boundary[c]) ++cob_start[f + 1];
  for (int i = 0; i < n; ++i) cob_start[i + 1] += cob_start[i];
  std::vector<int> cob(cob_start[n]);
  {
    std::vector<int> fill(cob_start.begin(), cob_start.end() - 1);
    for (int c = 0; c < n; ++c)
      for (int f : cx.boundary[c]) cob[fill[f]++] = c;
  }
  std::vector<char> alive(n, 1);
  std::vector<int> bd_count(n), cob_count(n);
  for (int c = 0; c < n; ++c) {
    bd_count[c] = static_cast<int>(cx.boundary[c].size());
    cob_count[c] = cob_start[c + 1] - cob_start[c];
  }
  std::vector<int> queue(n);
  std::iota(queue.begin(), queue.end(), 0);

  auto kill = [&](int x) {
    alive[x] = 0;
    for (int f : cx.boundary[x])
      if (alive[f]) {
        --cob_count[f];
        queue.push_back(f);
      }
    for (int i = cob_start[x]; i < cob_start[x + 1]; ++i)
      if (alive[cob[i]]) {
        --bd_count[cob[i]];
        queue.push_back(cob[i]);
      }
  };

  while (!queue.empty()) {
    const int x = queue.back();
    queue.pop_back();
    if (!alive[x]) continue;
    if (bd_count[x] == 1) {
      for (int f : cx.boundary[x])
        if (alive[f]) {
          kill(x);
          kill(f);
          break;
        }
    } else if (cob_count[x] == 1) {
      for (int i = cob_start[x]; i < cob_start[x + 1]; ++i)
        if (alive[cob[i]]) {
          const int a = cob[i];
          kill(a);
          kill(x);
          break;
        }
    }
  }
  return alive;
}

}  // namespace

BettiVector betti_z2(const ChainComplex& full, int max_degree) {
  int top = 0;
  for (int d : full.degree) top = std::max(top, d);

  const std::vector<char> alive = reduce_pairs(full);
  ChainComplex complex;
  std::vector<int> remap(full.size(), -1);
  int next = 0;
  for (std::size_t c = 0; c < full.size(); ++c)
    if (alive[c]) remap[c] = next++;
  for (std::size_t c = 0; c < full.size(); ++c) {
    if (!alive[c]) continue;
    std::vector<int> bd;
    for (int f : full.boundary[c])
      if (alive[f]) bd.push_back(remap[f]);
    complex.add(full.degree[c], std::move(bd));
  }

  const int n = static_cast<int>(complex.size());
  std::vector<long long> count(top + 2, 0);
  for (int d : complex.degree) ++count[d];

  // Rows and columns of every boundary matrix share the global cell index.
  std::vector<int> pivot_col(n, -1);  // row -> reduced column owning it as low
  std::vector<char> cleared(n, 0);
  std::vector<long long> rank(top + 2, 0);
  std::vector<std::vector<int>> reduced(n);
  std::vector<int> scratch;

  std::vector<std::vector<int>> by_degree(top + 1);
  for (int i = 0; i < n; ++i) by_degree[complex.degree[i]].push_back(i);

  for (int d = top; d >= 1; --d) {
    for (int j : by_degree[d]) {
      if (cleared[j]) continue;
      std::vector<int> col = complex.boundary[j];
      while (!col.empty()) {
        const int low = col.back();
        const int other = pivot_col[low];
        if (other < 0) break;
        add_into(col, reduced[other], scratch);
      }
      if (col.empty()) continue;
      const int low = col.back();
      pivot_col[low] = j;
      cleared[low] = 1;  // column `low` of the next lower boundary reduces to zero
      ++rank[d];
      reduced[j] = std::move(col);
    }
    // Columns of degree d are no longer needed once degree d - 1 starts.
    for (int j : by_degree[d]) std::vector<int>().swap(reduced[j]);
  }

  BettiVector b;
  b.ranks.assign(max_degree + 1, 0);
  for (int k = 0; k <= max_degree; ++k) {
    const long long cells = k <= top ? count[k] : 0;
    const long long rk = k <= top ? rank[k] : 0;
    const long long rk1 = k + 1 <= top ? rank[k + 1] : 0;
    b.ranks[k] = static_cast<int>(cells - rk - rk1);
  }
  return b;
}

std::string ConleyInterpretation::label() const {
  switch (kind) {
    case ConleyKind::MorseIndex:
      return "morse_index:" + std::to_string(index);
    case ConleyKind::NonMorse:
      return "non_morse";
    case ConleyKind::Trivial:
      return "trivial";
  }
  return "trivial";
}

ConleyInterpretation interpret_conley(const BettiVector& betti) {
  ConleyInterpretation out;
  const int total = betti.total();
  if (total == 0) return out;
  if (total == 1) {
    out.kind = ConleyKind::MorseIndex;
    for (std::size_t i = 0; i < betti.ranks.size(); ++i)
      if (betti.ranks[i] == 1) out.index = static_cast<int>(i);
    return out;
  }
  out.kind = ConleyKind::NonMorse;
  return out;
}

}  // namespace conley
