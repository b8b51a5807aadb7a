#pragma once

#include <string>
#include <vector>

#include <sstream>

#include "conley/field.hpp"
#include "conley/geometry.hpp"
#include "conley/indexpair.hpp"
#include "conley/manifold.hpp"

namespace fixtures {

inline conley::Region box_region(std::vector<double> lo, std::vector<double> hi) {
  conley::Region r;
  r.chart = conley::ManifoldChart::flat(static_cast<int>(lo.size()));
  r.box = conley::Box{std::move(lo), std::move(hi)};
  return r;
}

inline conley::Region square(double half) { return box_region({-half, -half}, {half, half}); }

inline conley::Field field(const std::string& text, int dim = 2) {
  return conley::Field(conley::parse_expression(text, dim));
}

/// Index pair of the saddle -x1^2 + x2^2 on [-1, 1]^2, built once.
inline const conley::IndexPairSpec& saddle() {
  static const conley::IndexPairSpec spec =
      conley::build_index_pair(conley::parse_expression("-x1^2 + x2^2", 2), nullptr, square(1));
  return spec;
}

inline const conley::IndexPairSpec& minimum() {
  static const conley::IndexPairSpec spec =
      conley::build_index_pair(conley::parse_expression("x1^2 + x2^2", 2), nullptr, square(1));
  return spec;
}

/// Curved quadrant {a1 (x1 + c1 x2^2) <= 0} ∩ {a2 (x2 + c2 x1^2) <= 0} on
/// [-2, 2]^2. Scaling by a_i changes mu and Lambda but not the set.
inline conley::RegularIntersectionSpec quadrant(double a1, double a2, double c1, double c2) {
  std::ostringstream e1, e2;
  e1.precision(17);
  e2.precision(17);
  e1 << a1 << " * (x1 + " << c1 << " * x2^2)";
  e2 << a2 << " * (x2 + " << c2 << " * x1^2)";
  const conley::Region r = box_region({-2, -2}, {2, 2});
  return {{field(e1.str()), field(e2.str())},
          {conley::ConstraintKind::Sublevel, conley::ConstraintKind::Sublevel},
          r.chart,
          r};
}

/// Curved strip {a1 (x1 + c1 x2^2) <= 0} ∩ {a2 (-x1 - 1 + c2 x2^2) <= 0} on
/// [-3, 2] x [-1.2, 1.2]; |c1 + c2| <= 0.4 keeps the walls apart.
inline conley::RegularIntersectionSpec strip(double a1, double a2, double c1, double c2) {
  std::ostringstream e1, e2;
  e1.precision(17);
  e2.precision(17);
  e1 << a1 << " * (x1 + " << c1 << " * x2^2)";
  e2 << a2 << " * (-x1 - 1 + " << c2 << " * x2^2)";
  const conley::Region r = box_region({-3, -1.2}, {2, 1.2});
  return {{field(e1.str()), field(e2.str())},
          {conley::ConstraintKind::Sublevel, conley::ConstraintKind::Sublevel},
          r.chart,
          r};
}

inline const conley::Box kQuadrantProbe{{-1, -1}, {1, 1}};
inline const conley::Box kStripProbe{{-1.5, -1}, {0.5, 1}};

}  // namespace fixtures
