#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "conley/indexpair.hpp"
#include "conley/sampler.hpp"

namespace conley {

struct Segment {
  double x0, y0, x1, y1;
};

/// Marching squares for {value = level} over a 2-D grid of `cells` cells per
/// axis. Saddle cells are split by the sign of the cell centre average.
template <typename Fn>
std::vector<Segment> contour_segments(Fn&& value, const Box& box, int cells, double level);

struct FigureOptions {
  int resolution = 200;     // shading and contour cells per axis
  double width_px = 640.0;  // drawing width; height follows the box aspect
  bool contours = true;
};

/// Static SVG of a 2-D index pair: N and N_minus shaded, contours of f = alpha,
/// h = beta, h = gamma, g = r0 and g = r1, and the point cloud when given.
/// Throws std::invalid_argument unless the spec is 2-dimensional.
void write_figure_svg(std::ostream& os, const IndexPairSpec& spec, const PointSamplePair* points = nullptr,
                      const FigureOptions& opts = {});

// ---- implementation --------------------------------------------------------

template <typename Fn>
std::vector<Segment> contour_segments(Fn&& value, const Box& box, int cells, double level) {
  const double hx = box.width(0) / cells, hy = box.width(1) / cells;
  std::vector<double> v((cells + 1) * (cells + 1));
  double p[2];
  for (int j = 0; j <= cells; ++j)
    for (int i = 0; i <= cells; ++i) {
      p[0] = box.lo[0] + i * hx;
      p[1] = box.lo[1] + j * hy;
      v[j * (cells + 1) + i] = value(std::span<const double>(p, 2)) - level;
    }
  std::vector<Segment> out;
  for (int j = 0; j < cells; ++j)
    for (int i = 0; i < cells; ++i) {
      // Corners counter-clockwise from the lower left.
      const double c[4] = {v[j * (cells + 1) + i], v[j * (cells + 1) + i + 1], v[(j + 1) * (cells + 1) + i + 1],
                           v[(j + 1) * (cells + 1) + i]};
      const double cx[4] = {0, 1, 1, 0}, cy[4] = {0, 0, 1, 1};
      double px[4], py[4];
      int n = 0;
      for (int e = 0; e < 4; ++e) {
        const double a = c[e], b = c[(e + 1) % 4];
        if ((a < 0) == (b < 0)) continue;
        const double t = a / (a - b);
        px[n] = box.lo[0] + (i + cx[e] + t * (cx[(e + 1) % 4] - cx[e])) * hx;
        py[n] = box.lo[1] + (j + cy[e] + t * (cy[(e + 1) % 4] - cy[e])) * hy;
        ++n;
      }
      if (n == 2) {
        out.push_back({px[0], py[0], px[1], py[1]});
      } else if (n == 4) {
        const bool centre_negative = (c[0] + c[1] + c[2] + c[3]) < 0;
        if (centre_negative == (c[0] < 0)) {
          out.push_back({px[0], py[0], px[1], py[1]});
          out.push_back({px[2], py[2], px[3], py[3]});
        } else {
          out.push_back({px[0], py[0], px[3], py[3]});
          out.push_back({px[1], py[1], px[2], py[2]});
        }
      }
    }
  return out;
}

}  // namespace conley
