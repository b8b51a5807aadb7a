#include "conley/plot.hpp"

#include <ostream>
#include <stdexcept>

namespace conley {

namespace {

struct Frame {
  Box box;
  double scale, height;
  double sx(double x) const { return (x - box.lo[0]) * scale; }
  double sy(double y) const { return height - (y - box.lo[1]) * scale; }
};

void write_path(std::ostream& os, const Frame& fr, const std::vector<Segment>& segs, const char* style) {
  if (segs.empty()) return;
  os << "<path " << style << " d=\"";
  for (const auto& s : segs) os << 'M' << fr.sx(s.x0) << ' ' << fr.sy(s.y0) << 'L' << fr.sx(s.x1) << ' ' << fr.sy(s.y1);
  os << "\"/>\n";
}

}  // namespace

void write_figure_svg(std::ostream& os, const IndexPairSpec& spec, const PointSamplePair* points,
                      const FigureOptions& opts) {
  if (spec.dim() != 2) throw std::invalid_argument("figures are drawn for 2-dimensional specs only");
  const Box& box = spec.region.box;
  Frame fr{box, opts.width_px / box.width(0), opts.width_px / box.width(0) * box.width(1)};
  const int n = opts.resolution;
  const double hx = box.width(0) / n, hy = box.width(1) / n;

  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width_px << "\" height=\"" << fr.height
     << "\" viewBox=\"0 0 " << opts.width_px << ' ' << fr.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Shading: one rect per horizontal run of equal labels.
  static const char* fills[3] = {nullptr, "#9ecae1", "#fdae6b"};
  os << "<g shape-rendering=\"crispEdges\">\n";
  double p[2];
  for (int j = 0; j < n; ++j) {
    p[1] = box.lo[1] + (j + 0.5) * hy;
    int run_start = 0;
    PairLabel run = PairLabel::Outside;
    for (int i = 0; i <= n; ++i) {
      PairLabel label = PairLabel::Outside;
      if (i < n) {
        p[0] = box.lo[0] + (i + 0.5) * hx;
        label = classify_point(spec, std::span<const double>(p, 2));
      }
      if (i == n || label != run) {
        if (run != PairLabel::Outside)
          os << "<rect x=\"" << fr.sx(box.lo[0] + run_start * hx) << "\" y=\"" << fr.sy(box.lo[1] + (j + 1) * hy)
             << "\" width=\"" << (i - run_start) * hx * fr.scale << "\" height=\"" << hy * fr.scale << "\" fill=\""
             << fills[static_cast<int>(run)] << "\"/>\n";
        run = label;
        run_start = i;
      }
    }
  }

  os << "</g>\n";

  if (opts.contours) {
    const auto f = [&](std::span<const double> x) { return spec.f.value(x); };
    const auto h = [&](std::span<const double> x) { return perturbation_value(spec, x); };
    const auto g = [&](std::span<const double> x) { return spec.g.value(x); };
    write_path(os, fr, contour_segments(f, box, n, spec.alpha), R"(fill="none" stroke="black" stroke-width="1.2")");
    write_path(os, fr, contour_segments(h, box, n, spec.beta), R"(fill="none" stroke="#d62728" stroke-width="1")");
    write_path(os, fr, contour_segments(h, box, n, spec.gamma), R"(fill="none" stroke="#d62728" stroke-dasharray="4 2")");
    write_path(os, fr, contour_segments(g, box, n, spec.r0), R"(fill="none" stroke="#2ca02c" stroke-dasharray="2 2")");
    write_path(os, fr, contour_segments(g, box, n, spec.r1), R"(fill="none" stroke="#2ca02c" stroke-dasharray="6 3")");
  }

  if (points) {
    for (std::size_t i = 0; i < points->size(); ++i) {
      const auto& q = points->points[i];
      os << "<circle cx=\"" << fr.sx(q[0]) << "\" cy=\"" << fr.sy(q[1]) << "\" r=\"1.6\" fill=\""
         << (points->in_minus[i] ? "#a63603" : "#08519c") << "\"/>\n";
    }
  }

  os << "<rect width=\"" << opts.width_px << "\" height=\"" << fr.height
     << R"(" fill="none" stroke="#444" stroke-width="1"/>)" << "\n</svg>\n";
}

}  // namespace conley
