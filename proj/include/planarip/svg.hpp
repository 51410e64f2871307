#pragma once

// SVG rendering of graphs and detections at canvas scale.

#include <cstdio>
#include <sstream>
#include <string>

#include "planarip/model.hpp"
#include "planarip/program.hpp"

namespace planarip {

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string svg_open(Canvas c) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(c.width) + "\" height=\"" +
         std::to_string(c.height) + "\" viewBox=\"0 0 " + std::to_string(c.width) + " " + std::to_string(c.height) +
         "\">\n";
}

inline std::string svg_line(Point2 a, Point2 b, const char* cls, const char* stroke, double width) {
  return "  <line class=\"" + std::string(cls) + "\" x1=\"" + svg_num(a.x) + "\" y1=\"" + svg_num(a.y) + "\" x2=\"" +
         svg_num(b.x) + "\" y2=\"" + svg_num(b.y) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + svg_num(width) +
         "\"/>\n";
}

inline std::string svg_circle(Point2 p, const char* fill) {
  return "  <circle cx=\"" + svg_num(p.x) + "\" cy=\"" + svg_num(p.y) + "\" r=\"3\" fill=\"" + fill + "\"/>\n";
}

/// One rectangle subpath per foreground run; pixel (x, y) covers
/// [x-0.5, x+0.5] x [y-0.5, y+0.5].
inline std::string mask_path(const BitMask& m) {
  std::string d;
  const auto rows = m.encode_rows();
  for (int y = 0; y < m.height(); ++y) {
    int x = 0;
    for (size_t r = 0; r < rows[y].size(); ++r) {
      if (r % 2 == 1)
        d += "M" + svg_num(x - 0.5) + " " + svg_num(y - 0.5) + "h" + std::to_string(rows[y][r]) + "v1h-" +
             std::to_string(rows[y][r]) + "z";
      x += rows[y][r];
    }
  }
  return d;
}

inline const char* region_color(size_t i) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};
  return palette[i % 7];
}

}  // namespace detail

inline std::string render_graph_svg(const PlanarGraph& g, Canvas canvas = {}) {
  std::ostringstream out;
  out << detail::svg_open(canvas);
  for (auto e : g.edges) out << detail::svg_line(g.position(e.first), g.position(e.second), "edge", "#222222", 2);
  for (const auto& v : g.vertices) out << detail::svg_circle(v.position, "#d62728");
  out << "</svg>\n";
  return out.str();
}

/// Regions as translucent fills, corners as circles. With `debug`, also the
/// enclosure rays and region-pair probes the program builder would use.
inline std::string render_detections_svg(const DetectionSet& d, bool debug = false, const BuildParams& params = {}) {
  std::ostringstream out;
  out << detail::svg_open(d.canvas);
  for (size_t i = 0; i < d.regions.size(); ++i)
    out << "  <g class=\"region\" fill=\"" << detail::region_color(i) << "\" fill-opacity=\"0.35\"><path d=\""
        << detail::mask_path(d.regions[i].mask) << "\"/></g>\n";
  if (debug) {
    const auto candidates = edge_candidates(d);
    std::vector<Segment2> segs;
    for (const auto& e : candidates) segs.push_back({d.find_corner(e.corner_a)->position, d.find_corner(e.corner_b)->position});
    for (const auto& r : d.regions)
      for (const auto& ray : cast_region_rays(r, segs, params).rays)
        out << detail::svg_line(ray.origin, ray.origin + ray.length * ray.direction, "ray", "#7f7f7f", 0.5);
    for (const auto& b : d.region_pair_boundaries)
      for (const auto& m : b.segments) {
        try {
          const Segment2 beta = beta_probe(m, params.beta_length);
          out << detail::svg_line(beta.a, beta.b, "beta", "#17becf", 1);
        } catch (const DegeneratePoints&) {
        }
      }
  }
  for (const auto& c : d.corners) out << detail::svg_circle(c.position, "#d62728");
  out << "</svg>\n";
  return out.str();
}

}  // namespace planarip
