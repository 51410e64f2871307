#pragma once

// Detection and graph data model, face enumeration, colinear corner merging.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "planarip/geom.hpp"

namespace planarip {

inline constexpr double kCornerThreshold = 0.2;
inline constexpr double kRegionThreshold = 0.5;
inline constexpr int kMaxRegions = 100;

struct InvalidGraph : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidDetections : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OffCanvas : std::runtime_error {
  OffCanvas() : std::runtime_error("segment rasterization is empty") {}
};

struct CornerDetection {
  int id = 0;
  Point2 position;
  double confidence = 0.0;
  std::array<double, kDirectionBins> direction_bins{};
  friend bool operator==(const CornerDetection&, const CornerDetection&) = default;
};

/// Per-pixel edge confidence in [0, 1], row-major.
class EdgeConfidenceMap {
 public:
  EdgeConfidenceMap() = default;
  EdgeConfidenceMap(int width, int height, double fill = 0.0)
      : width_(width), height_(height), values_(static_cast<size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Canvas canvas() const { return {width_, height_}; }
  double at(int x, int y) const { return values_[static_cast<size_t>(y) * width_ + x]; }
  double at(Pixel p) const { return at(p.x, p.y); }
  void set(int x, int y, double v) { values_[static_cast<size_t>(y) * width_ + x] = v; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const EdgeConfidenceMap&, const EdgeConfidenceMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

struct EdgeCandidate {
  int id = 0;
  int corner_a = 0;  // smaller corner id
  int corner_b = 0;
  double confidence = 0.0;
};

struct RegionDetection {
  int id = 0;
  BitMask mask;
  double confidence = 1.0;
  friend bool operator==(const RegionDetection&, const RegionDetection&) = default;
};

struct RegionPairBoundary {
  int region_a = 0;
  int region_b = 0;
  std::vector<BitMask> segments;
  friend bool operator==(const RegionPairBoundary&, const RegionPairBoundary&) = default;
};

struct DetectionSet {
  Canvas canvas;
  std::vector<CornerDetection> corners;
  EdgeConfidenceMap edge_map;
  std::vector<RegionDetection> regions;
  std::vector<RegionPairBoundary> region_pair_boundaries;

  const CornerDetection* find_corner(int id) const {
    for (const auto& c : corners)
      if (c.id == id) return &c;
    return nullptr;
  }
  const RegionDetection* find_region(int id) const {
    for (const auto& r : regions)
      if (r.id == id) return &r;
    return nullptr;
  }

  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

/// Checks every DetectionSet invariant; throws InvalidDetections.
inline void validate(const DetectionSet& d) {
  auto fail = [](const std::string& what) { throw InvalidDetections(what); };
  if (d.canvas.width <= 0 || d.canvas.height <= 0) fail("canvas must be non-empty");
  if (d.edge_map.width() != d.canvas.width || d.edge_map.height() != d.canvas.height)
    fail("edge map dimensions do not match canvas");
  for (double v : d.edge_map.values())
    if (!(v >= 0.0 && v <= 1.0)) fail("edge map value outside [0,1]");
  std::set<int> ids;
  for (const auto& c : d.corners) {
    if (!ids.insert(c.id).second) fail("duplicate corner id " + std::to_string(c.id));
    if (!std::isfinite(c.position.x) || !std::isfinite(c.position.y) || c.position.x < 0 || c.position.y < 0 ||
        c.position.x >= d.canvas.width || c.position.y >= d.canvas.height)
      fail("corner " + std::to_string(c.id) + " off canvas");
    if (!(c.confidence >= kCornerThreshold && c.confidence <= 1.0))
      fail("corner " + std::to_string(c.id) + " confidence below threshold");
    for (double b : c.direction_bins)
      if (!(b >= 0.0 && b <= 1.0)) fail("direction confidence outside [0,1]");
  }
  for (size_t i = 0; i < d.corners.size(); ++i)
    for (size_t j = i + 1; j < d.corners.size(); ++j)
      if (distance(d.corners[i].position, d.corners[j].position) < 1.0)
        fail("corners " + std::to_string(d.corners[i].id) + " and " + std::to_string(d.corners[j].id) +
             " closer than 1 px");
  if (static_cast<int>(d.regions.size()) > kMaxRegions) fail("too many regions");
  std::set<int> rids;
  for (const auto& r : d.regions) {
    if (!rids.insert(r.id).second) fail("duplicate region id " + std::to_string(r.id));
    if (!(r.confidence >= kRegionThreshold && r.confidence <= 1.0)) fail("region confidence below threshold");
    if (r.mask.canvas() != d.canvas) fail("region mask dimensions do not match canvas");
    if (r.mask.empty()) fail("empty region mask");
  }
  for (const auto& b : d.region_pair_boundaries) {
    if (!rids.count(b.region_a) || !rids.count(b.region_b) || b.region_a == b.region_b)
      fail("region pair boundary references unknown or identical regions");
    for (const auto& m : b.segments) {
      if (m.canvas() != d.canvas) fail("boundary mask dimensions do not match canvas");
      if (m.empty()) fail("empty boundary mask");
    }
  }
}

struct Vertex {
  int id = 0;
  Point2 position;
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

struct PlanarGraph {
  std::vector<Vertex> vertices;
  std::vector<std::pair<int, int>> edges;  // vertex ids

  const Vertex* find(int id) const {
    for (const auto& v : vertices)
      if (v.id == id) return &v;
    return nullptr;
  }
  Point2 position(int id) const {
    const Vertex* v = find(id);
    if (!v) throw InvalidGraph("unknown vertex " + std::to_string(id));
    return v->position;
  }
  Segment2 segment(std::pair<int, int> e) const { return {position(e.first), position(e.second)}; }
  bool empty() const { return vertices.empty() && edges.empty(); }

  friend bool operator==(const PlanarGraph&, const PlanarGraph&) = default;
};

/// Human-readable list of invariant violations; empty when valid.
inline std::vector<std::string> graph_violations(const PlanarGraph& g) {
  std::vector<std::string> out;
  std::unordered_map<int, size_t> index;
  for (size_t i = 0; i < g.vertices.size(); ++i) {
    const auto& v = g.vertices[i];
    if (!index.emplace(v.id, i).second) out.push_back("duplicate vertex id " + std::to_string(v.id));
    if (!std::isfinite(v.position.x) || !std::isfinite(v.position.y))
      out.push_back("non-finite vertex " + std::to_string(v.id));
  }
  for (size_t i = 0; i < g.vertices.size(); ++i)
    for (size_t j = i + 1; j < g.vertices.size(); ++j)
      if (distance(g.vertices[i].position, g.vertices[j].position) < 1.0)
        out.push_back("vertices " + std::to_string(g.vertices[i].id) + " and " + std::to_string(g.vertices[j].id) +
                      " closer than 1 px");
  std::set<std::pair<int, int>> seen;
  std::unordered_map<int, int> degree;
  bool refs_ok = true;
  for (auto [a, b] : g.edges) {
    if (a == b) out.push_back("self-loop at " + std::to_string(a));
    if (!index.count(a) || !index.count(b)) {
      out.push_back("edge references unknown vertex");
      refs_ok = false;
      continue;
    }
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
      out.push_back("duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
    ++degree[a];
    ++degree[b];
  }
  for (const auto& v : g.vertices)
    if (degree[v.id] < 2) out.push_back("vertex " + std::to_string(v.id) + " has degree < 2");
  if (refs_ok) {
    for (size_t i = 0; i < g.edges.size(); ++i)
      for (size_t j = i + 1; j < g.edges.size(); ++j)
        if (segments_properly_intersect(g.segment(g.edges[i]), g.segment(g.edges[j])))
          out.push_back("edges " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
  }
  return out;
}

inline void validate(const PlanarGraph& g) {
  const auto v = graph_violations(g);
  if (!v.empty()) throw InvalidGraph(v.front());
}

/// Ablation switches. Edges are always used.
struct FeatureConfig {
  bool use_corners = true;       // P_C
  bool use_ce_relations = true;  // R_CE
  bool use_regions = true;       // P_R
  bool use_rr_relations = true;  // R_RR

  static FeatureConfig edges_only() { return {false, false, false, false}; }
  static FeatureConfig all() { return {}; }

  bool consistent() const { return (!use_ce_relations || use_corners) && (!use_rr_relations || use_regions); }
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

// ---------------------------------------------------------------------------
// Faces

/// Fills pixels whose centers fall inside the polygon, with half-open
/// crossing rules so polygons sharing an edge never share a pixel.
inline BitMask rasterize_polygon(std::span<const Point2> poly, Canvas canvas) {
  BitMask m(canvas.width, canvas.height);
  const size_t n = poly.size();
  if (n < 3) return m;
  double ymin = poly[0].y, ymax = poly[0].y;
  for (Point2 p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::ceil(ymin)));
  const int y1 = std::min(canvas.height - 1, static_cast<int>(std::floor(ymax)));
  std::vector<double> xs;
  for (int y = y0; y <= y1; ++y) {
    xs.clear();
    for (size_t i = 0; i < n; ++i) {
      const Point2 a = poly[i], b = poly[(i + 1) % n];
      if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int xa = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int xb = std::min(canvas.width, static_cast<int>(std::ceil(xs[k + 1])));
      for (int x = xa; x < xb; ++x) m.set(x, y);
    }
  }
  return m;
}

inline double signed_area(std::span<const Point2> poly) {
  double a = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

struct Face {
  std::vector<int> cycle;       // vertex ids
  std::vector<int> edges;       // indices into PlanarGraph::edges, parallel to cycle
  double area = 0.0;            // polygon area of the cycle
  BitMask mask;
};

struct FaceSet {
  std::vector<Face> faces;
  /// For each graph edge, the bounded faces on either side (-1 for the
  /// unbounded side).
  std::vector<std::pair<int, int>> edge_faces;
};

/// Bounded faces of the embedding, by half-edge traversal. Pixels covered by
/// more than one face polygon (nested components) go to the smallest face.
inline FaceSet enumerate_faces_with_adjacency(const PlanarGraph& g, Canvas canvas = {}) {
  validate(g);
  FaceSet out;
  const size_t ne = g.edges.size();
  out.edge_faces.assign(ne, {-1, -1});
  if (ne == 0) return out;

  // Outgoing half-edges per vertex, sorted by angle then edge id.
  struct Out {
    double angle;
    int edge;
    int to;
  };
  std::unordered_map<int, std::vector<Out>> around;
  for (size_t e = 0; e < ne; ++e) {
    const auto [a, b] = g.edges[e];
    const Point2 pa = g.position(a), pb = g.position(b);
    around[a].push_back({std::atan2(pb.y - pa.y, pb.x - pa.x), static_cast<int>(e), b});
    around[b].push_back({std::atan2(pa.y - pb.y, pa.x - pb.x), static_cast<int>(e), a});
  }
  for (auto& [v, outs] : around)
    std::sort(outs.begin(), outs.end(), [](const Out& l, const Out& r) {
      return l.angle != r.angle ? l.angle < r.angle : l.edge < r.edge;
    });

  // Half-edge h = 2e (first->second) or 2e+1 (second->first).
  auto tail = [&](int h) { return h % 2 == 0 ? g.edges[h / 2].first : g.edges[h / 2].second; };
  auto head = [&](int h) { return h % 2 == 0 ? g.edges[h / 2].second : g.edges[h / 2].first; };
  auto next = [&](int h) {
    const int v = head(h), u = tail(h);
    const auto& outs = around[v];
    size_t pos = 0;
    for (; pos < outs.size(); ++pos)
      if (outs[pos].edge == h / 2 && outs[pos].to == u) break;
    // Predecessor in angular order: the face stays on the left.
    const Out& o = outs[(pos + outs.size() - 1) % outs.size()];
    return g.edges[o.edge].first == v ? 2 * o.edge : 2 * o.edge + 1;
  };

  std::vector<int> face_of(2 * ne, -2);
  std::vector<Face> raw;
  std::vector<bool> bounded;
  for (int h0 = 0; h0 < static_cast<int>(2 * ne); ++h0) {
    if (face_of[h0] != -2) continue;
    Face f;
    std::vector<int> hs;
    int h = h0;
    do {
      face_of[h] = static_cast<int>(raw.size());
      hs.push_back(h);
      f.cycle.push_back(tail(h));
      f.edges.push_back(h / 2);
      h = next(h);
    } while (h != h0);
    std::vector<Point2> poly;
    for (int v : f.cycle) poly.push_back(g.position(v));
    const double a = signed_area(poly);
    f.area = std::abs(a);
    bounded.push_back(a > kEps);
    raw.push_back(std::move(f));
  }

  std::vector<int> remap(raw.size(), -1);
  for (size_t i = 0; i < raw.size(); ++i) {
    if (!bounded[i]) continue;
    remap[i] = static_cast<int>(out.faces.size());
    out.faces.push_back(std::move(raw[i]));
  }
  for (size_t e = 0; e < ne; ++e) out.edge_faces[e] = {remap[face_of[2 * e]], remap[face_of[2 * e + 1]]};

  // Rasterize, resolving overlaps toward the smaller face.
  std::vector<size_t> order(out.faces.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t l, size_t r) { return out.faces[l].area < out.faces[r].area; });
  BitMask taken(canvas.width, canvas.height);
  for (size_t i : order) {
    std::vector<Point2> poly;
    for (int v : out.faces[i].cycle) poly.push_back(g.position(v));
    BitMask m = rasterize_polygon(poly, canvas);
    for (int y = 0; y < canvas.height; ++y)
      for (int x = 0; x < canvas.width; ++x)
        if (m.get(x, y)) {
          if (taken.get(x, y)) m.set(x, y, false);
          else taken.set(x, y);
        }
    out.faces[i].mask = std::move(m);
  }
  return out;
}

inline std::vector<Face> enumerate_faces(const PlanarGraph& g, Canvas canvas = {}) {
  return enumerate_faces_with_adjacency(g, canvas).faces;
}

// ---------------------------------------------------------------------------
// Post-processing

inline constexpr double kColinearToleranceDeg = 5.0;

namespace detail {

inline double turn_deviation(Point2 a, Point2 b, Point2 c) {
  const Point2 u = a - b, v = c - b;
  const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / std::numbers::pi;
  return 180.0 - ang;
}

}  // namespace detail

/// Removes degree-2 vertices whose incident edges are within the tolerance
/// of straight, joining their neighbors, until nothing changes. A merge that
/// would duplicate an edge or create a crossing is skipped.
inline PlanarGraph merge_colinear_corners(const PlanarGraph& input, double tolerance_deg = kColinearToleranceDeg) {
  PlanarGraph g = input;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> ids;
    for (const auto& v : g.vertices) ids.push_back(v.id);
    std::sort(ids.begin(), ids.end());
    for (int id : ids) {
      std::vector<size_t> inc;
      for (size_t e = 0; e < g.edges.size(); ++e)
        if (g.edges[e].first == id || g.edges[e].second == id) inc.push_back(e);
      if (inc.size() != 2) continue;
      auto other = [&](size_t e) { return g.edges[e].first == id ? g.edges[e].second : g.edges[e].first; };
      const int a = other(inc[0]), c = other(inc[1]);
      if (a == c) continue;
      const Point2 pa = g.position(a), pb = g.position(id), pc = g.position(c);
      if (!(detail::turn_deviation(pa, pb, pc) < tolerance_deg)) continue;
      bool ok = true;
      for (size_t e = 0; e < g.edges.size() && ok; ++e) {
        if (e == inc[0] || e == inc[1]) continue;
        const auto [x, y] = g.edges[e];
        if ((x == a && y == c) || (x == c && y == a)) ok = false;
        else if (segments_properly_intersect({pa, pc}, g.segment(g.edges[e]))) ok = false;
      }
      for (const auto& v : g.vertices)
        if (ok && v.id != a && v.id != c && v.id != id && point_segment_distance(v.position, {pa, pc}) < 1.0)
          ok = false;
      if (!ok) continue;
      std::vector<std::pair<int, int>> edges;
      for (size_t e = 0; e < g.edges.size(); ++e)
        if (e != inc[0] && e != inc[1]) edges.push_back(g.edges[e]);
      edges.push_back({std::min(a, c), std::max(a, c)});
      g.edges = std::move(edges);
      std::erase_if(g.vertices, [&](const Vertex& v) { return v.id == id; });
      changed = true;
      break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Edge evidence

inline constexpr double kEdgeStripWidth = 2.0;

/// Mean edge-map value over the width-2 strip of the segment.
inline double extract_edge_confidence(const EdgeConfidenceMap& map, const Segment2& s) {
  const auto px = rasterize_segment(s, kEdgeStripWidth, map.canvas());
  if (px.empty()) throw OffCanvas();
  double sum = 0.0;
  for (Pixel p : px) sum += map.at(p);
  return sum / static_cast<double>(px.size());
}

/// One candidate per unordered corner pair at least 1 px apart, ordered by
/// (smaller id, larger id).
inline std::vector<EdgeCandidate> edge_candidates(const DetectionSet& d) {
  std::vector<const CornerDetection*> cs;
  for (const auto& c : d.corners) cs.push_back(&c);
  std::sort(cs.begin(), cs.end(), [](auto* l, auto* r) { return l->id < r->id; });
  std::vector<EdgeCandidate> out;
  for (size_t i = 0; i < cs.size(); ++i)
    for (size_t j = i + 1; j < cs.size(); ++j) {
      const Segment2 s{cs[i]->position, cs[j]->position};
      if (s.length() < 1.0) continue;
      double conf = 0.0;
      try {
        conf = extract_edge_confidence(d.edge_map, s);
      } catch (const OffCanvas&) {
        continue;
      }
      out.push_back({static_cast<int>(out.size()), cs[i]->id, cs[j]->id, conf});
    }
  return out;
}

}  // namespace planarip
