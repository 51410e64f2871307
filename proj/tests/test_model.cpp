#include <gtest/gtest.h>

#include <random>

#include "planarip/model.hpp"
#include "support/generators.hpp"

using namespace planarip;
using planarip::testing::random_building;

namespace {

PlanarGraph grid3x3(double step = 20, double x0 = 10, double y0 = 10) {
  PlanarGraph g;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) g.vertices.push_back({r * 3 + c, {x0 + c * step, y0 + r * step}});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int v = r * 3 + c;
      if (c < 2) g.edges.push_back({v, v + 1});
      if (r < 2) g.edges.push_back({v, v + 3});
    }
  return g;
}

double hull_area(std::vector<Point2> p) {
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Point2> h(2 * p.size());
  size_t k = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  for (size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  double a = 0;
  for (size_t i = 0; i < h.size(); ++i) a += cross(h[i], h[(i + 1) % h.size()]);
  return std::abs(a) / 2;
}

BitMask face_union(const PlanarGraph& g, Canvas canvas) {
  BitMask u(canvas.width, canvas.height);
  for (const auto& f : enumerate_faces(g, canvas))
    for (Pixel p : f.mask.pixels()) u.set(p);
  return u;
}

DetectionSet small_detections() {
  DetectionSet d;
  d.canvas = {32, 32};
  d.edge_map = EdgeConfidenceMap(32, 32);
  d.corners = {{0, {4, 4}, 0.9, {}}, {1, {20, 4}, 0.8, {}}};
  return d;
}

}  // namespace

TEST(EnumerateFaces, UnitSquare) {
  const PlanarGraph g = planarip::testing::square(5, 5, 1);
  const auto faces = enumerate_faces(g);
  ASSERT_EQ(faces.size(), 1u);
  EXPECT_DOUBLE_EQ(faces[0].area, 1.0);
  EXPECT_EQ(faces[0].cycle.size(), 4u);
}

TEST(EnumerateFaces, TwoSquaresShareAnEdge) {
  const PlanarGraph g = planarip::testing::two_squares();
  const auto fs = enumerate_faces_with_adjacency(g);
  ASSERT_EQ(fs.faces.size(), 2u);
  // The shared edge {1,4} has a bounded face on both sides.
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const auto [l, r] = fs.edge_faces[e];
    if (g.edges[e] == std::pair{1, 4}) {
      EXPECT_GE(l, 0);
      EXPECT_GE(r, 0);
      EXPECT_NE(l, r);
    } else {
      EXPECT_TRUE((l == -1) != (r == -1));
    }
  }
  EXPECT_EQ(intersection_count(fs.faces[0].mask, fs.faces[1].mask), 0u);
  EXPECT_EQ(fs.faces[0].mask.count() + fs.faces[1].mask.count(), 120u * 60u);
}

TEST(EnumerateFaces, GridGraphHasFourFaces) {
  const auto faces = enumerate_faces(grid3x3());
  ASSERT_EQ(faces.size(), 4u);
  for (const auto& f : faces) {
    EXPECT_DOUBLE_EQ(f.area, 400.0);
    EXPECT_EQ(f.mask.count(), 400u);
  }
}

TEST(EnumerateFaces, RejectsInvalidGraph) {
  PlanarGraph g = planarip::testing::square(5, 5, 10);
  g.edges.push_back({0, 2});
  g.edges.push_back({1, 3});  // crossing diagonals
  EXPECT_THROW(enumerate_faces(g), InvalidGraph);
}

TEST(EnumerateFaces, EulerAndHullOnRandomBuildings) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    const PlanarGraph g = random_building(rng);
    const auto faces = enumerate_faces(g);
    EXPECT_EQ(faces.size(), g.edges.size() - g.vertices.size() + 1);
    double sum = 0;
    std::vector<Point2> pts;
    for (const auto& v : g.vertices) pts.push_back(v.position);
    for (const auto& f : faces) sum += f.area;
    EXPECT_LE(sum, hull_area(pts) + 1e-6);
    // Adjacent faces never share pixels.
    for (size_t a = 0; a < faces.size(); ++a)
      for (size_t b = a + 1; b < faces.size(); ++b) EXPECT_EQ(intersection_count(faces[a].mask, faces[b].mask), 0u);
  }
}

TEST(GraphValidation, Violations) {
  PlanarGraph g = planarip::testing::square(10, 10, 20);
  EXPECT_TRUE(graph_violations(g).empty());

  PlanarGraph dup = g;
  dup.edges.push_back({1, 0});
  EXPECT_FALSE(graph_violations(dup).empty());

  PlanarGraph loop = g;
  loop.edges.push_back({2, 2});
  EXPECT_FALSE(graph_violations(loop).empty());

  PlanarGraph close = g;
  close.vertices[1].position = {10.5, 10.2};
  EXPECT_FALSE(graph_violations(close).empty());

  PlanarGraph dangling = g;
  dangling.vertices.push_back({9, {100, 100}});
  dangling.edges.push_back({0, 9});
  EXPECT_FALSE(graph_violations(dangling).empty());
  EXPECT_THROW(validate(dangling), InvalidGraph);
}

TEST(DetectionValidation, Thresholds) {
  EXPECT_NO_THROW(validate(small_detections()));

  DetectionSet low = small_detections();
  low.corners[0].confidence = 0.1;
  EXPECT_THROW(validate(low), InvalidDetections);

  DetectionSet dup = small_detections();
  dup.corners[1].id = 0;
  EXPECT_THROW(validate(dup), InvalidDetections);

  DetectionSet weak = small_detections();
  BitMask m(32, 32);
  m.set(3, 3);
  weak.regions.push_back({0, m, 0.4});
  EXPECT_THROW(validate(weak), InvalidDetections);

  DetectionSet empty_region = small_detections();
  empty_region.regions.push_back({0, BitMask(32, 32), 0.9});
  EXPECT_THROW(validate(empty_region), InvalidDetections);

  DetectionSet bad_pair = small_detections();
  bad_pair.regions.push_back({0, m, 0.9});
  bad_pair.region_pair_boundaries.push_back({0, 7, {m}});
  EXPECT_THROW(validate(bad_pair), InvalidDetections);

  DetectionSet wrong_map = small_detections();
  wrong_map.edge_map = EdgeConfidenceMap(16, 32);
  EXPECT_THROW(validate(wrong_map), InvalidDetections);

  DetectionSet too_many = small_detections();
  for (int i = 0; i <= kMaxRegions; ++i) too_many.regions.push_back({i, m, 0.9});
  EXPECT_THROW(validate(too_many), InvalidDetections);
}

TEST(MergeColinear, NearStraightVertexRemoved) {
  // A-(0,0), B-(5,0.1), C-(10,0) as part of a larger cycle, shifted onto the canvas.
  PlanarGraph g;
  g.vertices = {{0, {20, 20}}, {1, {25, 20.1}}, {2, {30, 20}}, {3, {30, 40}}, {4, {20, 40}}};
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}};
  const PlanarGraph m = merge_colinear_corners(g);
  EXPECT_EQ(m.vertices.size(), 4u);
  EXPECT_EQ(m.find(1), nullptr);
  EXPECT_NE(std::find(m.edges.begin(), m.edges.end(), std::pair{0, 2}), m.edges.end());
  EXPECT_TRUE(graph_violations(m).empty());
}

TEST(MergeColinear, RightAngleAndDegreeThreeUnchanged) {
  const PlanarGraph sq = planarip::testing::square(10, 10, 30);
  EXPECT_EQ(merge_colinear_corners(sq), sq);
  // Vertices 1 and 4 of two squares have degree 3 with two colinear edges.
  const PlanarGraph two = planarip::testing::two_squares();
  EXPECT_EQ(merge_colinear_corners(two), two);
}

TEST(MergeColinear, ToleranceBoundary) {
  // Deviation of exactly 2·atan(h/10) degrees at the middle vertex.
  auto with_offset = [](double h) {
    PlanarGraph g;
    g.vertices = {{0, {20, 20}}, {1, {30, 20 - h}}, {2, {40, 20}}, {3, {40, 60}}, {4, {20, 60}}};
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}};
    return g;
  };
  const double h_in = 10 * std::tan(4.9 / 2 * std::numbers::pi / 180);
  const double h_out = 10 * std::tan(5.1 / 2 * std::numbers::pi / 180);
  EXPECT_EQ(merge_colinear_corners(with_offset(h_in)).vertices.size(), 4u);
  EXPECT_EQ(merge_colinear_corners(with_offset(h_out)).vertices.size(), 5u);
}

TEST(MergeColinear, IdempotentAndAreaPreservingOnRandomCases) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0, 1);
  const Canvas canvas{256, 256};
  int merged = 0;
  for (int i = 0; i < 60; ++i) {
    PlanarGraph g = random_building(rng);
    // Split one edge with a slightly displaced midpoint.
    const size_t e = rng() % g.edges.size();
    const auto [a, b] = g.edges[e];
    const Segment2 s = g.segment(g.edges[e]);
    const Point2 dir = (1.0 / s.length()) * (s.b - s.a), n{-dir.y, dir.x};
    const double dev = u(rng) * 4.0;  // degrees of total turn
    const double h = s.length() / 2 * std::tan(dev / 2 * std::numbers::pi / 180);
    const int id = 1000;
    g.vertices.push_back({id, s.midpoint() + (u(rng) < 0.5 ? h : -h) * n});
    g.edges.erase(g.edges.begin() + static_cast<long>(e));
    g.edges.push_back({a, id});
    g.edges.push_back({id, b});
    if (!graph_violations(g).empty()) continue;

    const PlanarGraph once = merge_colinear_corners(g);
    EXPECT_EQ(merge_colinear_corners(once), once);
    EXPECT_TRUE(graph_violations(once).empty());
    if (once.find(id) == nullptr) ++merged;
    EXPECT_GE(iou(face_union(g, canvas), face_union(once, canvas)), 0.99);
  }
  EXPECT_GT(merged, 40);
}

TEST(EdgeConfidence, UniformAndSplitMaps) {
  const Segment2 s{{10, 16}, {53, 16}};
  EXPECT_DOUBLE_EQ(extract_edge_confidence(EdgeConfidenceMap(64, 32, 1.0), s), 1.0);
  EXPECT_DOUBLE_EQ(extract_edge_confidence(EdgeConfidenceMap(64, 32, 0.0), s), 0.0);

  EdgeConfidenceMap half(64, 32, 0.0);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) half.set(x, y, 1.0);
  const Segment2 span{{12, 16}, {51, 16}};
  // Pixel-count oracle: fraction of strip pixels in the left half.
  int left = 0, total = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x)
      if (point_segment_distance({double(x), double(y)}, span) <= 1.0 + 1e-9) {
        ++total;
        left += x < 32;
      }
  const double c = extract_edge_confidence(half, span);
  EXPECT_DOUBLE_EQ(c, double(left) / total);
  EXPECT_NEAR(c, 0.5, 0.02);
  EXPECT_THROW(extract_edge_confidence(half, {{-10, -10}, {-5, -5}}), OffCanvas);
}

TEST(EdgeConfidence, SymmetricUnderEndpointSwap) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1), c(0, 63);
  EdgeConfidenceMap m(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) m.set(x, y, u(rng));
  for (int i = 0; i < 200; ++i) {
    const Point2 a{c(rng), c(rng)}, b{c(rng), c(rng)};
    if (distance(a, b) < 1) continue;
    EXPECT_DOUBLE_EQ(extract_edge_confidence(m, {a, b}), extract_edge_confidence(m, {b, a}));
  }
}

TEST(EdgeCandidates, OnePerPairInIdOrder) {
  DetectionSet d;
  d.canvas = {64, 64};
  d.edge_map = EdgeConfidenceMap(64, 64, 0.5);
  d.corners = {{7, {10, 10}, 0.9, {}}, {2, {50, 10}, 0.9, {}}, {5, {30, 40}, 0.9, {}}};
  const auto cs = edge_candidates(d);
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(std::pair(cs[0].corner_a, cs[0].corner_b), std::pair(2, 5));
  EXPECT_EQ(std::pair(cs[1].corner_a, cs[1].corner_b), std::pair(2, 7));
  EXPECT_EQ(std::pair(cs[2].corner_a, cs[2].corner_b), std::pair(5, 7));
  for (size_t i = 0; i < cs.size(); ++i) {
    EXPECT_EQ(cs[i].id, static_cast<int>(i));
    EXPECT_DOUBLE_EQ(cs[i].confidence, 0.5);
  }
}

TEST(FeatureConfig, DependencyOrder) {
  EXPECT_TRUE(FeatureConfig::all().consistent());
  EXPECT_TRUE(FeatureConfig::edges_only().consistent());
  EXPECT_FALSE((FeatureConfig{false, true, false, false}.consistent()));
  EXPECT_FALSE((FeatureConfig{false, false, false, true}.consistent()));
}
