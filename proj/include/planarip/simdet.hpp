#pragma once

// Synthetic detector: turns a ground-truth graph into noisy detections with
// the same shape as the CNN outputs the assembler consumes.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "planarip/geom.hpp"
#include "planarip/model.hpp"

namespace planarip {

struct GraphOffCanvas : std::runtime_error {
  GraphOffCanvas() : std::runtime_error("ground-truth graph does not fit the canvas") {}
};

struct NoiseConfig {
  uint64_t seed = 0;
  double corner_jitter_sigma = 1.0;
  double corner_drop_rate = 0.0;
  double spurious_corner_rate = 0.0;
  std::pair<double, double> true_corner_conf_range{0.8, 1.0};
  std::pair<double, double> false_corner_conf_range{0.2, 0.5};
  double edge_map_fg = 0.9;
  double edge_map_bg = 0.05;
  double edge_map_noise_sigma = 0.05;
  double dir_bin_true_conf = 0.9;
  double dir_bin_false_conf = 0.05;
  int region_erode_px = 0;
  double rr_boundary_drop_rate = 0.0;

  /// No noise at all: detections reproduce the ground truth exactly.
  static NoiseConfig clean(uint64_t seed = 0) {
    NoiseConfig c;
    c.seed = seed;
    c.corner_jitter_sigma = 0.0;
    c.true_corner_conf_range = {1.0, 1.0};
    c.edge_map_fg = 1.0;
    c.edge_map_bg = 0.0;
    c.edge_map_noise_sigma = 0.0;
    c.dir_bin_true_conf = 1.0;
    c.dir_bin_false_conf = 0.0;
    return c;
  }

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    auto range = [&](std::pair<double, double> r) { return unit(r.first) && unit(r.second) && r.first <= r.second; };
    if (!(corner_jitter_sigma >= 0 && edge_map_noise_sigma >= 0 && spurious_corner_rate >= 0 && region_erode_px >= 0))
      throw std::invalid_argument("noise magnitudes must be non-negative");
    if (!unit(corner_drop_rate) || !unit(edge_map_fg) || !unit(edge_map_bg) || !unit(dir_bin_true_conf) ||
        !unit(dir_bin_false_conf) || !unit(rr_boundary_drop_rate))
      throw std::invalid_argument("rates must lie in [0,1]");
    if (!range(true_corner_conf_range) || !range(false_corner_conf_range) ||
        true_corner_conf_range.first < kCornerThreshold || false_corner_conf_range.first < kCornerThreshold)
      throw std::invalid_argument("confidence ranges must lie in [0.2,1]");
  }
};

/// Edge-map values live on a fixed grid so file round trips are exact.
inline constexpr double kEdgeMapScale = 1e6;
inline double quantize_edge_value(double v) { return std::round(std::clamp(v, 0.0, 1.0) * kEdgeMapScale) / kEdgeMapScale; }

namespace detail {

enum class Stream : uint64_t { Drop = 1, Jitter, CornerConf, Spurious, SpuriousPlace, EdgeMap, RrDrop };

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator per (seed, stream, entity, attempt).
inline std::mt19937_64 keyed_rng(uint64_t seed, Stream s, int64_t entity, int attempt = 0) {
  uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ static_cast<uint64_t>(s));
  k = splitmix64(k ^ static_cast<uint64_t>(entity));
  k = splitmix64(k ^ static_cast<uint64_t>(attempt));
  return std::mt19937_64(k);
}

inline double uniform(std::mt19937_64& rng, std::pair<double, double> r) {
  if (r.first == r.second) return r.first;
  return std::uniform_real_distribution<double>(r.first, r.second)(rng);
}

}  // namespace detail

inline DetectionSet simulate(const PlanarGraph& gt, const NoiseConfig& cfg, Canvas canvas = {}) {
  cfg.validate();
  validate(gt);
  for (const auto& v : gt.vertices)
    if (v.position.x < 0 || v.position.y < 0 || v.position.x >= canvas.width || v.position.y >= canvas.height)
      throw GraphOffCanvas();

  DetectionSet d;
  d.canvas = canvas;
  const double margin = 2.0;
  auto clamp_inside = [&](Point2 p) {
    return Point2{std::clamp(p.x, margin, canvas.width - 1 - margin), std::clamp(p.y, margin, canvas.height - 1 - margin)};
  };
  auto too_close = [&](Point2 p, double min_dist) {
    for (const auto& c : d.corners)
      if (distance(c.position, p) < min_dist) return true;
    return false;
  };

  // Jittered positions for every ground-truth vertex, dropped or not.
  std::map<int, Point2> jittered;
  for (const auto& v : gt.vertices) {
    Point2 p = v.position;
    for (int attempt = 0; attempt < 16; ++attempt) {
      auto rng = detail::keyed_rng(cfg.seed, detail::Stream::Jitter, v.id, attempt);
      Point2 q = v.position;
      if (cfg.corner_jitter_sigma > 0) {
        std::normal_distribution<double> n(0.0, cfg.corner_jitter_sigma);
        q.x += n(rng);
        q.y += n(rng);
      }
      p = clamp_inside(q);
      bool clash = false;
      for (const auto& [id, other] : jittered)
        if (distance(other, p) < 1.0) clash = true;
      if (!clash) break;
    }
    jittered[v.id] = p;
  }

  std::map<int, std::vector<int>> neighbors;
  for (auto [a, b] : gt.edges) {
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
  }

  int max_id = -1;
  for (const auto& v : gt.vertices) {
    max_id = std::max(max_id, v.id);
    auto drop_rng = detail::keyed_rng(cfg.seed, detail::Stream::Drop, v.id);
    if (std::uniform_real_distribution<double>(0.0, 1.0)(drop_rng) < cfg.corner_drop_rate) continue;
    const Point2 p = jittered[v.id];
    if (too_close(p, 1.0)) continue;
    auto conf_rng = detail::keyed_rng(cfg.seed, detail::Stream::CornerConf, v.id);
    CornerDetection c;
    c.id = v.id;
    c.position = p;
    c.confidence = detail::uniform(conf_rng, cfg.true_corner_conf_range);
    c.direction_bins.fill(cfg.dir_bin_false_conf);
    for (int u : neighbors[v.id]) c.direction_bins[bin_direction(direction_degrees(p, jittered[u]))] = cfg.dir_bin_true_conf;
    d.corners.push_back(c);
  }

  {
    auto count_rng = detail::keyed_rng(cfg.seed, detail::Stream::Spurious, 0);
    const int count = cfg.spurious_corner_rate > 0
                          ? std::poisson_distribution<int>(cfg.spurious_corner_rate)(count_rng)
                          : 0;
    for (int k = 0; k < count; ++k) {
      for (int attempt = 0; attempt < 32; ++attempt) {
        auto rng = detail::keyed_rng(cfg.seed, detail::Stream::SpuriousPlace, k, attempt);
        const Point2 p{std::uniform_real_distribution<double>(margin, canvas.width - 1 - margin)(rng),
                       std::uniform_real_distribution<double>(margin, canvas.height - 1 - margin)(rng)};
        if (too_close(p, 2.0)) continue;
        CornerDetection c;
        c.id = max_id + 1 + k;
        c.position = p;
        c.confidence = detail::uniform(rng, cfg.false_corner_conf_range);
        c.direction_bins.fill(cfg.dir_bin_false_conf);
        d.corners.push_back(c);
        break;
      }
    }
  }

  // Edge map: ground-truth strokes over background plus clamped noise.
  d.edge_map = EdgeConfidenceMap(canvas.width, canvas.height, cfg.edge_map_bg);
  for (auto e : gt.edges)
    for (Pixel p : rasterize_segment(gt.segment(e), kEdgeStripWidth, canvas)) d.edge_map.set(p.x, p.y, cfg.edge_map_fg);
  {
    auto rng = detail::keyed_rng(cfg.seed, detail::Stream::EdgeMap, 0);
    std::normal_distribution<double> n(0.0, cfg.edge_map_noise_sigma > 0 ? cfg.edge_map_noise_sigma : 1.0);
    for (int y = 0; y < canvas.height; ++y)
      for (int x = 0; x < canvas.width; ++x) {
        double v = d.edge_map.at(x, y);
        if (cfg.edge_map_noise_sigma > 0) v += n(rng);
        d.edge_map.set(x, y, quantize_edge_value(v));
      }
  }

  // Regions are the ground-truth faces; boundaries are their shared edges.
  const FaceSet faces = enumerate_faces_with_adjacency(gt, canvas);
  for (size_t i = 0; i < faces.faces.size(); ++i) {
    BitMask m = erode(faces.faces[i].mask, cfg.region_erode_px);
    if (m.empty()) continue;
    d.regions.push_back({static_cast<int>(i), std::move(m), 1.0});
  }
  std::map<std::pair<int, int>, std::vector<BitMask>> shared;
  for (size_t e = 0; e < gt.edges.size(); ++e) {
    auto [fa, fb] = faces.edge_faces[e];
    if (fa < 0 || fb < 0 || fa == fb) continue;
    if (!d.find_region(fa) || !d.find_region(fb)) continue;
    auto rng = detail::keyed_rng(cfg.seed, detail::Stream::RrDrop, static_cast<int64_t>(e));
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.rr_boundary_drop_rate) continue;
    BitMask m = rasterize_segment_mask(gt.segment(gt.edges[e]), kEdgeStripWidth, canvas);
    if (m.empty()) continue;
    shared[{std::min(fa, fb), std::max(fa, fb)}].push_back(std::move(m));
  }
  for (auto& [key, masks] : shared) d.region_pair_boundaries.push_back({key.first, key.second, std::move(masks)});
  return d;
}

}  // namespace planarip
