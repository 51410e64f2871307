#pragma once

// Corner / edge / region precision, recall and F1 between predicted and
// ground-truth graphs.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "planarip/geom.hpp"
#include "planarip/model.hpp"

namespace planarip {

inline constexpr double kCornerMatchDistance = 8.0;  // inclusive
inline constexpr double kRegionMatchIou = 0.7;       // strict

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct LevelScore {
  size_t tp = 0;
  size_t pred = 0;
  size_t gt = 0;

  double precision() const { return pred == 0 ? 0.0 : static_cast<double>(tp) / pred; }
  double recall() const { return gt == 0 ? 0.0 : static_cast<double>(tp) / gt; }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
  }
  LevelScore& operator+=(const LevelScore& o) {
    tp += o.tp;
    pred += o.pred;
    gt += o.gt;
    return *this;
  }
};

struct MetricsReport {
  LevelScore corner, edge, region;

  MetricsReport& operator+=(const MetricsReport& o) {
    corner += o.corner;
    edge += o.edge;
    region += o.region;
    return *this;
  }
  /// Nine scores x100 rounded to one decimal: corner P/R/F1, edge, region.
  std::vector<double> table_row() const {
    std::vector<double> out;
    for (const LevelScore* s : {&corner, &edge, &region})
      for (double v : {s->precision(), s->recall(), s->f1()}) out.push_back(std::round(v * 1000.0) / 10.0);
    return out;
  }
};

/// Predicted vertex id -> ground-truth vertex id.
using CornerMatching = std::map<int, int>;

inline CornerMatching match_corners(const PlanarGraph& pred, const PlanarGraph& gt,
                                    double tolerance = kCornerMatchDistance) {
  std::vector<std::tuple<double, int, int>> pairs;
  for (const auto& p : pred.vertices)
    for (const auto& g : gt.vertices) {
      const double dist = distance(p.position, g.position);
      if (dist <= tolerance) pairs.push_back({dist, p.id, g.id});
    }
  std::sort(pairs.begin(), pairs.end());
  CornerMatching m;
  std::set<int> used_gt;
  for (auto [dist, p, g] : pairs) {
    if (m.count(p) || used_gt.count(g)) continue;
    m[p] = g;
    used_gt.insert(g);
  }
  return m;
}

inline size_t score_edges(const PlanarGraph& pred, const PlanarGraph& gt, const CornerMatching& m) {
  std::set<std::pair<int, int>> gt_edges;
  for (auto [a, b] : gt.edges) gt_edges.insert({std::min(a, b), std::max(a, b)});
  std::set<std::pair<int, int>> credited;
  size_t tp = 0;
  for (auto [a, b] : pred.edges) {
    auto ia = m.find(a), ib = m.find(b);
    if (ia == m.end() || ib == m.end()) continue;
    const std::pair<int, int> key{std::min(ia->second, ib->second), std::max(ia->second, ib->second)};
    if (gt_edges.count(key) && credited.insert(key).second) ++tp;
  }
  return tp;
}

struct RegionScore {
  size_t tp = 0;
  size_t pred = 0;
  size_t gt = 0;
};

inline RegionScore score_regions(const PlanarGraph& pred, const PlanarGraph& gt, Canvas canvas = {}) {
  const auto pf = enumerate_faces(pred, canvas);
  const auto gf = enumerate_faces(gt, canvas);
  std::vector<std::tuple<double, size_t, size_t>> pairs;
  for (size_t i = 0; i < pf.size(); ++i)
    for (size_t j = 0; j < gf.size(); ++j) {
      const double v = iou(pf[i].mask, gf[j].mask);
      if (v > kRegionMatchIou) pairs.push_back({v, i, j});
    }
  std::sort(pairs.begin(), pairs.end(), [](const auto& l, const auto& r) {
    if (std::get<0>(l) != std::get<0>(r)) return std::get<0>(l) > std::get<0>(r);
    return std::make_pair(std::get<1>(l), std::get<2>(l)) < std::make_pair(std::get<1>(r), std::get<2>(r));
  });
  RegionScore s{0, pf.size(), gf.size()};
  std::set<size_t> used_p, used_g;
  for (auto [v, i, j] : pairs) {
    if (used_p.count(i) || used_g.count(j)) continue;
    used_p.insert(i);
    used_g.insert(j);
    ++s.tp;
  }
  return s;
}

inline MetricsReport evaluate_one(const PlanarGraph& pred, const PlanarGraph& gt, Canvas canvas = {}) {
  MetricsReport r;
  const auto m = match_corners(pred, gt);
  r.corner = {m.size(), pred.vertices.size(), gt.vertices.size()};
  r.edge = {score_edges(pred, gt, m), pred.edges.size(), gt.edges.size()};
  const auto rs = score_regions(pred, gt, canvas);
  r.region = {rs.tp, rs.pred, rs.gt};
  return r;
}

/// Micro-averaged over the dataset: counts are summed before the ratios.
inline MetricsReport evaluate(const std::vector<PlanarGraph>& preds, const std::vector<PlanarGraph>& gts,
                              Canvas canvas = {}) {
  if (preds.size() != gts.size())
    throw LengthMismatch(std::to_string(preds.size()) + " predictions for " + std::to_string(gts.size()) +
                         " ground truths");
  MetricsReport total;
  for (size_t i = 0; i < preds.size(); ++i) total += evaluate_one(preds[i], gts[i], canvas);
  return total;
}

}  // namespace planarip
