#pragma once

// Linear 0-1 program over primitive indicators, built from a DetectionSet.
//
// Variables: I_cor per corner, I_edg per candidate edge, I_reg per region,
// I_dir per (corner, direction bin) and continuous slacks for softened rows.
// Objective (maximized):
//   sum_e (e_conf c'_conf c''_conf - 0.5^3) I_edg(e)     [e_conf - 0.5 without corners]
//   + 0.1 sum_{c,bin} (bin_conf c_conf - 0.5^2) I_dir(c, bin)
//   + sum_r I_reg(r)  -  sum lambda * slack

#include <algorithm>
#include <compare>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "planarip/geom.hpp"
#include "planarip/model.hpp"

namespace planarip {

enum class VarKind { Corner, Edge, Region, Direction, SlackUp, SlackLo };

/// Identity of a program variable. Keys: corner id (a); edge corner ids
/// (a < b); region id (a); direction (corner id a, bin b); slack group (a).
struct VarRef {
  VarKind kind = VarKind::Corner;
  int a = 0;
  int b = 0;

  static VarRef corner(int id) { return {VarKind::Corner, id, 0}; }
  static VarRef edge(int c1, int c2) { return {VarKind::Edge, std::min(c1, c2), std::max(c1, c2)}; }
  static VarRef region(int id) { return {VarKind::Region, id, 0}; }
  static VarRef direction(int corner, int bin) { return {VarKind::Direction, corner, bin}; }
  static VarRef slack_up(int k) { return {VarKind::SlackUp, k, 0}; }
  static VarRef slack_lo(int k) { return {VarKind::SlackLo, k, 0}; }

  bool is_slack() const { return kind == VarKind::SlackUp || kind == VarKind::SlackLo; }

  friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

/// Stable textual name, shared with the LP writer.
inline std::string var_name(const VarRef& v) {
  switch (v.kind) {
    case VarKind::Corner: return "c_" + std::to_string(v.a);
    case VarKind::Edge: return "e_" + std::to_string(v.a) + "_" + std::to_string(v.b);
    case VarKind::Region: return "r_" + std::to_string(v.a);
    case VarKind::Direction: return "d_" + std::to_string(v.a) + "_b" + std::to_string(v.b);
    case VarKind::SlackUp: return "su_" + std::to_string(v.a);
    case VarKind::SlackLo: return "sl_" + std::to_string(v.a);
  }
  return {};
}

enum class Relation { LessEqual, Equal, GreaterEqual };

enum class Family {
  TopologyEndpoint,
  TopologyDegree,
  TopologyPlanarity,
  RegionNoncross,
  RegionEnclose,
  RegionRegion,
  CeBin,
  CePrune,
};

inline constexpr Family kAllFamilies[] = {Family::TopologyEndpoint, Family::TopologyDegree, Family::TopologyPlanarity,
                                          Family::RegionNoncross,   Family::RegionEnclose,  Family::RegionRegion,
                                          Family::CeBin,            Family::CePrune};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::TopologyEndpoint: return "topology_endpoint";
    case Family::TopologyDegree: return "topology_degree";
    case Family::TopologyPlanarity: return "topology_planarity";
    case Family::RegionNoncross: return "region_noncross";
    case Family::RegionEnclose: return "region_enclose";
    case Family::RegionRegion: return "region_region";
    case Family::CeBin: return "ce_bin";
    case Family::CePrune: return "ce_prune";
  }
  return "";
}

inline bool is_topology(Family f) {
  return f == Family::TopologyEndpoint || f == Family::TopologyDegree || f == Family::TopologyPlanarity;
}

struct Term {
  double coef = 0.0;
  VarRef var;
  friend bool operator==(const Term&, const Term&) = default;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  Family family = Family::TopologyEndpoint;
  bool softened = false;

  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

struct Variable {
  VarRef ref;
  bool binary = true;
  double upper = 1.0;  // lower bound is always 0
  friend bool operator==(const Variable&, const Variable&) = default;
};

struct UnknownVariable : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Maximization program. Binary variables precede slack variables.
class BinaryProgram {
 public:
  int add_binary(VarRef ref, double objective = 0.0) { return add(ref, true, 1.0, objective); }
  int add_slack(VarRef ref, double cap, double objective) { return add(ref, false, cap, objective); }

  bool has(const VarRef& ref) const { return index_.count(ref) != 0; }
  int index_of(const VarRef& ref) const {
    auto it = index_.find(ref);
    if (it == index_.end()) throw UnknownVariable("unknown variable " + var_name(ref));
    return it->second;
  }

  void add_constraint(LinearConstraint c) {
    std::set<VarRef> seen;
    for (const auto& t : c.terms) {
      index_of(t.var);
      if (!seen.insert(t.var).second) throw std::invalid_argument("duplicate variable in constraint");
    }
    constraints_.push_back(std::move(c));
  }

  void add_objective(const VarRef& ref, double delta) { objective_[index_of(ref)] += delta; }

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_of(const VarRef& ref) const { return objective_[index_of(ref)]; }

  size_t binary_count() const {
    return static_cast<size_t>(std::count_if(variables_.begin(), variables_.end(), [](auto& v) { return v.binary; }));
  }
  int next_slack_group() { return slack_groups_++; }
  int slack_groups() const { return slack_groups_; }

  friend bool operator==(const BinaryProgram& l, const BinaryProgram& r) {
    return l.variables_ == r.variables_ && l.constraints_ == r.constraints_ && l.objective_ == r.objective_;
  }

 private:
  int add(VarRef ref, bool binary, double upper, double objective) {
    if (index_.count(ref)) throw std::invalid_argument("duplicate variable " + var_name(ref));
    if (binary && !variables_.empty() && !variables_.back().binary)
      throw std::logic_error("binary variables must precede slacks");
    const int idx = static_cast<int>(variables_.size());
    variables_.push_back({ref, binary, upper});
    objective_.push_back(objective);
    index_.emplace(ref, idx);
    if (ref.is_slack()) slack_groups_ = std::max(slack_groups_, ref.a + 1);
    return idx;
  }

  std::vector<Variable> variables_;
  std::vector<LinearConstraint> constraints_;
  std::vector<double> objective_;
  std::map<VarRef, int> index_;
  int slack_groups_ = 0;
};

struct SlackPenalty {
  double lambda = 1.0;
  double cap = 1.0;
};

/// Adds `c` with slack: equality splits into lhs - S_up <= C and
/// lhs + S_lo >= C; inequalities get the one slack that relaxes them. Each
/// slack is bounded by `cap` and costs `lambda` per unit.
inline void soften(BinaryProgram& p, LinearConstraint c, SlackPenalty pen) {
  if (!(pen.lambda > 0)) throw std::invalid_argument("slack penalty must be positive");
  const int k = p.next_slack_group();
  c.softened = true;
  auto with_up = [&](LinearConstraint r) {
    const VarRef s = VarRef::slack_up(k);
    if (!p.has(s)) p.add_slack(s, pen.cap, -pen.lambda);
    r.terms.push_back({-1.0, s});
    r.relation = Relation::LessEqual;
    return r;
  };
  auto with_lo = [&](LinearConstraint r) {
    const VarRef s = VarRef::slack_lo(k);
    if (!p.has(s)) p.add_slack(s, pen.cap, -pen.lambda);
    r.terms.push_back({1.0, s});
    r.relation = Relation::GreaterEqual;
    return r;
  };
  switch (c.relation) {
    case Relation::LessEqual: p.add_constraint(with_up(c)); break;
    case Relation::GreaterEqual: p.add_constraint(with_lo(c)); break;
    case Relation::Equal:
      p.add_constraint(with_up(c));
      p.add_constraint(with_lo(c));
      break;
  }
}

// ---------------------------------------------------------------------------
// Builders

struct BuildParams {
  SlackPenalty region_noncross{0.5, 1.0};
  SlackPenalty region_enclose{0.5, 1.0};
  SlackPenalty region_region{1.0, 1.0};
  SlackPenalty corner_edge{1.0, 1.0};

  double ray_length = 100.0;
  double ray_width = 2.0;
  int ray_spacing = 2;                // boundary samples between rays
  double empty_ray_fraction = 0.2;    // empty rays veto a region at this share
  int interior_erosion_px = 2;
  int noncross_min_overlap_px = 1;
  double beta_length = 16.0;
  double direction_window_deg = 5.0;
  double direction_threshold = 0.2;
};

inline constexpr double kEdgeOffset = 0.125;           // 0.5^3
inline constexpr double kEdgeOnlyOffset = 0.5;
inline constexpr double kDirectionWeight = 0.1;
inline constexpr double kDirectionOffset = 0.25;       // 0.5^2
inline constexpr double kRegionWeight = 1.0;

using ObjectiveTerms = std::vector<std::pair<VarRef, double>>;

namespace detail {

inline std::map<int, const CornerDetection*> corner_index(const DetectionSet& d) {
  std::map<int, const CornerDetection*> m;
  for (const auto& c : d.corners) m[c.id] = &c;
  return m;
}

inline Segment2 candidate_segment(const std::map<int, const CornerDetection*>& corners, const EdgeCandidate& e) {
  return {corners.at(e.corner_a)->position, corners.at(e.corner_b)->position};
}

}  // namespace detail

/// Objective coefficients for every non-slack variable the config uses.
inline ObjectiveTerms build_objective(const DetectionSet& d, const std::vector<EdgeCandidate>& candidates,
                                      const FeatureConfig& cfg, const BuildParams& params = {}) {
  ObjectiveTerms out;
  const auto corners = detail::corner_index(d);
  for (const auto& e : candidates) {
    double w = e.confidence - kEdgeOnlyOffset;
    if (cfg.use_corners)
      w = e.confidence * corners.at(e.corner_a)->confidence * corners.at(e.corner_b)->confidence - kEdgeOffset;
    out.push_back({VarRef::edge(e.corner_a, e.corner_b), w});
  }
  if (cfg.use_ce_relations)
    for (const auto& [id, c] : corners)
      for (int b = 0; b < kDirectionBins; ++b)
        if (c->direction_bins[b] >= params.direction_threshold)
          out.push_back({VarRef::direction(id, b),
                         kDirectionWeight * (c->direction_bins[b] * c->confidence - kDirectionOffset)});
  if (cfg.use_regions)
    for (const auto& r : d.regions) out.push_back({VarRef::region(r.id), kRegionWeight});
  return out;
}

inline std::vector<LinearConstraint> build_topology_constraints(const std::vector<EdgeCandidate>& candidates,
                                                                const std::vector<CornerDetection>& corner_list) {
  std::map<int, const CornerDetection*> corners;
  for (const auto& c : corner_list) corners[c.id] = &c;
  std::vector<LinearConstraint> out;
  for (const auto& e : candidates) {
    const VarRef ev = VarRef::edge(e.corner_a, e.corner_b);
    for (int c : {e.corner_a, e.corner_b})
      out.push_back({{{1.0, ev}, {-1.0, VarRef::corner(c)}}, Relation::LessEqual, 0.0, Family::TopologyEndpoint});
  }
  for (const auto& [id, c] : corners) {
    LinearConstraint deg{{}, Relation::GreaterEqual, 0.0, Family::TopologyDegree};
    for (const auto& e : candidates)
      if (e.corner_a == id || e.corner_b == id) deg.terms.push_back({1.0, VarRef::edge(e.corner_a, e.corner_b)});
    deg.terms.push_back({-2.0, VarRef::corner(id)});
    out.push_back(std::move(deg));
  }
  std::vector<Segment2> segs;
  for (const auto& e : candidates) segs.push_back(detail::candidate_segment(corners, e));
  for (size_t k = 0; k < candidates.size(); ++k)
    for (size_t l = k + 1; l < candidates.size(); ++l)
      if (segments_properly_intersect(segs[k], segs[l]))
        out.push_back({{{1.0, VarRef::edge(candidates[k].corner_a, candidates[k].corner_b)},
                        {1.0, VarRef::edge(candidates[l].corner_a, candidates[l].corner_b)}},
                       Relation::LessEqual,
                       1.0,
                       Family::TopologyPlanarity});
  return out;
}

/// Probe rays cast outward from one region's boundary, with the candidate
/// indices each one hits.
struct RegionRays {
  int region = 0;
  std::vector<Ray> rays;
  std::vector<std::vector<size_t>> hits;
};

inline RegionRays cast_region_rays(const RegionDetection& r, const std::vector<Segment2>& segments,
                                   const BuildParams& params) {
  RegionRays out;
  out.region = r.id;
  const auto boundary = trace_boundary(r.mask);
  if (boundary.size() < 3) return out;
  const auto normals = outward_normals(boundary, r.mask);
  for (size_t i = 0; i < boundary.size(); i += static_cast<size_t>(params.ray_spacing)) {
    const Ray ray{boundary[i], normals[i], params.ray_length, params.ray_width};
    std::vector<size_t> hit;
    for (size_t e = 0; e < segments.size(); ++e)
      if (segment_hits_ray(segments[e], ray)) hit.push_back(e);
    out.rays.push_back(ray);
    out.hits.push_back(std::move(hit));
  }
  return out;
}

struct RegionConstraints {
  std::vector<LinearConstraint> noncross;
  std::vector<LinearConstraint> enclose;
  std::vector<std::string> warnings;
};

inline RegionConstraints build_region_constraints(const DetectionSet& d, const std::vector<EdgeCandidate>& candidates,
                                                  const BuildParams& params = {}) {
  RegionConstraints out;
  const auto corners = detail::corner_index(d);
  std::vector<Segment2> segs;
  std::vector<std::vector<Pixel>> strips;
  for (const auto& e : candidates) {
    segs.push_back(detail::candidate_segment(corners, e));
    strips.push_back(rasterize_segment(segs.back(), kEdgeStripWidth, d.canvas));
  }
  std::vector<const RegionDetection*> regions;
  for (const auto& r : d.regions) regions.push_back(&r);
  std::sort(regions.begin(), regions.end(), [](auto* l, auto* r) { return l->id < r->id; });

  for (const auto* r : regions) {
    const VarRef rv = VarRef::region(r->id);
    const BitMask interior = erode(r->mask, params.interior_erosion_px);
    for (size_t e = 0; e < candidates.size(); ++e) {
      int overlap = 0;
      for (Pixel p : strips[e])
        if (interior.get(p)) ++overlap;
      if (overlap >= params.noncross_min_overlap_px)
        out.noncross.push_back({{{1.0, VarRef::edge(candidates[e].corner_a, candidates[e].corner_b)}, {1.0, rv}},
                                Relation::LessEqual,
                                1.0,
                                Family::RegionNoncross});
    }

    const RegionRays rays = cast_region_rays(*r, segs, params);
    if (rays.rays.empty()) {
      out.warnings.push_back("region " + std::to_string(r->id) + " too small to cast rays");
      continue;
    }
    size_t empty = 0;
    for (const auto& h : rays.hits) empty += h.empty() ? 1 : 0;
    const bool veto = static_cast<double>(empty) >= params.empty_ray_fraction * static_cast<double>(rays.hits.size());
    for (const auto& h : rays.hits) {
      LinearConstraint c{{}, Relation::GreaterEqual, 0.0, Family::RegionEnclose};
      if (h.empty() && !veto) continue;
      for (size_t e : h) c.terms.push_back({1.0, VarRef::edge(candidates[e].corner_a, candidates[e].corner_b)});
      c.terms.push_back({-1.0, rv});
      out.enclose.push_back(std::move(c));
    }
  }
  return out;
}

/// The 16-px probe across the center of a fitted shared-boundary segment.
inline Segment2 beta_probe(const BitMask& boundary, double length) {
  std::vector<Point2> pts;
  for (Pixel p : boundary.pixels()) pts.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  const Segment2 fit = fit_line_segment(pts);
  Point2 dir = fit.b - fit.a;
  const double len = norm(dir);
  if (len < kEps) throw DegeneratePoints();
  dir = (1.0 / len) * dir;
  const Point2 n{-dir.y, dir.x};
  const Point2 m = fit.midpoint();
  return {m - (0.5 * length) * n, m + (0.5 * length) * n};
}

struct RegionRegionConstraints {
  std::vector<LinearConstraint> constraints;
  std::vector<std::string> warnings;
};

inline RegionRegionConstraints build_region_region_constraints(const DetectionSet& d,
                                                               const std::vector<EdgeCandidate>& candidates,
                                                               const BuildParams& params = {}) {
  RegionRegionConstraints out;
  const auto corners = detail::corner_index(d);
  std::vector<Segment2> segs;
  for (const auto& e : candidates) segs.push_back(detail::candidate_segment(corners, e));
  for (const auto& pair : d.region_pair_boundaries) {
    for (size_t k = 0; k < pair.segments.size(); ++k) {
      const std::string where =
          "boundary " + std::to_string(k) + " of regions " + std::to_string(pair.region_a) + "/" + std::to_string(pair.region_b);
      Segment2 beta;
      try {
        beta = beta_probe(pair.segments[k], params.beta_length);
      } catch (const DegeneratePoints&) {
        out.warnings.push_back(where + ": degenerate boundary mask, skipped");
        continue;
      }
      LinearConstraint c{{}, Relation::Equal, 1.0, Family::RegionRegion};
      for (size_t e = 0; e < candidates.size(); ++e)
        if (segments_intersect(segs[e], beta))
          c.terms.push_back({1.0, VarRef::edge(candidates[e].corner_a, candidates[e].corner_b)});
      if (c.terms.empty()) {
        out.warnings.push_back(where + ": no candidate crosses the probe, skipped");
        continue;
      }
      out.constraints.push_back(std::move(c));
    }
  }
  return out;
}

inline std::vector<LinearConstraint> build_ce_constraints(const DetectionSet& d,
                                                          const std::vector<EdgeCandidate>& candidates,
                                                          const BuildParams& params = {}) {
  std::vector<LinearConstraint> out;
  const auto corners = detail::corner_index(d);
  for (const auto& [id, c] : corners) {
    struct Incident {
      VarRef var;
      double dir;
    };
    std::vector<Incident> inc;
    for (const auto& e : candidates) {
      if (e.corner_a != id && e.corner_b != id) continue;
      const int other = e.corner_a == id ? e.corner_b : e.corner_a;
      inc.push_back({VarRef::edge(e.corner_a, e.corner_b), direction_degrees(c->position, corners.at(other)->position)});
    }
    for (int b = 0; b < kDirectionBins; ++b) {
      if (c->direction_bins[b] < params.direction_threshold) continue;
      LinearConstraint con{{}, Relation::Equal, 0.0, Family::CeBin};
      for (const auto& i : inc)
        if (angular_distance(i.dir, bin_center(b)) <= params.direction_window_deg) con.terms.push_back({1.0, i.var});
      con.terms.push_back({-1.0, VarRef::direction(id, b)});
      out.push_back(std::move(con));
    }
    LinearConstraint prune{{}, Relation::Equal, 0.0, Family::CePrune};
    for (const auto& i : inc)
      if (c->direction_bins[bin_direction(i.dir)] < params.direction_threshold) prune.terms.push_back({1.0, i.var});
    if (!prune.terms.empty()) out.push_back(std::move(prune));
  }
  return out;
}

struct BuiltProgram {
  BinaryProgram program;
  std::vector<EdgeCandidate> candidates;
  std::vector<std::string> warnings;
};

/// Full assembly program for one building. Topology rows are hard; every
/// other family is softened with its configured penalty.
inline BuiltProgram build(const DetectionSet& d, const FeatureConfig& cfg, const BuildParams& params = {}) {
  if (!cfg.consistent()) throw std::invalid_argument("relationship features require their primitive features");
  validate(d);
  BuiltProgram out;
  out.candidates = edge_candidates(d);
  BinaryProgram& p = out.program;

  std::vector<const CornerDetection*> corners;
  for (const auto& c : d.corners) corners.push_back(&c);
  std::sort(corners.begin(), corners.end(), [](auto* l, auto* r) { return l->id < r->id; });
  for (const auto* c : corners) p.add_binary(VarRef::corner(c->id));
  for (const auto& e : out.candidates) p.add_binary(VarRef::edge(e.corner_a, e.corner_b));
  if (cfg.use_regions) {
    std::vector<int> ids;
    for (const auto& r : d.regions) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    for (int id : ids) p.add_binary(VarRef::region(id));
  }
  if (cfg.use_ce_relations)
    for (const auto* c : corners)
      for (int b = 0; b < kDirectionBins; ++b)
        if (c->direction_bins[b] >= params.direction_threshold) p.add_binary(VarRef::direction(c->id, b));
  for (const auto& [ref, w] : build_objective(d, out.candidates, cfg, params)) p.add_objective(ref, w);

  for (auto& c : build_topology_constraints(out.candidates, d.corners)) p.add_constraint(std::move(c));
  if (cfg.use_regions) {
    auto rc = build_region_constraints(d, out.candidates, params);
    for (auto& c : rc.noncross) soften(p, std::move(c), params.region_noncross);
    for (auto& c : rc.enclose) soften(p, std::move(c), params.region_enclose);
    out.warnings.insert(out.warnings.end(), rc.warnings.begin(), rc.warnings.end());
  }
  if (cfg.use_rr_relations) {
    auto rr = build_region_region_constraints(d, out.candidates, params);
    for (auto& c : rr.constraints) soften(p, std::move(c), params.region_region);
    out.warnings.insert(out.warnings.end(), rr.warnings.begin(), rr.warnings.end());
  }
  if (cfg.use_ce_relations)
    for (auto& c : build_ce_constraints(d, out.candidates, params)) soften(p, std::move(c), params.corner_edge);
  return out;
}

/// Graph of the active edges and their endpoints.
inline PlanarGraph decode_graph(const BuiltProgram& built, const DetectionSet& d, std::span<const double> assignment) {
  PlanarGraph g;
  std::set<int> used;
  for (const auto& e : built.candidates) {
    if (assignment[built.program.index_of(VarRef::edge(e.corner_a, e.corner_b))] < 0.5) continue;
    g.edges.push_back({e.corner_a, e.corner_b});
    used.insert(e.corner_a);
    used.insert(e.corner_b);
  }
  for (int id : used) g.vertices.push_back({id, d.find_corner(id)->position});
  return g;
}

}  // namespace planarip
