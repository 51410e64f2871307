#pragma once

// Detections -> program -> solve -> graph, plus the option parsing the
// command-line tool shares with tests.

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>

#include "planarip/model.hpp"
#include "planarip/program.hpp"
#include "planarip/solver.hpp"

namespace planarip {

struct AssembleOptions {
  FeatureConfig features = FeatureConfig::all();
  BuildParams params;
  SolveOptions solve;
  bool post = true;
};

struct AssembleResult {
  PlanarGraph graph;
  BuiltProgram built;
  SolveResult solve;
};

inline AssembleResult assemble(const DetectionSet& d, const AssembleOptions& opt = {}) {
  AssembleResult out;
  out.built = build(d, opt.features, opt.params);
  out.solve = solve(out.built.program, opt.solve);
  if (out.solve.status == SolveStatus::Infeasible) throw std::logic_error("assembly program is infeasible");
  out.graph = decode_graph(out.built, d, out.solve.assignment);
  if (opt.post) out.graph = merge_colinear_corners(out.graph);
  return out;
}

/// Comma-separated feature names: "all", "edges" (P_E alone), or any of
/// pc, rce, pr, rrr (P_E is implied). Case-insensitive.
inline FeatureConfig parse_features(const std::string& spec) {
  FeatureConfig f = FeatureConfig::edges_only();
  std::stringstream ss(spec);
  std::string tok;
  bool any = false;
  while (std::getline(ss, tok, ',')) {
    std::string t;
    for (char ch : tok)
      if (!std::isspace(static_cast<unsigned char>(ch)) && ch != '_' && ch != '+')
        t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (t.empty()) continue;
    any = true;
    if (t == "all") f = FeatureConfig::all();
    else if (t == "edges" || t == "pe") {
    } else if (t == "corners" || t == "pc") f.use_corners = true;
    else if (t == "ce" || t == "rce") f.use_ce_relations = true;
    else if (t == "regions" || t == "pr") f.use_regions = true;
    else if (t == "rr" || t == "rrr") f.use_rr_relations = true;
    else throw std::invalid_argument("unknown feature '" + tok + "'");
  }
  if (!any) throw std::invalid_argument("empty feature list");
  if (!f.consistent()) throw std::invalid_argument("rce needs pc and rrr needs pr");
  return f;
}

inline std::string feature_label(const FeatureConfig& f) {
  std::string s = "P_E";
  if (f.use_corners) s += "+P_C";
  if (f.use_ce_relations) s += "+R_CE";
  if (f.use_regions) s += "+P_R";
  if (f.use_rr_relations) s += "+R_RR";
  return s;
}

/// "family=value" penalty override; family in noncross, enclose, rr, ce.
inline void apply_lambda_override(BuildParams& p, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("lambda override must be family=value");
  const std::string key = spec.substr(0, eq);
  double v = 0;
  try {
    size_t used = 0;
    v = std::stod(spec.substr(eq + 1), &used);
    if (used != spec.size() - eq - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad lambda value in '" + spec + "'");
  }
  if (!(v > 0)) throw std::invalid_argument("lambda must be positive");
  if (key == "noncross") p.region_noncross.lambda = v;
  else if (key == "enclose") p.region_enclose.lambda = v;
  else if (key == "rr") p.region_region.lambda = v;
  else if (key == "ce") p.corner_edge.lambda = v;
  else throw std::invalid_argument("unknown lambda family '" + key + "'");
}

}  // namespace planarip
