// planarip: assemble building graphs from detections, simulate detections,
// score predictions, export LP files and render SVGs.
//
// Exit codes: 0 success, 1 malformed input or I/O failure, 2 internal error,
// 3 time limit reached (assemble; the incumbent graph is still written).

#include <glob.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planarip/planarip.hpp"

namespace {

using namespace planarip;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;
constexpr int kExitTimeLimit = 3;
constexpr double kMaxTimeLimit = 3600.0;  // one hour per building

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double default_time_limit() {
  if (const char* env = std::getenv("PLANARIP_TIME_LIMIT")) {
    try {
      const double v = std::stod(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid PLANARIP_TIME_LIMIT='" << env << "'\n";
  }
  return SolveOptions{}.time_limit_s;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  if (rc == 0)
    for (size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH) throw InputError("cannot expand '" + pattern + "'");
  return out;
}

json report_json(const MetricsReport& r) {
  auto level = [](const LevelScore& s) {
    auto pct = [](double v) { return std::round(v * 1000.0) / 10.0; };
    return json{{"tp", s.tp},
                {"pred", s.pred},
                {"gt", s.gt},
                {"precision", pct(s.precision())},
                {"recall", pct(s.recall())},
                {"f1", pct(s.f1())}};
  };
  return {{"corner", level(r.corner)}, {"edge", level(r.edge)}, {"region", level(r.region)}, {"table", r.table_row()}};
}

// --- subcommands -----------------------------------------------------------

struct AssembleArgs {
  std::string detections, out, svg, features = "all";
  std::vector<std::string> lambdas;
  double time_limit = 0;
  bool post = true;
};

int run_assemble(const AssembleArgs& a) {
  const DetectionSet d = load_detections(a.detections);
  AssembleOptions opt;
  try {
    opt.features = parse_features(a.features);
    for (const auto& l : a.lambdas) apply_lambda_override(opt.params, l);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  opt.solve.time_limit_s = a.time_limit > 0 ? a.time_limit : default_time_limit();
  if (opt.solve.time_limit_s > kMaxTimeLimit) {
    std::cerr << "warning: time limit capped at " << kMaxTimeLimit << " s\n";
    opt.solve.time_limit_s = kMaxTimeLimit;
  }
  opt.post = a.post;
  const AssembleResult r = assemble(d, opt);
  for (const auto& w : r.built.warnings) std::cerr << "warning: " << w << "\n";
  const auto bad = graph_violations(r.graph);
  if (!bad.empty()) throw std::logic_error("assembled graph is invalid: " + bad.front());
  write_text(a.out, dump_graph(r.graph));
  if (!a.svg.empty()) write_text(a.svg, render_graph_svg(r.graph, d.canvas));
  std::cerr << status_name(r.solve.status) << " objective " << r.solve.objective << " bound " << r.solve.bound
            << " nodes " << r.solve.stats.nodes << " time " << r.solve.stats.wall_seconds << "s\n";
  return r.solve.status == SolveStatus::TimeLimit ? kExitTimeLimit : kExitOk;
}

struct SimulateArgs {
  std::string gt, out;
  NoiseConfig noise;
  bool clean = false;
  int width = 256, height = 256;
};

int run_simulate(SimulateArgs a) {
  const PlanarGraph gt = load_graph(a.gt);
  NoiseConfig cfg = a.noise;
  if (a.clean) cfg = NoiseConfig::clean(a.noise.seed);
  DetectionSet d;
  try {
    d = simulate(gt, cfg, {a.width, a.height});
  } catch (const GraphOffCanvas& e) {
    throw InputError(e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  write_text(a.out, dump_detections(d));
  return kExitOk;
}

struct EvaluateArgs {
  std::string pred, gt, out;
  int width = 256, height = 256;
};

int run_evaluate(const EvaluateArgs& a) {
  auto by_name = [](const std::vector<std::string>& paths) {
    std::map<std::string, std::string> m;
    for (const auto& p : paths) {
      const std::string base = std::filesystem::path(p).filename().string();
      if (!m.emplace(base, p).second) throw InputError("duplicate basename " + base);
    }
    return m;
  };
  const auto preds = by_name(expand_glob(a.pred));
  const auto gts = by_name(expand_glob(a.gt));
  if (gts.empty()) throw InputError("no ground-truth files match '" + a.gt + "'");
  std::vector<PlanarGraph> pg, gg;
  for (const auto& [name, path] : gts) {
    auto it = preds.find(name);
    if (it == preds.end()) throw InputError("no prediction for " + name);
    pg.push_back(load_graph(it->second));
    gg.push_back(load_graph(path));
  }
  for (const auto& [name, path] : preds)
    if (!gts.count(name)) throw InputError("no ground truth for " + name);
  const MetricsReport r = evaluate(pg, gg, {a.width, a.height});
  if (!a.out.empty()) write_text(a.out, report_json(r).dump(2) + "\n");
  std::printf("corner P/R/F1  edge P/R/F1  region P/R/F1\n");
  const auto row = r.table_row();
  for (size_t i = 0; i < row.size(); ++i) std::printf(i ? " %.1f" : "%.1f", row[i]);
  std::printf("\n");
  return kExitOk;
}

struct ExportArgs {
  std::string detections, out, features = "all";
  std::vector<std::string> lambdas;
};

int run_export(const ExportArgs& a) {
  const DetectionSet d = load_detections(a.detections);
  BuildParams params;
  FeatureConfig f;
  try {
    f = parse_features(a.features);
    for (const auto& l : a.lambdas) apply_lambda_override(params, l);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const BuiltProgram b = build(d, f, params);
  write_text(a.out, write_lp(b.program));
  return kExitOk;
}

struct RenderArgs {
  std::string input, out;
  bool debug = false;
  int width = 256, height = 256;
};

int run_render(const RenderArgs& a) {
  const json j = parse_json(read_text(a.input), a.input);
  std::string svg;
  if (j.is_object() && j.contains("vertices")) svg = render_graph_svg(graph_from_json(j), {a.width, a.height});
  else svg = render_detections_svg(detections_from_json(j), a.debug);
  write_text(a.out, svg);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar building-graph assembly by integer programming"};
  app.require_subcommand(1);

  AssembleArgs as;
  auto* assemble_cmd = app.add_subcommand("assemble", "Build and solve the program; write the graph");
  assemble_cmd->add_option("detections", as.detections, "Detection JSON")->required();
  assemble_cmd->add_option("--out,-o", as.out, "Output graph JSON")->required();
  assemble_cmd->add_option("--features", as.features, "Comma list: all | edges | pc,rce,pr,rrr");
  assemble_cmd->add_option("--lambda", as.lambdas, "Penalty override family=value (noncross, enclose, rr, ce)");
  assemble_cmd->add_option("--time-limit", as.time_limit, "Seconds (default $PLANARIP_TIME_LIMIT or 300)");
  assemble_cmd->add_option("--svg", as.svg, "Also render the graph to this SVG");
  assemble_cmd->add_flag("--post,!--no-post", as.post, "Merge colinear corners (default on)");

  SimulateArgs sm;
  auto* simulate_cmd = app.add_subcommand("simulate", "Synthesize detections from a ground-truth graph");
  simulate_cmd->add_option("gt", sm.gt, "Ground-truth graph JSON")->required();
  simulate_cmd->add_option("--out,-o", sm.out, "Output detection JSON")->required();
  simulate_cmd->add_option("--seed", sm.noise.seed);
  simulate_cmd->add_flag("--clean", sm.clean, "No noise at all");
  simulate_cmd->add_option("--corner-jitter", sm.noise.corner_jitter_sigma);
  simulate_cmd->add_option("--corner-drop", sm.noise.corner_drop_rate);
  simulate_cmd->add_option("--spurious-rate", sm.noise.spurious_corner_rate);
  simulate_cmd->add_option("--true-conf", sm.noise.true_corner_conf_range)->expected(2);
  simulate_cmd->add_option("--false-conf", sm.noise.false_corner_conf_range)->expected(2);
  simulate_cmd->add_option("--edge-fg", sm.noise.edge_map_fg);
  simulate_cmd->add_option("--edge-bg", sm.noise.edge_map_bg);
  simulate_cmd->add_option("--edge-noise", sm.noise.edge_map_noise_sigma);
  simulate_cmd->add_option("--dir-true", sm.noise.dir_bin_true_conf);
  simulate_cmd->add_option("--dir-false", sm.noise.dir_bin_false_conf);
  simulate_cmd->add_option("--region-erode", sm.noise.region_erode_px);
  simulate_cmd->add_option("--rr-drop", sm.noise.rr_boundary_drop_rate);
  simulate_cmd->add_option("--width", sm.width);
  simulate_cmd->add_option("--height", sm.height);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predicted graphs against ground truth");
  evaluate_cmd->add_option("pred", ev.pred, "Glob of predicted graph files")->required();
  evaluate_cmd->add_option("gt", ev.gt, "Glob of ground-truth graph files")->required();
  evaluate_cmd->add_option("--out,-o", ev.out, "Report JSON");
  evaluate_cmd->add_option("--width", ev.width);
  evaluate_cmd->add_option("--height", ev.height);

  ExportArgs ex;
  auto* export_cmd = app.add_subcommand("export-lp", "Write the assembly program as an LP file");
  export_cmd->add_option("detections", ex.detections, "Detection JSON")->required();
  export_cmd->add_option("--out,-o", ex.out, "Output LP file")->required();
  export_cmd->add_option("--features", ex.features, "Comma list: all | edges | pc,rce,pr,rrr");
  export_cmd->add_option("--lambda", ex.lambdas, "Penalty override family=value");

  RenderArgs rd;
  auto* render_cmd = app.add_subcommand("render", "Render a graph or detection file to SVG");
  render_cmd->add_option("input", rd.input, "Graph or detection JSON")->required();
  render_cmd->add_option("--out,-o", rd.out, "Output SVG")->required();
  render_cmd->add_flag("--debug", rd.debug, "Draw enclosure rays and region-pair probes");
  render_cmd->add_option("--width", rd.width, "Canvas width for graphs");
  render_cmd->add_option("--height", rd.height, "Canvas height for graphs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*assemble_cmd) return run_assemble(as);
    if (*simulate_cmd) return run_simulate(sm);
    if (*evaluate_cmd) return run_evaluate(ev);
    if (*export_cmd) return run_export(ex);
    if (*render_cmd) return run_render(rd);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidDetections& e) {
    std::cerr << "error: invalid detections: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidGraph& e) {
    std::cerr << "error: invalid graph: " << e.what() << "\n";
    return kExitInput;
  } catch (const LengthMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
