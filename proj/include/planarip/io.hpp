#pragma once

// JSON file formats for detections and graphs. Masks and the edge map are
// stored as per-row run lengths that alternate background/foreground and
// start with a (possibly empty) background run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "planarip/model.hpp"

namespace planarip {

using json = nlohmann::json;

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kEdgeMapCodeScale = 1e6;

namespace detail {

inline json mask_to_json(const BitMask& m) {
  return {{"width", m.width()}, {"height", m.height()}, {"rows", m.encode_rows()}};
}

inline BitMask mask_from_json(const json& j) {
  const int w = j.at("width").get<int>(), h = j.at("height").get<int>();
  if (w <= 0 || h <= 0) throw FormatError("mask dimensions must be positive");
  try {
    return BitMask::decode_rows(w, h, j.at("rows").get<std::vector<std::vector<int>>>());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("bad mask rows: ") + e.what());
  }
}

inline int64_t edge_code(double v) { return std::llround(std::clamp(v, 0.0, 1.0) * kEdgeMapCodeScale); }

inline json edge_map_to_json(const EdgeConfidenceMap& m) {
  json rows = json::array(), values = json::array();
  bool binary = true;
  for (int y = 0; y < m.height(); ++y) {
    std::vector<int> runs;
    std::vector<int64_t> codes;
    bool fg = false;
    int run = 0;
    for (int x = 0; x < m.width(); ++x) {
      const int64_t c = edge_code(m.at(x, y));
      if ((c != 0) != fg) {
        runs.push_back(run);
        run = 0;
        fg = !fg;
      }
      ++run;
      if (c != 0) {
        codes.push_back(c);
        if (c != static_cast<int64_t>(kEdgeMapCodeScale)) binary = false;
      }
    }
    if (fg) runs.push_back(run);
    rows.push_back(runs);
    values.push_back(codes);
  }
  json j = {{"width", m.width()}, {"height", m.height()}, {"encoding", "rle-rows"},
            {"scale", 1.0 / kEdgeMapCodeScale}, {"rows", rows}};
  if (!binary) j["values"] = values;
  return j;
}

inline EdgeConfidenceMap edge_map_from_json(const json& j) {
  if (j.at("encoding").get<std::string>() != "rle-rows") throw FormatError("unsupported edge_map encoding");
  const int w = j.at("width").get<int>(), h = j.at("height").get<int>();
  if (w <= 0 || h <= 0) throw FormatError("edge_map dimensions must be positive");
  const double scale = j.at("scale").get<double>();
  if (!(scale > 0.0)) throw FormatError("edge_map scale must be positive");
  // Dividing by an integral code count reproduces quantized values exactly.
  const double inv = std::round(1.0 / scale);
  const bool integral_scale = std::abs(1.0 / scale - inv) < 1e-6;
  const auto& rows = j.at("rows");
  if (!rows.is_array() || static_cast<int>(rows.size()) != h) throw FormatError("edge_map needs one run list per row");
  const bool binary = !j.contains("values");
  if (!binary && (!j["values"].is_array() || j["values"].size() != rows.size()))
    throw FormatError("edge_map values must parallel rows");
  EdgeConfidenceMap m(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    const auto runs = rows[y].get<std::vector<int>>();
    std::vector<int64_t> codes;
    if (!binary) codes = j["values"][y].get<std::vector<int64_t>>();
    int x = 0;
    size_t k = 0;
    for (size_t r = 0; r < runs.size(); ++r) {
      if (runs[r] < 0 || x + runs[r] > w) throw FormatError("edge_map row " + std::to_string(y) + " overflows");
      if (r % 2 == 1)
        for (int i = 0; i < runs[r]; ++i) {
          double v = 1.0;
          if (!binary) {
            if (k >= codes.size()) throw FormatError("edge_map row " + std::to_string(y) + " is missing values");
            const auto code = static_cast<double>(codes[k++]);
            v = integral_scale ? code / inv : code * scale;
          }
          if (!(v > 0.0 && v <= 1.0)) throw FormatError("edge_map value out of range");
          m.set(x + i, y, v);
        }
      x += runs[r];
    }
    if (k != codes.size()) throw FormatError("edge_map row " + std::to_string(y) + " has extra values");
  }
  return m;
}

}  // namespace detail

inline json to_json(const DetectionSet& d) {
  json corners = json::array();
  for (const auto& c : d.corners)
    corners.push_back({{"id", c.id},
                       {"x", c.position.x},
                       {"y", c.position.y},
                       {"conf", c.confidence},
                       {"bins", std::vector<double>(c.direction_bins.begin(), c.direction_bins.end())}});
  json regions = json::array();
  for (const auto& r : d.regions)
    regions.push_back({{"id", r.id}, {"conf", r.confidence}, {"mask", detail::mask_to_json(r.mask)}});
  json rr = json::array();
  for (const auto& b : d.region_pair_boundaries) {
    json masks = json::array();
    for (const auto& m : b.segments) masks.push_back(detail::mask_to_json(m));
    rr.push_back({{"a", b.region_a}, {"b", b.region_b}, {"masks", masks}});
  }
  return {{"canvas", {d.canvas.width, d.canvas.height}},
          {"corners", corners},
          {"edge_map", detail::edge_map_to_json(d.edge_map)},
          {"regions", regions},
          {"rr_boundaries", rr}};
}

/// Parses and validates; throws FormatError or InvalidDetections.
inline DetectionSet detections_from_json(const json& j) {
  DetectionSet d;
  try {
    const auto canvas = j.at("canvas").get<std::vector<int>>();
    if (canvas.size() != 2 || canvas[0] <= 0 || canvas[1] <= 0) throw FormatError("canvas must be [w,h]");
    d.canvas = {canvas[0], canvas[1]};
    for (const auto& c : j.at("corners")) {
      CornerDetection cd;
      cd.id = c.at("id").get<int>();
      cd.position = {c.at("x").get<double>(), c.at("y").get<double>()};
      cd.confidence = c.at("conf").get<double>();
      const auto bins = c.at("bins").get<std::vector<double>>();
      if (bins.size() != kDirectionBins) throw FormatError("corner bins must have 15 entries");
      std::copy(bins.begin(), bins.end(), cd.direction_bins.begin());
      d.corners.push_back(cd);
    }
    if (j.contains("edge_map")) d.edge_map = detail::edge_map_from_json(j["edge_map"]);
    else d.edge_map = EdgeConfidenceMap(d.canvas.width, d.canvas.height, 0.0);
    for (const auto& r : j.value("regions", json::array()))
      d.regions.push_back({r.at("id").get<int>(), detail::mask_from_json(r.at("mask")), r.at("conf").get<double>()});
    for (const auto& b : j.value("rr_boundaries", json::array())) {
      RegionPairBoundary pb{b.at("a").get<int>(), b.at("b").get<int>(), {}};
      for (const auto& m : b.at("masks")) pb.segments.push_back(detail::mask_from_json(m));
      d.region_pair_boundaries.push_back(std::move(pb));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed detections: ") + e.what());
  }
  validate(d);
  return d;
}

inline json to_json(const PlanarGraph& g) {
  json vertices = json::array(), edges = json::array();
  for (const auto& v : g.vertices) vertices.push_back({{"id", v.id}, {"x", v.position.x}, {"y", v.position.y}});
  for (auto [a, b] : g.edges) edges.push_back({a, b});
  return {{"vertices", vertices}, {"edges", edges}};
}

inline PlanarGraph graph_from_json(const json& j, bool strict = true) {
  PlanarGraph g;
  try {
    for (const auto& v : j.at("vertices"))
      g.vertices.push_back({v.at("id").get<int>(), {v.at("x").get<double>(), v.at("y").get<double>()}});
    for (const auto& e : j.at("edges")) {
      const auto ab = e.get<std::vector<int>>();
      if (ab.size() != 2) throw FormatError("edge must be [id,id]");
      g.edges.push_back({ab[0], ab[1]});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed graph: ") + e.what());
  }
  if (strict) validate(g);
  return g;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

inline std::string dump_detections(const DetectionSet& d) { return to_json(d).dump() + "\n"; }
inline std::string dump_graph(const PlanarGraph& g) { return to_json(g).dump(2) + "\n"; }

inline DetectionSet load_detections(const std::string& path) {
  return detections_from_json(parse_json(read_text(path), path));
}
inline PlanarGraph load_graph(const std::string& path, bool strict = true) {
  return graph_from_json(parse_json(read_text(path), path), strict);
}

}  // namespace planarip
