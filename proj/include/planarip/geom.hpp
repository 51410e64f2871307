#pragma once

// Geometry kernel: predicates and constructions used by the program builder.
//
// Coordinates are image pixels with y pointing down. Integer coordinates are
// pixel centers. Angles are degrees measured counter-clockwise as displayed
// (0 = +x, 90 = up on screen), i.e. atan2(-dy, dx).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace planarip {

inline constexpr double kEps = 1e-9;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyMask : GeometryError {
  EmptyMask() : GeometryError("mask has no foreground pixel") {}
};
struct DegenerateTangent : GeometryError {
  DegenerateTangent() : GeometryError("boundary tangent is degenerate") {}
};
struct DegeneratePoints : GeometryError {
  DegeneratePoints() : GeometryError("all points coincide") {}
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool near(Point2 a, Point2 b, double tol = kEps) { return distance(a, b) <= tol; }

struct Segment2 {
  Point2 a;
  Point2 b;

  double length() const { return distance(a, b); }
  Point2 midpoint() const { return 0.5 * (a + b); }
};

/// Oriented probe rectangle: `length` along `direction` from `origin`,
/// `width` across, centered on the axis.
struct Ray {
  Point2 origin;
  Point2 direction;  // unit
  double length = 0.0;
  double width = 0.0;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(Pixel, Pixel) = default;
  friend constexpr auto operator<=>(Pixel a, Pixel b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

struct Canvas {
  int width = 256;
  int height = 256;
  friend constexpr bool operator==(Canvas, Canvas) = default;

  bool contains(Pixel p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
};

/// Dense binary mask; serialized as run lengths per row.
class BitMask {
 public:
  BitMask() = default;
  BitMask(int width, int height) : width_(width), height_(height), bits_(static_cast<size_t>(width) * height, 0) {
    if (width < 0 || height < 0) throw std::invalid_argument("negative mask dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  Canvas canvas() const { return {width_, height_}; }

  bool get(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
    return bits_[index(x, y)] != 0;
  }
  bool get(Pixel p) const { return get(p.x, p.y); }
  void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }
  void set(Pixel p, bool v = true) { set(p.x, p.y, v); }

  size_t count() const { return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), uint8_t{1})); }
  bool empty() const { return count() == 0; }

  std::vector<Pixel> pixels() const {
    std::vector<Pixel> out;
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x)
        if (get(x, y)) out.push_back({x, y});
    return out;
  }

  /// Alternating run lengths per row, starting with a background run
  /// (which may be zero). Trailing background runs are omitted.
  std::vector<std::vector<int>> encode_rows() const {
    std::vector<std::vector<int>> rows(height_);
    for (int y = 0; y < height_; ++y) {
      auto& runs = rows[y];
      bool cur = false;
      int len = 0;
      for (int x = 0; x < width_; ++x) {
        if (get(x, y) == cur) {
          ++len;
        } else {
          runs.push_back(len);
          cur = !cur;
          len = 1;
        }
      }
      if (cur) runs.push_back(len);
    }
    return rows;
  }

  static BitMask decode_rows(int width, int height, const std::vector<std::vector<int>>& rows) {
    if (static_cast<int>(rows.size()) != height) throw std::invalid_argument("RLE row count does not match height");
    BitMask m(width, height);
    for (int y = 0; y < height; ++y) {
      int x = 0;
      bool fg = false;
      for (int run : rows[y]) {
        if (run < 0) throw std::invalid_argument("negative RLE run");
        if (x + run > width) throw std::invalid_argument("RLE row longer than width");
        if (fg)
          for (int i = 0; i < run; ++i) m.set(x + i, y);
        x += run;
        fg = !fg;
      }
    }
    return m;
  }

  friend bool operator==(const BitMask&, const BitMask&) = default;

 private:
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> bits_;
};

inline size_t intersection_count(const BitMask& a, const BitMask& b) {
  size_t n = 0;
  const int w = std::min(a.width(), b.width());
  const int h = std::min(a.height(), b.height());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (a.get(x, y) && b.get(x, y)) ++n;
  return n;
}

inline double iou(const BitMask& a, const BitMask& b) {
  const size_t inter = intersection_count(a, b);
  const size_t uni = a.count() + b.count() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Erosion by an 8-neighborhood structuring element, applied `radius` times.
/// Pixels outside the mask bounds count as background.
inline BitMask erode(const BitMask& m, int radius) {
  BitMask cur = m;
  for (int r = 0; r < radius; ++r) {
    BitMask next(cur.width(), cur.height());
    for (int y = 0; y < cur.height(); ++y)
      for (int x = 0; x < cur.width(); ++x) {
        if (!cur.get(x, y)) continue;
        bool keep = true;
        for (int dy = -1; dy <= 1 && keep; ++dy)
          for (int dx = -1; dx <= 1 && keep; ++dx) keep = cur.get(x + dx, y + dy);
        if (keep) next.set(x, y);
      }
    cur = std::move(next);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Predicates

namespace detail {

/// Signed distance of p from the line through s (positive on the left in
/// math orientation). Zero-length segments give the point distance.
inline double line_offset(const Segment2& s, Point2 p) {
  const Point2 d = s.b - s.a;
  const double len = norm(d);
  if (len < kEps) return distance(s.a, p);
  return cross(d, p - s.a) / len;
}

/// p lies on the closed segment s (within kEps).
inline bool on_segment(const Segment2& s, Point2 p) {
  if (std::abs(line_offset(s, p)) > kEps) return false;
  const Point2 d = s.b - s.a;
  const double len2 = dot(d, d);
  const double t = dot(p - s.a, d);
  return t >= -kEps * std::sqrt(len2) && t <= len2 + kEps * std::sqrt(len2);
}

inline int sign(double v) { return v > kEps ? 1 : (v < -kEps ? -1 : 0); }

}  // namespace detail

/// True iff the segments share a point other than a common endpoint.
/// Collinear overlap of positive length counts as an intersection.
inline bool segments_properly_intersect(const Segment2& s1, const Segment2& s2) {
  const int o1 = detail::sign(detail::line_offset(s1, s2.a));
  const int o2 = detail::sign(detail::line_offset(s1, s2.b));
  const int o3 = detail::sign(detail::line_offset(s2, s1.a));
  const int o4 = detail::sign(detail::line_offset(s2, s1.b));

  if (o1 == 0 && o2 == 0) {
    // Collinear: overlap length along the common direction.
    const Point2 d = s1.b - s1.a;
    const double len = norm(d);
    if (len < kEps) return false;
    const Point2 u = (1.0 / len) * d;
    const double a0 = 0.0, a1 = len;
    double b0 = dot(s2.a - s1.a, u), b1 = dot(s2.b - s1.a, u);
    if (b0 > b1) std::swap(b0, b1);
    return std::min(a1, b1) - std::max(a0, b0) > kEps;
  }

  if (o1 * o2 < 0 && o3 * o4 < 0) return true;

  // Touching configurations: an endpoint of one lies on the other.
  auto shared = [&](Point2 p) {
    return (near(p, s1.a) || near(p, s1.b)) && (near(p, s2.a) || near(p, s2.b));
  };
  for (Point2 p : {s2.a, s2.b})
    if (detail::on_segment(s1, p) && !shared(p)) return true;
  for (Point2 p : {s1.a, s1.b})
    if (detail::on_segment(s2, p) && !shared(p)) return true;
  return false;
}

/// Closed segment–segment intersection (touching counts).
inline bool segments_intersect(const Segment2& s1, const Segment2& s2) {
  const int o1 = detail::sign(detail::line_offset(s1, s2.a));
  const int o2 = detail::sign(detail::line_offset(s1, s2.b));
  const int o3 = detail::sign(detail::line_offset(s2, s1.a));
  const int o4 = detail::sign(detail::line_offset(s2, s1.b));
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  return detail::on_segment(s1, s2.a) || detail::on_segment(s1, s2.b) || detail::on_segment(s2, s1.a) ||
         detail::on_segment(s2, s1.b);
}

/// Does the segment touch the closed probe rectangle of the ray?
/// Liang–Barsky clipping in the ray's local frame.
inline bool segment_hits_ray(const Segment2& s, const Ray& r) {
  const Point2 u = r.direction;
  const Point2 n{-u.y, u.x};
  const Point2 pa = s.a - r.origin;
  const Point2 pb = s.b - r.origin;
  const double s0 = dot(pa, u), t0 = dot(pa, n);
  const double ds = dot(pb, u) - s0, dt = dot(pb, n) - t0;
  const double half = 0.5 * r.width;

  double lo = 0.0, hi = 1.0;
  auto clip = [&](double p, double q) {
    // Require p * t <= q for the parameter t.
    if (std::abs(p) < 1e-15) return q >= -kEps;
    const double t = q / p;
    if (p < 0) lo = std::max(lo, t);
    else hi = std::min(hi, t);
    return true;
  };
  if (!clip(-ds, s0 + kEps)) return false;             // s >= 0
  if (!clip(ds, r.length - s0 + kEps)) return false;   // s <= length
  if (!clip(-dt, t0 + half + kEps)) return false;      // t >= -half
  if (!clip(dt, half - t0 + kEps)) return false;       // t <= half
  return lo <= hi;
}

inline double point_segment_distance(Point2 p, const Segment2& s) {
  const Point2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 < kEps * kEps) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

/// All pixels whose centers lie within width/2 of the segment, clipped to
/// the canvas, sorted by (y, x). Computed row by row as the intersection of
/// each scanline with the segment's capsule.
inline std::vector<Pixel> rasterize_segment(const Segment2& s, double width, Canvas canvas) {
  const double r = 0.5 * width + kEps;
  const Point2 d = s.b - s.a;
  const double len = norm(d);
  std::vector<Pixel> out;

  const int y_lo = std::max(0, static_cast<int>(std::ceil(std::min(s.a.y, s.b.y) - r)));
  const int y_hi = std::min(canvas.height - 1, static_cast<int>(std::floor(std::max(s.a.y, s.b.y) + r)));
  for (int y = y_lo; y <= y_hi; ++y) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    auto disk = [&](Point2 c) {
      const double dy = y - c.y;
      const double h2 = r * r - dy * dy;
      if (h2 < 0) return;
      const double h = std::sqrt(h2);
      lo = std::min(lo, c.x - h);
      hi = std::max(hi, c.x + h);
    };
    disk(s.a);
    disk(s.b);
    if (len > kEps) {
      // Strip: 0 <= (p - a).d <= |d|^2 and |cross(d, p - a)| <= r |d|,
      // each linear in x along the scanline.
      double xl = -std::numeric_limits<double>::infinity();
      double xh = std::numeric_limits<double>::infinity();
      bool feasible = true;
      auto bound = [&](double coef, double c0, double rhs_lo, double rhs_hi) {
        // rhs_lo <= coef * x + c0 <= rhs_hi
        if (std::abs(coef) < 1e-12) {
          if (c0 < rhs_lo || c0 > rhs_hi) feasible = false;
          return;
        }
        double a = (rhs_lo - c0) / coef, b = (rhs_hi - c0) / coef;
        if (a > b) std::swap(a, b);
        xl = std::max(xl, a);
        xh = std::min(xh, b);
      };
      const double ry = y - s.a.y;
      bound(d.x, ry * d.y - s.a.x * d.x, 0.0, len * len);
      // cross(d, p - a) = d.x * ry - d.y * (x - a.x)
      bound(-d.y, d.x * ry + d.y * s.a.x, -r * len, r * len);
      if (feasible && xl <= xh) {
        lo = std::min(lo, xl);
        hi = std::max(hi, xh);
      }
    }
    if (lo > hi) continue;
    const int x0 = std::max(0, static_cast<int>(std::ceil(lo)));
    const int x1 = std::min(canvas.width - 1, static_cast<int>(std::floor(hi)));
    for (int x = x0; x <= x1; ++x) out.push_back({x, y});
  }
  return out;
}

inline BitMask rasterize_segment_mask(const Segment2& s, double width, Canvas canvas) {
  BitMask m(canvas.width, canvas.height);
  for (Pixel p : rasterize_segment(s, width, canvas)) m.set(p);
  return m;
}

// ---------------------------------------------------------------------------
// Boundary tracing

namespace detail {

// Moore neighborhood in clockwise screen order starting at west.
inline constexpr std::array<Pixel, 8> kMoore = {
    Pixel{-1, 0}, Pixel{-1, -1}, Pixel{0, -1}, Pixel{1, -1}, Pixel{1, 0}, Pixel{1, 1}, Pixel{0, 1}, Pixel{-1, 1}};

inline int moore_index(Pixel d) {
  for (int i = 0; i < 8; ++i)
    if (kMoore[i] == d) return i;
  return -1;
}

/// Largest 8-connected foreground component; ties go to the one whose first
/// pixel in raster order comes first.
inline BitMask largest_component(const BitMask& m) {
  const int w = m.width(), h = m.height();
  std::vector<int> label(static_cast<size_t>(w) * h, -1);
  int best = -1;
  size_t best_size = 0;
  int next = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m.get(x, y) || label[static_cast<size_t>(y) * w + x] >= 0) continue;
      size_t size = 0;
      std::queue<Pixel> q;
      q.push({x, y});
      label[static_cast<size_t>(y) * w + x] = next;
      while (!q.empty()) {
        const Pixel p = q.front();
        q.pop();
        ++size;
        for (Pixel d : kMoore) {
          const Pixel nb{p.x + d.x, p.y + d.y};
          if (!m.get(nb)) continue;
          auto& l = label[static_cast<size_t>(nb.y) * w + nb.x];
          if (l < 0) {
            l = next;
            q.push(nb);
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best = next;
      }
      ++next;
    }
  BitMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (label[static_cast<size_t>(y) * w + x] == best && best >= 0) out.set(x, y);
  return out;
}

}  // namespace detail

/// Moore-neighbor trace of the largest 8-connected component, returned in
/// counter-clockwise order as displayed (interior on the left of travel).
inline std::vector<Point2> trace_boundary(const BitMask& mask) {
  const BitMask comp = detail::largest_component(mask);
  std::optional<Pixel> start;
  for (int y = 0; y < comp.height() && !start; ++y)
    for (int x = 0; x < comp.width() && !start; ++x)
      if (comp.get(x, y)) start = Pixel{x, y};
  if (!start) throw EmptyMask();

  // Start is the first pixel in raster order, so its west neighbor is
  // background; we entered it from the west.
  std::vector<Pixel> trace{*start};
  Pixel cur = *start;
  Pixel backtrack{start->x - 1, start->y};
  const size_t limit = 8 * comp.count() + 8;
  while (trace.size() <= limit) {
    const int bi = detail::moore_index({backtrack.x - cur.x, backtrack.y - cur.y});
    std::optional<Pixel> found;
    Pixel prev = backtrack;
    for (int k = 1; k <= 8; ++k) {
      const Pixel d = detail::kMoore[(bi + k) % 8];
      const Pixel nb{cur.x + d.x, cur.y + d.y};
      if (comp.get(nb)) {
        found = nb;
        break;
      }
      prev = nb;
    }
    if (!found) break;  // isolated pixel
    // Jacob's stopping criterion: back at the start and about to repeat the
    // first move.
    if (cur == *start && trace.size() > 1 && *found == trace[1]) {
      trace.pop_back();
      break;
    }
    backtrack = prev;
    cur = *found;
    trace.push_back(cur);
  }
  // The raw trace runs clockwise on screen; reverse to counter-clockwise
  // while keeping the start pixel first.
  std::vector<Point2> out;
  out.reserve(trace.size());
  out.push_back({static_cast<double>(trace[0].x), static_cast<double>(trace[0].y)});
  for (size_t i = trace.size(); i-- > 1;)
    out.push_back({static_cast<double>(trace[i].x), static_cast<double>(trace[i].y)});
  return out;
}

/// Outward unit normal at `index` of a closed counter-clockwise boundary.
/// The tangent is the central difference over +-2 samples; the side is
/// chosen by sampling `mask` 2 px along each candidate normal.
inline Point2 outward_normal(std::span<const Point2> boundary, size_t index, const BitMask& mask) {
  const size_t n = boundary.size();
  if (n < 3) throw std::invalid_argument("boundary needs at least 3 points");
  const Point2 t = boundary[(index + 2) % n] - boundary[(index + n - 2) % n];
  const double len = norm(t);
  if (len < kEps) throw DegenerateTangent();
  const Point2 u = (1.0 / len) * t;
  // Right of travel on screen for a counter-clockwise (as displayed) contour.
  const Point2 right{-u.y, u.x};
  const Point2 left{u.y, -u.x};
  const Point2 p = boundary[index % n];
  auto inside = [&](Point2 dir) {
    const Point2 q = p + 2.0 * dir;
    return mask.get(static_cast<int>(std::lround(q.x)), static_cast<int>(std::lround(q.y)));
  };
  const bool in_right = inside(right), in_left = inside(left);
  if (in_right && !in_left) return left;
  return right;
}

/// Outward normals for every boundary index; degenerate tangents reuse the
/// previous index's normal.
inline std::vector<Point2> outward_normals(std::span<const Point2> boundary, const BitMask& mask) {
  std::vector<Point2> out(boundary.size());
  std::optional<Point2> last;
  // Seed with the last valid normal so index 0 can fall back cyclically.
  for (size_t k = boundary.size(); k-- > 0 && !last;) {
    try {
      last = outward_normal(boundary, k, mask);
    } catch (const DegenerateTangent&) {
    }
  }
  if (!last) last = Point2{1.0, 0.0};
  for (size_t i = 0; i < boundary.size(); ++i) {
    try {
      last = outward_normal(boundary, i, mask);
    } catch (const DegenerateTangent&) {
    }
    out[i] = *last;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting and angles

/// Principal-axis fit. For isotropic point clouds the direction is the +x
/// axis.
inline Segment2 fit_line_segment(std::span<const Point2> points) {
  if (points.empty()) throw DegeneratePoints();
  Point2 c{};
  for (Point2 p : points) c = c + p;
  c = (1.0 / static_cast<double>(points.size())) * c;
  double sxx = 0, syy = 0, sxy = 0;
  for (Point2 p : points) {
    const Point2 d = p - c;
    sxx += d.x * d.x;
    syy += d.y * d.y;
    sxy += d.x * d.y;
  }
  if (sxx + syy < kEps) throw DegeneratePoints();
  const double n = static_cast<double>(points.size());
  sxx /= n;
  syy /= n;
  sxy /= n;
  const double half_diff = 0.5 * (sxx - syy);
  const double disc = std::sqrt(half_diff * half_diff + sxy * sxy);
  Point2 dir{1.0, 0.0};
  if (disc > 1e-12) {
    // Leading eigenvector angle of the symmetric 2x2 covariance.
    const double ang = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    dir = {std::cos(ang), std::sin(ang)};
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Point2 p : points) {
    const double t = dot(p - c, dir);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return {c + lo * dir, c + hi * dir};
}

inline double normalize_degrees(double a) {
  double r = std::fmod(a, 360.0);
  if (r < 0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

/// Minimal circular distance in [0, 180].
inline double angular_distance(double a, double b) {
  const double d = normalize_degrees(std::abs(a - b));
  return std::min(d, 360.0 - d);
}

inline constexpr int kDirectionBins = 15;
inline constexpr double kBinWidthDeg = 360.0 / kDirectionBins;

inline int bin_direction(double theta_deg) {
  const int b = static_cast<int>(std::floor(normalize_degrees(theta_deg) / kBinWidthDeg));
  return std::clamp(b, 0, kDirectionBins - 1);
}

inline double bin_center(int bin) { return (bin + 0.5) * kBinWidthDeg; }

/// Direction of travel from `from` to `to` in degrees, counter-clockwise as
/// displayed.
inline double direction_degrees(Point2 from, Point2 to) {
  const Point2 d = to - from;
  return normalize_degrees(std::atan2(-d.y, d.x) * 180.0 / std::numbers::pi);
}

}  // namespace planarip
