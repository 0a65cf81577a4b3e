#pragma once

// Planar primitives shared by every other part of the library.
//
// Coordinates live on the pixel-corner lattice: origin top-left, x right,
// y down, pixel (i, j) occupies [i, i+1] x [j, j+1]. "Counter-clockwise"
// always means positive shoelace area on the raw (x, y) values.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "acpv/error.hpp"

namespace acpv {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Lexicographic (y, x) order; the scan order used for every deterministic
/// tie-break in the library.
inline bool scan_less(Point a, Point b) {
  return a.y < b.y || (a.y == b.y && a.x < b.x);
}

struct ScanOrder {
  bool operator()(Point a, Point b) const { return scan_less(a, b); }
};

/// Closed ring without the repeated closing vertex.
using Ring = std::vector<Point>;

struct Polyline {
  std::vector<Point> points;
};

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

struct Box {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void expand(Point p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  bool contains(const Box& o) const {
    return o.min_x >= min_x && o.max_x <= max_x && o.min_y >= min_y && o.max_y <= max_y;
  }
  bool contains(Point p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  bool overlaps(const Box& o) const {
    return o.min_x <= max_x && min_x <= o.max_x && o.min_y <= max_y && min_y <= o.max_y;
  }
};

inline Box bounds(std::span<const Point> pts) {
  Box b;
  for (Point p : pts) b.expand(p);
  return b;
}

// ---------------------------------------------------------------------------
// Robust orientation
// ---------------------------------------------------------------------------

namespace detail {

inline void two_sum(double a, double b, double& sum, double& err) {
  sum = a + b;
  const double bv = sum - a;
  const double av = sum - bv;
  err = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& prod, double& err) {
  prod = a * b;
  err = std::fma(a, b, -prod);
}

// Shewchuk's Grow-Expansion: adds b to a nonoverlapping expansion in place.
template <std::size_t N>
void grow_expansion(std::array<double, N>& e, std::size_t& len, double b) {
  double q = b;
  for (std::size_t i = 0; i < len; ++i) {
    double s, h;
    two_sum(q, e[i], s, h);
    e[i] = h;
    q = s;
  }
  e[len++] = q;
}

inline int exact_orientation(Point a, Point b, Point c) {
  // (ax-cx)(by-cy) - (ay-cy)(bx-cx) expanded into six exact products.
  const std::array<std::array<double, 2>, 6> terms{{{a.x, b.y},
                                                    {-a.x, c.y},
                                                    {-c.x, b.y},
                                                    {-a.y, b.x},
                                                    {a.y, c.x},
                                                    {c.y, b.x}}};
  std::array<double, 13> e{};
  std::size_t len = 0;
  for (const auto& t : terms) {
    double p, err;
    two_product(t[0], t[1], p, err);
    grow_expansion(e, len, err);
    grow_expansion(e, len, p);
  }
  // Nonoverlapping expansion: the most significant nonzero component has
  // the sign of the whole sum. 13 slots are enough since every grow adds one.
  for (std::size_t i = len; i-- > 0;) {
    if (e[i] > 0) return 1;
    if (e[i] < 0) return -1;
  }
  return 0;
}

}  // namespace detail

/// Sign of cross(b - a, c - a): +1 for a counter-clockwise turn, -1 for
/// clockwise, 0 for collinear. Exact for all finite doubles.
inline int orientation(Point a, Point b, Point c) {
  const double left = (a.x - c.x) * (b.y - c.y);
  const double right = (a.y - c.y) * (b.x - c.x);
  const double det = left - right;
  const double bound = 3.3306690738754716e-16 * (std::abs(left) + std::abs(right));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  if (left == 0.0 && right == 0.0) return 0;
  return detail::exact_orientation(a, b, c);
}

// ---------------------------------------------------------------------------
// Areas, distances, containment
// ---------------------------------------------------------------------------

inline double signed_area(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) s += cross(ring[j], ring[i]);
  return 0.5 * s;
}

inline double area(const Polygon& poly) {
  double a = std::abs(signed_area(poly.outer));
  for (const auto& h : poly.holes) a -= std::abs(signed_area(h));
  return a;
}

inline std::size_t vertex_count(const Polygon& poly) {
  std::size_t n = poly.outer.size();
  for (const auto& h : poly.holes) n += h.size();
  return n;
}

inline double point_segment_distance(Point p, Point a, Point b) {
  const Point d = b - a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
  return distance(p, a + t * d);
}

inline Point closest_point_on_segment(Point p, Point a, Point b) {
  const Point d = b - a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
  return a + t * d;
}

/// True when p lies on the closed segment [a, b].
inline bool on_segment(Point p, Point a, Point b) {
  if (orientation(a, b, p) != 0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

namespace detail {

inline bool degenerate(std::span<const Point> pts) {
  return std::all_of(pts.begin(), pts.end(), [&](Point p) { return p == pts.front(); });
}

}  // namespace detail

/// Minimum distance from p to a closed ring boundary.
inline double point_to_ring_distance(Point p, std::span<const Point> ring) {
  if (ring.empty() || detail::degenerate(ring))
    throw Error("point_to_boundary_distance: degenerate boundary");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
    best = std::min(best, point_segment_distance(p, ring[j], ring[i]));
  return best;
}

/// Minimum distance from p to an open polyline.
inline double point_to_polyline_distance(Point p, std::span<const Point> line) {
  if (line.size() < 2 || detail::degenerate(line))
    throw Error("point_to_boundary_distance: degenerate boundary");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < line.size(); ++i)
    best = std::min(best, point_segment_distance(p, line[i - 1], line[i]));
  return best;
}

inline double point_to_boundary_distance(Point p, const Polyline& line) {
  return point_to_polyline_distance(p, line.points);
}

/// Distance to the full boundary of a polygon, holes included.
inline double point_to_boundary_distance(Point p, const Polygon& poly) {
  double best = point_to_ring_distance(p, poly.outer);
  for (const auto& h : poly.holes) best = std::min(best, point_to_ring_distance(p, h));
  return best;
}

enum class Location { outside, boundary, inside };

/// Exact point-in-ring classification (crossing parity, boundary detected
/// with the orientation predicate).
inline Location locate_in_ring(Point p, std::span<const Point> ring) {
  const std::size_t n = ring.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = ring[j];
    const Point b = ring[i];
    if (on_segment(p, a, b)) return Location::boundary;
    if ((a.y > p.y) != (b.y > p.y)) {
      // Crossing to the right of p? Sign-exact via orientation.
      const int o = orientation(a, b, p);
      if ((b.y > a.y) ? o > 0 : o < 0) inside = !inside;
    }
  }
  return inside ? Location::inside : Location::outside;
}

inline Location locate_in_polygon(Point p, const Polygon& poly) {
  const Location outer = locate_in_ring(p, poly.outer);
  if (outer != Location::inside) return outer;
  for (const auto& h : poly.holes) {
    const Location l = locate_in_ring(p, h);
    if (l == Location::boundary) return Location::boundary;
    if (l == Location::inside) return Location::outside;
  }
  return Location::inside;
}

inline bool point_in_polygon(Point p, const Polygon& poly) {
  return locate_in_polygon(p, poly) == Location::inside;
}

// ---------------------------------------------------------------------------
// Segment intersection
// ---------------------------------------------------------------------------

enum class SegmentRelation { none, point, overlap };

struct SegmentIntersection {
  SegmentRelation kind = SegmentRelation::none;
  Point first;   // the crossing point, or one end of the overlap
  Point second;  // other end of the overlap (== first for a point)
};

/// Classifies [a1, a2] against [b1, b2]. With `adjacent`, the two segments
/// are consecutive in a chain (a2 == b1) and touching at that shared
/// endpoint alone is reported as `none`.
inline SegmentIntersection segments_intersect(Point a1, Point a2, Point b1, Point b2,
                                              bool adjacent = false) {
  const int o1 = orientation(a1, a2, b1);
  const int o2 = orientation(a1, a2, b2);
  const int o3 = orientation(b1, b2, a1);
  const int o4 = orientation(b1, b2, a2);

  if (o1 == 0 && o2 == 0) {
    // Collinear: project on the dominant axis.
    const bool use_x = std::abs(a2.x - a1.x) >= std::abs(a2.y - a1.y);
    auto key = [&](Point p) { return use_x ? p.x : p.y; };
    Point alo = a1, ahi = a2, blo = b1, bhi = b2;
    if (key(alo) > key(ahi)) std::swap(alo, ahi);
    if (key(blo) > key(bhi)) std::swap(blo, bhi);
    const Point lo = key(alo) >= key(blo) ? alo : blo;
    const Point hi = key(ahi) <= key(bhi) ? ahi : bhi;
    if (key(lo) > key(hi)) return {};
    if (key(lo) == key(hi)) {
      if (adjacent && lo == a2) return {};
      return {SegmentRelation::point, lo, lo};
    }
    return {SegmentRelation::overlap, lo, hi};
  }

  if (o1 != o2 && o3 != o4) {
    // Adjacent non-collinear segments may only meet at the shared vertex.
    if (adjacent && a2 == b1) return {};
    if (o1 == 0) return {SegmentRelation::point, b1, b1};
    if (o2 == 0) return {SegmentRelation::point, b2, b2};
    if (o3 == 0) return {SegmentRelation::point, a1, a1};
    if (o4 == 0) return {SegmentRelation::point, a2, a2};
    const Point r = a2 - a1;
    const Point s = b2 - b1;
    const double t = cross(b1 - a1, s) / cross(r, s);
    const Point x = a1 + t * r;
    return {SegmentRelation::point, x, x};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Polyline simplification
// ---------------------------------------------------------------------------

/// Douglas-Peucker on points[first..last], returning kept indices (sorted,
/// endpoints included). A point survives iff its distance to the current
/// chord exceeds epsilon; ties on the farthest point keep the earliest index.
inline std::vector<std::size_t> douglas_peucker_indices(std::span<const Point> points,
                                                        double epsilon) {
  std::vector<std::size_t> kept;
  const std::size_t n = points.size();
  if (n == 0) return kept;
  if (n <= 2) {
    kept.resize(n);
    std::iota(kept.begin(), kept.end(), 0);
    return kept;
  }
  std::vector<char> keep(n, 0);
  keep.front() = keep.back() = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    if (hi <= lo + 1) continue;
    double dmax = -1.0;
    std::size_t imax = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const double d = point_segment_distance(points[i], points[lo], points[hi]);
      if (d > dmax) {
        dmax = d;
        imax = i;
      }
    }
    if (dmax > epsilon) {
      keep[imax] = 1;
      stack.emplace_back(imax, hi);
      stack.emplace_back(lo, imax);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) kept.push_back(i);
  return kept;
}

inline Polyline douglas_peucker(const Polyline& line, double epsilon) {
  if (epsilon < 0) throw Error("douglas_peucker: epsilon must be >= 0");
  Polyline out;
  for (std::size_t i : douglas_peucker_indices(line.points, epsilon))
    out.points.push_back(line.points[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Interior points
// ---------------------------------------------------------------------------

namespace detail {

// Horizontal crossings of every ring at height y (y must avoid vertices).
inline void ring_crossings(std::span<const Point> ring, double y, std::vector<double>& xs) {
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point a = ring[j];
    const Point b = ring[i];
    if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
  }
}

}  // namespace detail

/// A point strictly inside the outer ring and outside every hole. Scans
/// horizontal lines between distinct vertex heights, widest gap first, and
/// returns the midpoint of the widest interior span found.
inline Point interior_point(const Polygon& poly) {
  std::vector<double> ys;
  ys.reserve(vertex_count(poly));
  for (Point p : poly.outer) ys.push_back(p.y);
  for (const auto& h : poly.holes)
    for (Point p : h) ys.push_back(p.y);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<std::pair<double, double>> gaps;  // (width, mid-y)
  for (std::size_t i = 1; i < ys.size(); ++i)
    gaps.emplace_back(ys[i] - ys[i - 1], 0.5 * (ys[i] + ys[i - 1]));
  std::stable_sort(gaps.begin(), gaps.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<double> xs;
  double best_width = 0.0;
  Point best{};
  std::size_t tried = 0;
  for (const auto& [gap, y] : gaps) {
    if (gap <= 0) break;
    if (tried >= 16 && best_width > 0) break;
    ++tried;
    xs.clear();
    detail::ring_crossings(poly.outer, y, xs);
    for (const auto& h : poly.holes) detail::ring_crossings(h, y, xs);
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double w = xs[k + 1] - xs[k];
      if (w > best_width) {
        const Point c{0.5 * (xs[k] + xs[k + 1]), y};
        if (locate_in_polygon(c, poly) == Location::inside) {
          best_width = w;
          best = c;
        }
      }
    }
  }
  if (best_width <= 0) throw Error("interior_point: polygon has an empty interior");
  return best;
}

// ---------------------------------------------------------------------------
// Segment sweep
// ---------------------------------------------------------------------------

struct Segment {
  Point a;
  Point b;
};

/// Calls visit(i, j) (i < j) for every pair of segments whose bounding boxes
/// overlap, using a sweep over x-sorted boxes.
template <typename Visit>
void for_each_box_overlap(std::span<const Segment> segs, Visit&& visit) {
  std::vector<std::uint32_t> order(segs.size());
  std::iota(order.begin(), order.end(), 0u);
  auto xmin = [&](std::uint32_t i) { return std::min(segs[i].a.x, segs[i].b.x); };
  auto xmax = [&](std::uint32_t i) { return std::max(segs[i].a.x, segs[i].b.x); };
  std::sort(order.begin(), order.end(), [&](std::uint32_t l, std::uint32_t r) {
    const double xl = xmin(l), xr = xmin(r);
    return xl < xr || (xl == xr && l < r);
  });
  std::vector<std::uint32_t> active;
  for (std::uint32_t idx : order) {
    const double x0 = xmin(idx);
    std::erase_if(active, [&](std::uint32_t a) { return xmax(a) < x0; });
    const double y0 = std::min(segs[idx].a.y, segs[idx].b.y);
    const double y1 = std::max(segs[idx].a.y, segs[idx].b.y);
    for (std::uint32_t a : active) {
      const double ay0 = std::min(segs[a].a.y, segs[a].b.y);
      const double ay1 = std::max(segs[a].a.y, segs[a].b.y);
      if (ay0 <= y1 && y0 <= ay1) visit(std::min(a, idx), std::max(a, idx));
    }
    active.push_back(idx);
  }
}

// ---------------------------------------------------------------------------
// Uniform grid over segments for nearest-boundary queries
// ---------------------------------------------------------------------------

class SegmentIndex {
 public:
  SegmentIndex() = default;

  explicit SegmentIndex(std::vector<Segment> segments, double cell = 0.0)
      : segments_(std::move(segments)) {
    Box box;
    for (const auto& s : segments_) {
      box.expand(s.a);
      box.expand(s.b);
    }
    if (segments_.empty()) return;
    origin_ = {box.min_x, box.min_y};
    const double extent = std::max({box.max_x - box.min_x, box.max_y - box.min_y, 1.0});
    if (cell <= 0)
      cell = std::max(1.0, extent / std::max(1.0, std::sqrt(double(segments_.size()))));
    cell_ = cell;
    nx_ = static_cast<int>((box.max_x - box.min_x) / cell_) + 1;
    ny_ = static_cast<int>((box.max_y - box.min_y) / cell_) + 1;
    std::vector<std::uint32_t> counts(std::size_t(nx_) * ny_ + 1, 0);
    auto each_cell = [&](const Segment& s, auto&& fn) {
      const int cx0 = cx(std::min(s.a.x, s.b.x)), cx1 = cx(std::max(s.a.x, s.b.x));
      const int cy0 = cy(std::min(s.a.y, s.b.y)), cy1 = cy(std::max(s.a.y, s.b.y));
      for (int y = cy0; y <= cy1; ++y)
        for (int x = cx0; x <= cx1; ++x) fn(std::size_t(y) * nx_ + x);
    };
    for (const auto& s : segments_) each_cell(s, [&](std::size_t c) { ++counts[c + 1]; });
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    offsets_ = counts;
    items_.resize(offsets_.back());
    for (std::uint32_t i = 0; i < segments_.size(); ++i)
      each_cell(segments_[i], [&](std::size_t c) { items_[counts[c]++] = i; });
  }

  bool empty() const { return segments_.empty(); }
  std::span<const Segment> segments() const { return segments_; }

  struct Hit {
    double distance = std::numeric_limits<double>::infinity();
    std::uint32_t segment = std::numeric_limits<std::uint32_t>::max();
  };

  /// Nearest segment to p; ties (within 1e-12) resolve to the lowest index.
  Hit nearest(Point p, double max_distance = std::numeric_limits<double>::infinity()) const {
    Hit best;
    if (segments_.empty()) return best;
    const int px = std::clamp(cx(p.x), 0, nx_ - 1);
    const int py = std::clamp(cy(p.y), 0, ny_ - 1);
    // Distance from p to the grid box, so rings start where data begins.
    const double gx = std::max({origin_.x - p.x, 0.0, p.x - (origin_.x + nx_ * cell_)});
    const double gy = std::max({origin_.y - p.y, 0.0, p.y - (origin_.y + ny_ * cell_)});
    const double outside = std::hypot(gx, gy);
    const int max_ring = std::max(nx_, ny_);
    for (int ring = 0; ring <= max_ring; ++ring) {
      // Lower bound on the distance to any cell in this ring.
      const double reach = std::max(outside, (ring - 1) * cell_);
      if (ring > 0 && reach > best.distance + 1e-12) break;
      if (reach > max_distance) break;
      for (int y = py - ring; y <= py + ring; ++y) {
        if (y < 0 || y >= ny_) continue;
        const bool edge_row = (y == py - ring || y == py + ring);
        for (int x = px - ring; x <= px + ring; x += (edge_row ? 1 : 2 * ring)) {
          if (x >= 0 && x < nx_) scan_cell(std::size_t(y) * nx_ + x, p, best);
          if (ring == 0) break;
        }
      }
    }
    if (best.distance > max_distance) return {};
    return best;
  }

  /// Visits every segment index whose cells intersect the disk (p, r); a
  /// segment may be reported more than once.
  template <typename Fn>
  void candidates(Point p, double r, Fn&& fn) const {
    if (segments_.empty()) return;
    const int x0 = std::max(0, cx(p.x - r)), x1 = std::min(nx_ - 1, cx(p.x + r));
    const int y0 = std::max(0, cy(p.y - r)), y1 = std::min(ny_ - 1, cy(p.y + r));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const std::size_t c = std::size_t(y) * nx_ + x;
        for (std::uint32_t k = offsets_[c]; k < offsets_[c + 1]; ++k) fn(items_[k]);
      }
  }

 private:
  int cx(double x) const { return std::clamp(int(std::floor((x - origin_.x) / cell_)), -1, nx_); }
  int cy(double y) const { return std::clamp(int(std::floor((y - origin_.y) / cell_)), -1, ny_); }

  void scan_cell(std::size_t c, Point p, Hit& best) const {
    for (std::uint32_t k = offsets_[c]; k < offsets_[c + 1]; ++k) {
      const std::uint32_t i = items_[k];
      const double d = point_segment_distance(p, segments_[i].a, segments_[i].b);
      if (d < best.distance - 1e-12 || (std::abs(d - best.distance) <= 1e-12 && i < best.segment))
        best = {d, i};
    }
  }

  std::vector<Segment> segments_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> items_;
  Point origin_{};
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
};

/// Removes consecutive duplicate vertices (cyclically).
inline Ring dedupe_ring(const Ring& ring) {
  Ring out;
  out.reserve(ring.size());
  for (Point p : ring)
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  while (out.size() > 1 && out.back() == out.front()) out.pop_back();
  return out;
}

inline std::size_t distinct_vertex_count(const Ring& ring) {
  std::vector<Point> pts(ring);
  std::sort(pts.begin(), pts.end(), ScanOrder{});
  return std::unique(pts.begin(), pts.end()) - pts.begin();
}

/// First self-contact of a ring other than the shared vertex of consecutive
/// edges, or nullopt for a simple ring. Zero-length edges are ignored.
inline std::optional<Point> ring_self_intersection(const Ring& ring) {
  const Ring r = dedupe_ring(ring);
  const std::size_t n = r.size();
  if (n < 3) return n ? std::optional<Point>(r.front()) : std::nullopt;
  std::vector<Segment> segs(n);
  for (std::size_t i = 0; i < n; ++i) segs[i] = {r[i], r[(i + 1) % n]};
  std::optional<Point> hit;
  for_each_box_overlap(std::span<const Segment>(segs), [&](std::uint32_t i, std::uint32_t j) {
    if (hit) return;
    SegmentIntersection x;
    if (j == i + 1)
      x = segments_intersect(segs[i].a, segs[i].b, segs[j].a, segs[j].b, true);
    else if (i == 0 && j == n - 1)
      x = segments_intersect(segs[j].a, segs[j].b, segs[i].a, segs[i].b, true);
    else
      x = segments_intersect(segs[i].a, segs[i].b, segs[j].a, segs[j].b);
    if (x.kind != SegmentRelation::none) hit = x.first;
  });
  return hit;
}

/// Appends the closed-ring segments of poly (holes included).
inline void append_boundary_segments(const Polygon& poly, std::vector<Segment>& out) {
  auto add = [&](const Ring& r) {
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) out.push_back({r[j], r[i]});
  };
  add(poly.outer);
  for (const auto& h : poly.holes) add(h);
}

}  // namespace acpv
