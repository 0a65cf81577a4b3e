#pragma once

// Compliance checks for labeled planar partitions, shared-edge consistency,
// and a snapping cleaner for noisy vector input.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "acpv/error.hpp"
#include "acpv/geometry.hpp"
#include "acpv/overlay.hpp"
#include "acpv/partition.hpp"

namespace acpv {

struct Violation {
  char constraint;  // 'a' .. 'f'
  std::string message;
  Point location;
  int polygon = -1;
};

struct ComplianceReport {
  bool planar_partition_ok = true;        // (a)
  bool shared_boundaries_ok = true;       // (b)
  bool zero_gap_overlap_ok = true;        // (c)
  bool linear_geometry_ok = true;         // (d)
  bool semantic_consistency_ok = true;    // (e)
  bool minimal_redundancy_ok = true;      // (f)
  double gap_rate = 0;
  double inter_overlap = 0;
  double intra_overlap = 0;
  double sec = 1;
  bool overlay_rasterized = false;
  std::vector<Violation> violations;

  bool all_ok() const {
    return planar_partition_ok && shared_boundaries_ok && zero_gap_overlap_ok &&
           linear_geometry_ok && semantic_consistency_ok && minimal_redundancy_ok;
  }
};

// ---------------------------------------------------------------------------
// Shared-edge consistency
// ---------------------------------------------------------------------------

struct SecStats {
  std::size_t interior_segments = 0;  // distinct undirected segments off the border
  std::size_t shared_segments = 0;    // ... used by exactly two polygons
  std::size_t overused_segments = 0;  // ... used by more than two polygons
  double sec() const {
    return interior_segments ? double(shared_segments) / double(interior_segments) : 1.0;
  }
};

namespace detail {

struct SegKey {
  double x0, y0, x1, y1;
  friend bool operator<(const SegKey& a, const SegKey& b) {
    return std::tie(a.x0, a.y0, a.x1, a.y1) < std::tie(b.x0, b.y0, b.x1, b.y1);
  }
};

inline SegKey seg_key(Point a, Point b) {
  if (scan_less(b, a)) std::swap(a, b);
  return {a.x, a.y, b.x, b.y};
}

inline bool on_domain_border(Point a, Point b, double W, double H) {
  return (a.x == b.x && (a.x == 0 || a.x == W)) || (a.y == b.y && (a.y == 0 || a.y == H));
}

template <typename Fn>
void for_each_ring(const Partition& p, Fn&& fn) {
  for (std::size_t i = 0; i < p.polygons.size(); ++i) {
    fn(i, p.polygons[i].polygon.outer, true);
    for (const auto& h : p.polygons[i].polygon.holes) fn(i, h, false);
  }
}

// Polygon ids (sorted, distinct) using each exact undirected segment.
inline std::map<SegKey, std::vector<std::uint32_t>> segment_usage(const Partition& p) {
  std::map<SegKey, std::vector<std::uint32_t>> use;
  for_each_ring(p, [&](std::size_t i, const Ring& r, bool) {
    for (std::size_t k = 0, j = r.size() - 1; k < r.size(); j = k++) {
      if (r[j] == r[k]) continue;
      auto& v = use[seg_key(r[j], r[k])];
      if (v.empty() || v.back() != i) v.push_back(std::uint32_t(i));
    }
  });
  return use;
}

}  // namespace detail

inline SecStats shared_edge_consistency(const Partition& p) {
  SecStats s;
  for (const auto& [k, ids] : detail::segment_usage(p)) {
    if (detail::on_domain_border({k.x0, k.y0}, {k.x1, k.y1}, p.width, p.height)) continue;
    ++s.interior_segments;
    std::vector<std::uint32_t> d = ids;
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    if (d.size() == 2) ++s.shared_segments;
    if (d.size() > 2) ++s.overused_segments;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Validator
// ---------------------------------------------------------------------------

/// Checks constraints (a)-(f). Violations are collected, never thrown.
inline ComplianceReport validate_acpv(const Partition& p) {
  ComplianceReport rep;
  const double W = p.width, H = p.height;
  constexpr double kAreaTol = 1e-6;
  auto flag = [&](char c, std::string msg, Point at, int poly) {
    switch (c) {
      case 'a': rep.planar_partition_ok = false; break;
      case 'b': rep.shared_boundaries_ok = false; break;
      case 'c': rep.zero_gap_overlap_ok = false; break;
      case 'd': rep.linear_geometry_ok = false; break;
      case 'e': rep.semantic_consistency_ok = false; break;
      default: rep.minimal_redundancy_ok = false; break;
    }
    rep.violations.push_back({c, std::move(msg), at, poly});
  };

  // (d) first: later checks assume finite coordinates.
  bool finite = true;
  detail::for_each_ring(p, [&](std::size_t i, const Ring& r, bool outer) {
    const int pi = int(i);
    for (Point q : r) {
      if (!std::isfinite(q.x) || !std::isfinite(q.y)) {
        finite = false;
        flag('d', "non-finite coordinate", {}, pi);
        return;
      }
    }
    if (distinct_vertex_count(r) < 3) {
      flag('d', "ring with fewer than 3 distinct vertices", r.empty() ? Point{} : r.front(), pi);
      return;
    }
    if (auto x = ring_self_intersection(r)) flag('d', "self-intersecting ring", *x, pi);
    const double a = signed_area(r);
    if (outer && a <= 0) flag('d', "outer ring is not counter-clockwise", r.front(), pi);
    if (!outer && a >= 0) flag('d', "hole ring is not clockwise", r.front(), pi);
  });
  if (!finite) {
    rep.planar_partition_ok = rep.shared_boundaries_ok = rep.zero_gap_overlap_ok = false;
    rep.sec = 0;
    return rep;
  }
  for (std::size_t i = 0; i < p.polygons.size(); ++i) {
    const Polygon& poly = p.polygons[i].polygon;
    const int pi = int(i);
    // Rings of one polygon may meet only at shared vertices.
    std::vector<Segment> segs;
    std::vector<std::uint32_t> ring_of;
    auto add = [&](const Ring& r, std::uint32_t id) {
      for (std::size_t k = 0, j = r.size() - 1; k < r.size(); j = k++) {
        if (r[j] == r[k]) continue;
        segs.push_back({r[j], r[k]});
        ring_of.push_back(id);
      }
    };
    add(poly.outer, 0);
    for (std::uint32_t h = 0; h < poly.holes.size(); ++h) add(poly.holes[h], h + 1);
    if (!poly.holes.empty()) {
      for_each_box_overlap(std::span<const Segment>(segs), [&](std::uint32_t a, std::uint32_t b) {
        if (ring_of[a] == ring_of[b]) return;
        const auto x = segments_intersect(segs[a].a, segs[a].b, segs[b].a, segs[b].b);
        if (x.kind == SegmentRelation::none) return;
        const bool at_vertices = x.kind == SegmentRelation::point &&
                                 (x.first == segs[a].a || x.first == segs[a].b) &&
                                 (x.first == segs[b].a || x.first == segs[b].b);
        if (!at_vertices) flag('d', "rings of one polygon cross or overlap", x.first, pi);
      });
      for (const Ring& h : poly.holes) {
        for (Point q : h) {
          const Location l = locate_in_ring(q, poly.outer);
          if (l == Location::boundary) continue;
          if (l == Location::outside) flag('d', "hole lies outside its outer ring", q, pi);
          break;
        }
      }
    }
  }

  // (a) and (c) from the exact overlay.
  const OverlayResult ov = compute_overlay(p);
  rep.overlay_rasterized = ov.rasterized;
  rep.gap_rate = ov.gap_rate();
  rep.inter_overlap = ov.inter_rate();
  rep.intra_overlap = ov.intra_rate();
  bool outside = false;
  detail::for_each_ring(p, [&](std::size_t i, const Ring& r, bool) {
    for (Point q : r)
      if (!outside && (q.x < 0 || q.y < 0 || q.x > W || q.y > H)) {
        outside = true;
        flag('a', "vertex outside the domain", q, int(i));
      }
  });
  if (ov.overlap_area > kAreaTol)
    flag('a', "polygon interiors overlap (area " + std::to_string(ov.overlap_area) + ")", {}, -1);
  if (std::abs(ov.covered_area - ov.domain_area) > kAreaTol)
    flag('a', "union area differs from the domain (" + std::to_string(ov.covered_area) + " vs " +
                  std::to_string(ov.domain_area) + ")", {}, -1);
  if (ov.gap_area > kAreaTol) flag('c', "gap area " + std::to_string(ov.gap_area), {}, -1);
  if (ov.inter_area > kAreaTol) flag('c', "inter-class overlap area " + std::to_string(ov.inter_area), {}, -1);
  if (ov.intra_area > kAreaTol) flag('c', "intra-class overlap area " + std::to_string(ov.intra_area), {}, -1);

  // (b) exact shared segments.
  const auto usage = detail::segment_usage(p);
  SecStats sec;
  std::map<Point, std::set<std::pair<double, double>>, ScanOrder> nbrs;
  for (const auto& [k, ids] : usage) {
    const Point a{k.x0, k.y0}, b{k.x1, k.y1};
    nbrs[a].insert({b.x, b.y});
    nbrs[b].insert({a.x, a.y});
    if (detail::on_domain_border(a, b, W, H)) continue;
    ++sec.interior_segments;
    if (ids.size() == 2) {
      ++sec.shared_segments;
    } else if (ids.size() > 2) {
      ++sec.overused_segments;
      flag('b', "segment used by " + std::to_string(ids.size()) + " polygons", 0.5 * (a + b), int(ids[0]));
    } else {
      flag('b', "interior segment not shared by exactly two polygons", 0.5 * (a + b), int(ids[0]));
    }
  }
  rep.sec = sec.sec();

  // (e) adjacency through any collinear overlap of positive length.
  {
    std::vector<Segment> segs;
    std::vector<std::uint32_t> owner;
    detail::for_each_ring(p, [&](std::size_t i, const Ring& r, bool) {
      for (std::size_t k = 0, j = r.size() - 1; k < r.size(); j = k++) {
        if (r[j] == r[k]) continue;
        segs.push_back({r[j], r[k]});
        owner.push_back(std::uint32_t(i));
      }
    });
    std::set<std::pair<std::uint32_t, std::uint32_t>> reported;
    for_each_box_overlap(std::span<const Segment>(segs), [&](std::uint32_t a, std::uint32_t b) {
      const std::uint32_t pa = owner[a], pb = owner[b];
      if (pa == pb || p.polygons[pa].cls != p.polygons[pb].cls) return;
      const auto x = segments_intersect(segs[a].a, segs[a].b, segs[b].a, segs[b].b);
      if (x.kind != SegmentRelation::overlap) return;
      if (reported.insert({std::min(pa, pb), std::max(pa, pb)}).second)
        flag('e', "adjacent polygons " + std::to_string(std::min(pa, pb)) + " and " +
                      std::to_string(std::max(pa, pb)) + " share class " +
                      std::to_string(p.polygons[pa].cls),
             0.5 * (x.first + x.second), int(std::min(pa, pb)));
    });
  }

  // (f) zero-length edges and collinear degree-2 vertices.
  detail::for_each_ring(p, [&](std::size_t i, const Ring& r, bool) {
    const std::size_t n = r.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Point a = r[(k + n - 1) % n], b = r[k], c = r[(k + 1) % n];
      if (a == b) {
        flag('f', "zero-length edge", b, int(i));
        continue;
      }
      if (b == c) continue;
      const double cr = cross(b - a, c - b);
      if (std::abs(cr) > 1e-9 || dot(b - a, c - b) <= 0) continue;
      const auto it = nbrs.find(b);
      if (it != nbrs.end() && it->second.size() > 2) continue;  // junction
      flag('f', "redundant collinear vertex", b, int(i));
    }
  });
  return rep;
}

// ---------------------------------------------------------------------------
// Snapping
// ---------------------------------------------------------------------------

namespace detail {

// Merges points closer than tol (transitively) into their cluster centroid.
// Returns true if anything moved.
inline bool snap_vertices(Partition& p, double tol) {
  std::vector<Point*> refs;
  for (auto& lp : p.polygons) {
    for (auto& q : lp.polygon.outer) refs.push_back(&q);
    for (auto& h : lp.polygon.holes)
      for (auto& q : h) refs.push_back(&q);
  }
  // Distinct positions first so duplicates don't bias centroids.
  std::vector<Point> pts;
  for (Point* r : refs) pts.push_back(*r);
  std::sort(pts.begin(), pts.end(), ScanOrder{});
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const double cell = std::max(tol, 1e-12);
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid;
  auto key = [](std::int64_t gx, std::int64_t gy) { return (gx << 32) ^ (gy & 0xffffffff); };
  for (std::uint32_t i = 0; i < n; ++i)
    grid[key(std::int64_t(std::floor(pts[i].x / cell)), std::int64_t(std::floor(pts[i].y / cell)))].push_back(i);
  bool merged = false;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto gx = std::int64_t(std::floor(pts[i].x / cell));
    const auto gy = std::int64_t(std::floor(pts[i].y / cell));
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const auto it = grid.find(key(gx + dx, gy + dy));
        if (it == grid.end()) continue;
        for (std::uint32_t j : it->second) {
          if (j <= i || distance(pts[i], pts[j]) > tol) continue;
          const auto a = find(i), b = find(j);
          if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
            merged = true;
          }
        }
      }
  }
  if (!merged) return false;
  std::vector<Point> sum(n, Point{});
  std::vector<std::uint32_t> count(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto r = find(i);
    sum[r] = sum[r] + pts[i];
    ++count[r];
  }
  auto rep_of = [&](Point q) {
    const auto it = std::lower_bound(pts.begin(), pts.end(), q, ScanOrder{});
    const auto r = find(std::uint32_t(it - pts.begin()));
    return (1.0 / count[r]) * sum[r];
  };
  bool moved = false;
  for (Point* r : refs) {
    const Point q = rep_of(*r);
    if (!(q == *r)) {
      *r = q;
      moved = true;
    }
  }
  return moved;
}

// Inserts vertices lying within tol of another ring's segment into that
// segment. Returns true if any ring changed.
inline bool snap_to_edges(Partition& p, double tol) {
  std::vector<Point> pts;
  for_each_ring(p, [&](std::size_t, const Ring& r, bool) { pts.insert(pts.end(), r.begin(), r.end()); });
  std::sort(pts.begin(), pts.end(), ScanOrder{});
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Segment> segs;
  for_each_ring(p, [&](std::size_t, const Ring& r, bool) {
    for (std::size_t k = 0, j = r.size() - 1; k < r.size(); j = k++) segs.push_back({r[j], r[k]});
  });
  if (segs.empty()) return false;
  SegmentIndex index(segs);
  // segment (a, b) -> points to insert
  std::map<SegKey, std::vector<Point>> inserts;
  for (Point q : pts) {
    index.candidates(q, tol, [&](std::uint32_t s) {
      const Segment& sg = segs[s];
      if (sg.a == q || sg.b == q || sg.a == sg.b) return;
      if (point_segment_distance(q, sg.a, sg.b) > tol) return;
      const Point d = sg.b - sg.a;
      const double t = dot(q - sg.a, d) / dot(d, d);
      if (t <= 0 || t >= 1) return;
      auto& v = inserts[seg_key(sg.a, sg.b)];
      if (std::find(v.begin(), v.end(), q) == v.end()) v.push_back(q);
    });
  }
  if (inserts.empty()) return false;
  auto fix = [&](Ring& r) {
    Ring out;
    for (std::size_t k = 0; k < r.size(); ++k) {
      const Point a = r[k], b = r[(k + 1) % r.size()];
      out.push_back(a);
      const auto it = inserts.find(seg_key(a, b));
      if (it == inserts.end()) continue;
      std::vector<Point> add = it->second;
      std::sort(add.begin(), add.end(), [&](Point u, Point v) { return distance(a, u) < distance(a, v); });
      out.insert(out.end(), add.begin(), add.end());
    }
    r = std::move(out);
  };
  for (auto& lp : p.polygons) {
    fix(lp.polygon.outer);
    for (auto& h : lp.polygon.holes) fix(h);
  }
  return true;
}

}  // namespace detail

/// Merges vertices closer than `tolerance`, snaps vertices onto nearby
/// segments, and drops duplicate points and collapsed rings. A partition
/// that already validates is returned unchanged; the operation is
/// idempotent.
inline Partition snap_and_clean(const Partition& in, double tolerance) {
  if (tolerance < 0) throw Error("snap_and_clean: tolerance must be >= 0");
  if (tolerance == 0 || validate_acpv(in).all_ok()) return in;
  Partition p = in;
  for (int iter = 0; iter < 64; ++iter) {
    const bool a = detail::snap_vertices(p, tolerance);
    const bool b = detail::snap_to_edges(p, tolerance);
    if (!a && !b) break;
  }
  Partition out;
  out.width = p.width;
  out.height = p.height;
  for (std::size_t i = 0; i < p.polygons.size(); ++i) {
    auto& lp = p.polygons[i];
    Ring outer = dedupe_ring(lp.polygon.outer);
    if (distinct_vertex_count(outer) < 3 || signed_area(outer) == 0) continue;
    LabeledPolygon q;
    q.cls = lp.cls;
    q.polygon.outer = std::move(outer);
    for (auto& h : lp.polygon.holes) {
      Ring hr = dedupe_ring(h);
      if (distinct_vertex_count(hr) >= 3 && signed_area(hr) != 0) q.polygon.holes.push_back(std::move(hr));
    }
    out.polygons.push_back(std::move(q));
  }
  for (std::size_t i = 0; i < out.polygons.size(); ++i) {
    const auto& poly = out.polygons[i].polygon;
    auto check = [&](const Ring& r, const std::string& name) {
      if (auto x = ring_self_intersection(r))
        throw Error("snap_and_clean: polygon " + std::to_string(i) + " " + name +
                    " self-intersects at (" + std::to_string(x->x) + ", " + std::to_string(x->y) + ")");
    };
    check(poly.outer, "outer ring");
    for (std::size_t h = 0; h < poly.holes.size(); ++h) check(poly.holes[h], "hole " + std::to_string(h));
  }
  return out;
}

}  // namespace acpv
