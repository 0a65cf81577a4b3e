#pragma once

// Reduction of the overdense graph to a vertex-minimal one. A simplification
// is expressed as a selection: for every chain, the (sorted) positions of the
// chain vertices that survive. Selections always keep chain endpoints, so
// anchors are never lost and no coordinate is ever invented.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "acpv/assemble.hpp"
#include "acpv/geometry.hpp"
#include "acpv/partition.hpp"
#include "acpv/pslg.hpp"
#include "acpv/raster.hpp"

namespace acpv {

// ---------------------------------------------------------------------------
// Peaks
// ---------------------------------------------------------------------------

struct Peak {
  int col = 0;
  int row = 0;
  float score = 0;

  /// Centre of the peak cell.
  Point center() const { return {col + 0.5, row + 0.5}; }
  /// Lattice corner sampled by the peak cell (see render_heatmap).
  Point site() const { return {double(col), double(row)}; }
};

/// 3x3 non-maximum suppression. A cell is a peak when its value is positive,
/// at least `threshold`, and beats every neighbour; an equal neighbour only
/// suppresses it when that neighbour comes earlier in row-major order.
inline std::vector<Peak> extract_peaks(const Heatmap& hm, float threshold) {
  std::vector<Peak> peaks;
  for (int y = 0; y < hm.height; ++y) {
    for (int x = 0; x < hm.width; ++x) {
      const float v = hm.at(x, y);
      if (!(v >= threshold) || v <= 0.f) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= hm.width || ny >= hm.height) continue;
          const float n = hm.at(nx, ny);
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (n > v || (n == v && earlier)) {
            peak = false;
            break;
          }
        }
      }
      if (peak) peaks.push_back({x, y, v});
    }
  }
  return peaks;
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

struct ProjectionOptions {
  double tau = 3.0;
  /// Keypoints that land this close to an anchor are absorbed by it.
  double anchor_merge_radius = 1.5;
};

/// Per chain: sorted, distinct positions of keypoints on that chain.
using Keypoints = std::vector<std::vector<std::uint32_t>>;

inline Keypoints project_peaks(const std::vector<Point>& sites, const Pslg& g, const ChainSet& cs,
                               const ProjectionOptions& opt = {}) {
  if (!(opt.tau > 0)) throw Error("project_peaks: tau must be > 0");
  Keypoints kp(cs.chains.size());
  std::vector<Segment> segs;
  std::vector<std::uint32_t> seg_chain;
  for (std::uint32_t c = 0; c < cs.chains.size(); ++c) {
    const auto& vs = cs.chains[c].vertices;
    for (std::size_t i = 1; i < vs.size(); ++i) {
      segs.push_back({g.vertex(vs[i - 1]).point(), g.vertex(vs[i]).point()});
      seg_chain.push_back(c);
    }
  }
  std::vector<Segment> anchor_pts;
  for (std::uint32_t a : cs.anchors) anchor_pts.push_back({g.vertex(a).point(), g.vertex(a).point()});
  const SegmentIndex seg_index(segs, 4.0);
  const SegmentIndex anchor_index(anchor_pts, 4.0);

  for (Point s : sites) {
    const auto hit = seg_index.nearest(s, opt.tau);
    if (hit.segment == kNone || hit.distance > opt.tau) continue;
    std::uint32_t chain = seg_chain[hit.segment];
    seg_index.candidates(s, hit.distance + 1e-9, [&](std::uint32_t k) {
      if (seg_chain[k] < chain &&
          point_segment_distance(s, segs[k].a, segs[k].b) <= hit.distance + 1e-9)
        chain = seg_chain[k];
    });
    const auto& vs = cs.chains[chain].vertices;
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t i = 0; i < vs.size(); ++i) {
      const double d = distance(s, g.vertex(vs[i]).point());
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    const Point snapped = g.vertex(vs[best]).point();
    if (!anchor_index.empty() &&
        anchor_index.nearest(snapped, opt.anchor_merge_radius).distance <= opt.anchor_merge_radius)
      continue;
    kp[chain].push_back(best);
  }
  for (auto& k : kp) {
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
  }
  return kp;
}

inline Keypoints project_peaks(const std::vector<Peak>& peaks, const Pslg& g, const ChainSet& cs,
                               const ProjectionOptions& opt = {}) {
  std::vector<Point> sites;
  sites.reserve(peaks.size());
  for (const Peak& p : peaks) sites.push_back(p.site());
  return project_peaks(sites, g, cs, opt);
}

// ---------------------------------------------------------------------------
// Selections
// ---------------------------------------------------------------------------

/// Kept chain positions, sorted. Open chains keep 0 and the last position.
/// Closed chains store positions modulo their vertex count M (position M
/// aliases 0) and close with a wrap segment from the last kept position back
/// to the first; anchored closed chains always keep 0.
using Selection = std::vector<std::vector<std::uint32_t>>;

namespace detail {

struct ChainView {
  const Pslg& g;
  const Chain& c;

  bool closed() const { return c.closed(); }
  std::uint32_t period() const { return std::uint32_t(c.vertices.size() - 1); }
  std::uint32_t vertex(std::uint32_t pos) const {
    return closed() ? c.vertices[pos % period()] : c.vertices[pos];
  }
  Point point(std::uint32_t pos) const { return g.vertex(vertex(pos)).point(); }

  /// Arc length at every position; closed chains cover two periods.
  std::vector<double> arc() const {
    const std::uint32_t n = closed() ? 2 * period() + 1 : std::uint32_t(c.vertices.size());
    std::vector<double> s(n, 0.0);
    for (std::uint32_t i = 1; i < n; ++i) s[i] = s[i - 1] + distance(point(i - 1), point(i));
    return s;
  }

  /// Segments of a selection as (lo, hi) positions, hi > lo, hi may exceed
  /// the period for the wrap segment.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> segments(const std::vector<std::uint32_t>& k) const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::size_t i = 0; i + 1 < k.size(); ++i) out.emplace_back(k[i], k[i + 1]);
    if (closed() && !k.empty()) out.emplace_back(k.back(), k.front() + period());
    return out;
  }
};

inline std::uint32_t nearest_by_arc(const std::vector<double>& s, double target, std::uint32_t lo,
                                    std::uint32_t hi) {
  std::uint32_t best = lo;
  double bd = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = lo; i <= hi; ++i) {
    const double d = std::abs(s[i] - target);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

inline void normalize(const ChainView& v, std::vector<std::uint32_t>& k) {
  if (v.closed())
    for (auto& p : k) p %= v.period();
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
}

// Tops a closed selection up to three retained positions spread by arc
// length, then makes sure they do not all lie on one line.
inline void ensure_ring(const ChainView& v, std::vector<std::uint32_t>& k) {
  const std::uint32_t M = v.period();
  const auto s = v.arc();
  const double L = s[M];
  normalize(v, k);
  auto add_at = [&](double target) {
    const double t = std::fmod(std::fmod(target, L) + L, L);
    std::uint32_t best = kNone;
    double bd = std::numeric_limits<double>::infinity();
    for (std::uint32_t j = 0; j < M; ++j) {
      if (std::binary_search(k.begin(), k.end(), j)) continue;
      const double d = std::min(std::abs(s[j] - t), L - std::abs(s[j] - t));
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    if (best == kNone) return;
    k.push_back(best);
    normalize(v, k);
  };
  if (k.empty()) k.push_back(0);
  if (k.size() == 1) {
    const double a = s[k[0]];
    add_at(a + L / 3);
    add_at(a + 2 * L / 3);
  } else if (k.size() == 2) {
    const double a = s[k[0]], b = s[k[1]];
    add_at(b - a >= L - (b - a) ? 0.5 * (a + b) : b + 0.5 * (L - (b - a)));
  }
  for (int guard = 0; guard < 4; ++guard) {
    Ring r;
    for (auto p : k) r.push_back(v.point(p));
    if (signed_area(r) != 0) break;
    const Point a = v.point(k[0]), b = v.point(k[1]);
    std::uint32_t far = 0;
    double fd = -1;
    for (std::uint32_t j = 0; j < M; ++j) {
      const double d = std::abs(cross(b - a, v.point(j) - a));
      if (d > fd) {
        fd = d;
        far = j;
      }
    }
    k.push_back(far);
    normalize(v, k);
  }
}

}  // namespace detail

/// Anchors plus keypoints; closed chains are topped up to a proper ring.
inline Selection vss_select(const Pslg& g, const ChainSet& cs, const Keypoints& kp) {
  Selection sel(cs.chains.size());
  for (std::size_t c = 0; c < cs.chains.size(); ++c) {
    const Chain& ch = cs.chains[c];
    const detail::ChainView v{g, ch};
    const std::uint32_t last = std::uint32_t(ch.vertices.size() - 1);
    auto& k = sel[c];
    if (!ch.loop) k.push_back(0);
    for (std::uint32_t p : kp[c])
      if (ch.loop ? p != last : p != 0 && p != last) k.push_back(p);
    if (v.closed()) {
      detail::ensure_ring(v, k);
    } else {
      k.push_back(last);
      detail::normalize(v, k);
    }
  }
  return sel;
}

namespace detail {

// Farthest pair of points; ties resolve to the lexicographically smallest
// index pair. Only hull vertices can be an endpoint of a farthest pair, so
// each hull vertex is scanned against every point.
inline std::pair<std::uint32_t, std::uint32_t> farthest_pair(const std::vector<Point>& pts) {
  std::vector<std::uint32_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && (pts[a].y < pts[b].y || (pts[a].y == pts[b].y && a < b)));
  });
  std::vector<std::uint32_t> hull;
  auto build = [&](auto begin, auto end) {
    const std::size_t base = hull.size();
    for (auto it = begin; it != end; ++it) {
      while (hull.size() >= base + 2 &&
             orientation(pts[hull[hull.size() - 2]], pts[hull.back()], pts[*it]) < 0)
        hull.pop_back();
      hull.push_back(*it);
    }
    hull.pop_back();
  };
  build(idx.begin(), idx.end());
  build(idx.rbegin(), idx.rend());
  if (hull.size() < 2) hull = idx;
  double best = -1;
  std::pair<std::uint32_t, std::uint32_t> bp{0, 0};
  for (std::uint32_t a : hull) {
    for (std::uint32_t b = 0; b < pts.size(); ++b) {
      const double dx = pts[a].x - pts[b].x, dy = pts[a].y - pts[b].y;
      const double d = dx * dx + dy * dy;
      const auto pr = std::minmax(a, b);
      const std::pair<std::uint32_t, std::uint32_t> cand{pr.first, pr.second};
      if (d > best || (d == best && cand < bp)) {
        best = d;
        bp = cand;
      }
    }
  }
  return bp;
}

inline void dp_positions(const ChainView& v, std::uint32_t lo, std::uint32_t hi, double eps,
                         std::vector<std::uint32_t>& out) {
  std::vector<Point> sub;
  for (std::uint32_t p = lo; p <= hi; ++p) sub.push_back(v.point(p));
  for (std::size_t i : douglas_peucker_indices(sub, eps)) out.push_back(lo + std::uint32_t(i));
}

}  // namespace detail

/// Douglas-Peucker per chain with endpoints fixed. Closed chains are split
/// first: at the vertex farthest from the anchor, or for anchor-free loops
/// at the farthest vertex pair.
inline Selection dp_select(const Pslg& g, const ChainSet& cs, double epsilon) {
  if (epsilon < 0) throw Error("dp_simplify: epsilon must be >= 0");
  Selection sel(cs.chains.size());
  for (std::size_t c = 0; c < cs.chains.size(); ++c) {
    const Chain& ch = cs.chains[c];
    const detail::ChainView v{g, ch};
    auto& k = sel[c];
    if (!v.closed()) {
      detail::dp_positions(v, 0, std::uint32_t(ch.vertices.size() - 1), epsilon, k);
      continue;
    }
    const std::uint32_t M = v.period();
    std::uint32_t i = 0, j = 0;
    if (ch.loop) {
      std::vector<Point> ring;
      for (std::uint32_t p = 0; p < M; ++p) ring.push_back(v.point(p));
      std::tie(i, j) = detail::farthest_pair(ring);
    } else {
      double best = -1;
      for (std::uint32_t t = 1; t < M; ++t) {
        const double d = distance(v.point(0), v.point(t));
        if (d > best) {
          best = d;
          j = t;
        }
      }
    }
    if (i == j) j = (i + 1) % M;
    if (j < i) std::swap(i, j);
    detail::dp_positions(v, i, j, epsilon, k);
    detail::dp_positions(v, j, i + M, epsilon, k);
    detail::ensure_ring(v, k);
  }
  return sel;
}

// ---------------------------------------------------------------------------
// Planarity repair
// ---------------------------------------------------------------------------

struct RepairStats {
  std::size_t rounds = 0;
  std::size_t reinserted = 0;
};

/// Re-inserts removed chain vertices until no two selected segments meet
/// anywhere other than a shared endpoint. The overdense chains are planar,
/// so this terminates.
inline void repair_planarity(const Pslg& g, const ChainSet& cs, Selection& sel,
                             RepairStats* stats = nullptr) {
  RepairStats st;
  struct SegRef {
    std::uint32_t chain, k, lo, hi;
  };
  for (;;) {
    ++st.rounds;
    std::vector<Segment> segs;
    std::vector<SegRef> refs;
    std::vector<std::uint32_t> seg_count(cs.chains.size(), 0);
    for (std::uint32_t c = 0; c < cs.chains.size(); ++c) {
      const detail::ChainView v{g, cs.chains[c]};
      const auto ss = v.segments(sel[c]);
      seg_count[c] = std::uint32_t(ss.size());
      for (std::uint32_t i = 0; i < ss.size(); ++i) {
        segs.push_back({v.point(ss[i].first), v.point(ss[i].second)});
        refs.push_back({c, i, ss[i].first, ss[i].second});
      }
    }
    std::vector<std::vector<std::pair<std::uint32_t, Point>>> fix(cs.chains.size());
    for_each_box_overlap(std::span<const Segment>(segs), [&](std::uint32_t a, std::uint32_t b) {
      const SegRef ra = refs[a], rb = refs[b];
      const Segment sa = segs[a], sb = segs[b];
      SegmentIntersection x;
      const bool same = ra.chain == rb.chain;
      const bool closed = cs.chains[ra.chain].closed();
      const std::uint32_t n = seg_count[ra.chain];
      if (same && rb.k == ra.k + 1 && !(closed && n == 2)) {
        x = segments_intersect(sa.a, sa.b, sb.a, sb.b, true);
      } else if (same && closed && ra.k == 0 && rb.k + 1 == n && n > 2) {
        x = segments_intersect(sb.a, sb.b, sa.a, sa.b, true);
      } else {
        x = segments_intersect(sa.a, sa.b, sb.a, sb.b);
        if (x.kind == SegmentRelation::point && (x.first == sa.a || x.first == sa.b) &&
            (x.first == sb.a || x.first == sb.b))
          return;
      }
      if (x.kind == SegmentRelation::none) return;
      fix[ra.chain].push_back({ra.k, x.first});
      fix[rb.chain].push_back({rb.k, x.first});
    });
    bool changed = false;
    for (std::uint32_t c = 0; c < cs.chains.size(); ++c) {
      if (fix[c].empty()) continue;
      const detail::ChainView v{g, cs.chains[c]};
      const auto s = v.arc();
      const auto ss = v.segments(sel[c]);
      std::vector<std::uint32_t> add;
      for (const auto& [k, at] : fix[c]) {
        const auto [lo, hi] = ss[k];
        if (hi <= lo + 1) continue;
        // Arc-length position of the contact on the original sub-chain.
        double best_d = std::numeric_limits<double>::infinity(), target = s[lo];
        for (std::uint32_t i = lo; i < hi; ++i) {
          const Point a = v.point(i), b = v.point(i + 1);
          const Point q = closest_point_on_segment(at, a, b);
          const double d = distance(at, q);
          if (d < best_d) {
            best_d = d;
            target = s[i] + distance(a, q);
          }
        }
        add.push_back(detail::nearest_by_arc(s, target, lo + 1, hi - 1));
      }
      if (add.empty()) continue;
      auto& k = sel[c];
      const std::size_t before = k.size();
      k.insert(k.end(), add.begin(), add.end());
      detail::normalize(v, k);
      if (k.size() != before) {
        changed = true;
        st.reinserted += k.size() - before;
      }
    }
    if (!changed) break;
  }
  if (stats) *stats = st;
}

/// Graph made of the selected chain segments, with collinear vertices removed.
inline Pslg build_from_selection(const Pslg& g, const ChainSet& cs, const Selection& sel) {
  std::vector<LatticePoint> verts(g.vertices().begin(), g.vertices().end());
  std::vector<Pslg::Edge> edges;
  for (std::size_t c = 0; c < cs.chains.size(); ++c) {
    const detail::ChainView v{g, cs.chains[c]};
    for (const auto& [lo, hi] : v.segments(sel[c])) edges.emplace_back(v.vertex(lo), v.vertex(hi));
  }
  return remove_collinear_vertices(Pslg::from_segments(g.width(), g.height(), verts, edges));
}

inline Pslg vss_simplify(const Pslg& g, const ChainSet& cs, const Keypoints& kp,
                         RepairStats* stats = nullptr) {
  Selection sel = vss_select(g, cs, kp);
  repair_planarity(g, cs, sel, stats);
  return build_from_selection(g, cs, sel);
}

inline Pslg dp_simplify(const Pslg& g, const ChainSet& cs, double epsilon,
                        RepairStats* stats = nullptr) {
  Selection sel = dp_select(g, cs, epsilon);
  repair_planarity(g, cs, sel, stats);
  return build_from_selection(g, cs, sel);
}

// ---------------------------------------------------------------------------
// End-to-end
// ---------------------------------------------------------------------------

enum class Mode { none, vss, dp };

struct VectorizeOptions {
  Mode mode = Mode::vss;
  float nms_threshold = 0.3f;
  ProjectionOptions projection;
  double dp_epsilon = 2.0;
};

struct VectorizeResult {
  Partition partition;
  std::size_t overdense_vertices = 0;
  std::size_t simplified_vertices = 0;  // graph vertices after simplification
  std::size_t peaks = 0;
  RepairStats repair;
  AssembleStats assemble;
};

inline VectorizeResult vectorize(const LabelMask& mask, const Heatmap* heatmap,
                                 const VectorizeOptions& opt = {}) {
  check_mask(mask);
  VectorizeResult r;
  const Pslg g0 = build_overdense_pslg(mask);
  r.overdense_vertices = g0.num_vertices();
  Pslg g;
  if (opt.mode == Mode::none) {
    g = remove_collinear_vertices(g0);
  } else {
    const ChainSet cs = decompose_chains(g0);
    if (opt.mode == Mode::vss) {
      if (!heatmap) throw Error("vss mode requires a heatmap");
      if (heatmap->width != mask.width || heatmap->height != mask.height)
        throw Error("heatmap size does not match the mask");
      const auto peaks = extract_peaks(*heatmap, opt.nms_threshold);
      r.peaks = peaks.size();
      g = vss_simplify(g0, cs, project_peaks(peaks, g0, cs, opt.projection), &r.repair);
    } else {
      g = dp_simplify(g0, cs, opt.dp_epsilon, &r.repair);
    }
  }
  r.simplified_vertices = g.num_vertices();
  r.partition = assemble_and_label(std::move(g), mask, &r.assemble);
  return r;
}

// ---------------------------------------------------------------------------
// Per-class baseline
// ---------------------------------------------------------------------------

/// Ring Douglas-Peucker: split at vertex 0 and the vertex farthest from it.
inline Ring dp_ring(const Ring& ring, double epsilon) {
  const std::uint32_t n = std::uint32_t(ring.size());
  if (n < 4) return ring;
  std::uint32_t j = 1;
  double best = -1;
  for (std::uint32_t t = 1; t < n; ++t) {
    const double d = distance(ring[0], ring[t]);
    if (d > best) {
      best = d;
      j = t;
    }
  }
  std::vector<Point> a(ring.begin(), ring.begin() + j + 1);
  std::vector<Point> b(ring.begin() + j, ring.end());
  b.push_back(ring[0]);
  Ring out;
  for (std::size_t i : douglas_peucker_indices(a, epsilon)) out.push_back(a[i]);
  out.pop_back();
  for (std::size_t i : douglas_peucker_indices(b, epsilon)) out.push_back(b[i]);
  out.pop_back();
  return out;
}

/// Traces each class on its own (binary overdense graph, no shared topology)
/// and simplifies every ring independently.
inline Partition class_contours_dp(const LabelMask& mask, double epsilon) {
  Partition out;
  out.width = mask.width;
  out.height = mask.height;
  for (int c = 0; c < mask.num_classes; ++c) {
    LabelMask bin(mask.width, mask.height, 0, 2);
    bool any = false;
    for (std::size_t i = 0; i < bin.labels.size(); ++i) {
      bin.labels[i] = mask.labels[i] == c;
      any |= bin.labels[i] != 0;
    }
    if (!any) continue;
    const Partition faces = reconstruct(bin);
    for (const auto& lp : faces.polygons) {
      if (lp.cls != 1) continue;
      LabeledPolygon q;
      q.cls = c;
      q.polygon.outer = dp_ring(lp.polygon.outer, epsilon);
      if (q.polygon.outer.size() < 3 || signed_area(q.polygon.outer) <= 0) continue;
      for (const auto& h : lp.polygon.holes) {
        Ring hr = dp_ring(h, epsilon);
        if (hr.size() >= 3 && signed_area(hr) < 0) q.polygon.holes.push_back(std::move(hr));
      }
      out.polygons.push_back(std::move(q));
    }
  }
  return out;
}

}  // namespace acpv
