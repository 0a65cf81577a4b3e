#pragma once

// Face assembly: turns traced face cycles into labeled polygons-with-holes,
// dissolving edges between faces that end up with the same label.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "acpv/error.hpp"
#include "acpv/geometry.hpp"
#include "acpv/partition.hpp"
#include "acpv/pslg.hpp"
#include "acpv/raster.hpp"
#include "acpv/scanline.hpp"

namespace acpv {

struct AssembleStats {
  std::size_t faces = 0;
  std::size_t holes = 0;
  std::size_t dissolved_edges = 0;
  std::size_t rounds = 0;
};

/// Splits each face walk into simple loops at repeated vertices.
inline std::vector<Cycle> split_simple_loops(const Pslg& g, const std::vector<Cycle>& cycles) {
  std::vector<Cycle> loops;
  std::vector<std::uint32_t> where(g.num_vertices(), kNone);
  std::vector<std::uint32_t> stack;
  for (const Cycle& c : cycles) {
    stack.clear();
    for (std::uint32_t h : c) {
      const std::uint32_t v = g.origin(h);
      if (where[v] != kNone) {
        const std::uint32_t p = where[v];
        loops.emplace_back(stack.begin() + p, stack.end());
        for (std::size_t i = p; i < stack.size(); ++i) where[g.origin(stack[i])] = kNone;
        stack.resize(p);
      }
      where[v] = std::uint32_t(stack.size());
      stack.push_back(h);
    }
    for (std::uint32_t h : stack) where[g.origin(h)] = kNone;
    if (!stack.empty()) loops.push_back(stack);
  }
  return loops;
}

/// Rotates a ring so it starts at its smallest (y, x) vertex.
inline void canonicalize_ring(Ring& r) {
  if (r.empty()) return;
  const auto it = std::min_element(r.begin(), r.end(), [](Point a, Point b) { return scan_less(a, b); });
  std::rotate(r.begin(), it, r.end());
}

inline bool ring_less(const Ring& a, const Ring& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](Point p, Point q) { return scan_less(p, q); });
}

/// Sorts rings and polygons into a canonical order.
inline void canonicalize(Partition& p) {
  for (auto& lp : p.polygons) {
    canonicalize_ring(lp.polygon.outer);
    for (auto& h : lp.polygon.holes) canonicalize_ring(h);
    std::sort(lp.polygon.holes.begin(), lp.polygon.holes.end(), ring_less);
  }
  std::sort(p.polygons.begin(), p.polygons.end(), [](const LabeledPolygon& a, const LabeledPolygon& b) {
    if (ring_less(a.polygon.outer, b.polygon.outer)) return true;
    if (ring_less(b.polygon.outer, a.polygon.outer)) return false;
    return a.cls < b.cls;
  });
}

namespace detail {

struct Faces {
  std::vector<Cycle> loops;
  std::vector<std::int64_t> area2;
  std::vector<std::uint32_t> face_of_loop;  // face id, or kNone for the unbounded loop
  std::vector<std::uint32_t> face_loop;     // face id -> its outer loop
  std::vector<std::vector<std::uint32_t>> holes;  // face id -> hole loops
};

inline Ring loop_ring(const Pslg& g, const Cycle& loop) {
  Ring r;
  r.reserve(loop.size());
  for (std::uint32_t h : loop) r.push_back(g.vertex(g.origin(h)).point());
  return r;
}

inline Faces build_faces(const Pslg& g) {
  Faces f;
  const auto cycles = trace_faces(g);
  if (!euler_check(g, cycles.size())) throw Error("pslg: Euler characteristic check failed");
  f.loops = split_simple_loops(g, cycles);
  const std::int64_t domain2 = 2 * std::int64_t(g.width()) * g.height();
  f.face_of_loop.assign(f.loops.size(), kNone);
  std::vector<std::uint32_t> hole_loops;
  bool unbounded_seen = false;
  for (std::uint32_t i = 0; i < f.loops.size(); ++i) {
    const std::int64_t a = cycle_area2(g, f.loops[i]);
    f.area2.push_back(a);
    if (a > 0) {
      f.face_of_loop[i] = std::uint32_t(f.face_loop.size());
      f.face_loop.push_back(i);
      continue;
    }
    const bool border = std::all_of(f.loops[i].begin(), f.loops[i].end(),
                                    [&](std::uint32_t h) { return g.on_border(Pslg::edge_of(h)); });
    if (border && a == -domain2 && !unbounded_seen) {
      unbounded_seen = true;
      continue;
    }
    if (a == 0) throw Error("pslg: degenerate face cycle " + std::to_string(i));
    hole_loops.push_back(i);
  }
  if (!unbounded_seen) throw Error("pslg: domain border is not a closed cycle");

  std::vector<Ring> face_rings;
  std::vector<Box> face_boxes;
  for (std::uint32_t fl : f.face_loop) {
    face_rings.push_back(loop_ring(g, f.loops[fl]));
    face_boxes.push_back(bounds(face_rings.back()));
  }
  f.holes.assign(f.face_loop.size(), {});
  for (std::uint32_t hl : hole_loops) {
    Ring hr = loop_ring(g, f.loops[hl]);
    const Box hb = bounds(hr);
    std::reverse(hr.begin(), hr.end());
    const Point p = interior_point(Polygon{hr, {}});
    const std::int64_t need = -f.area2[hl];
    std::uint32_t best = kNone;
    for (std::uint32_t fi = 0; fi < f.face_loop.size(); ++fi) {
      const std::int64_t a = f.area2[f.face_loop[fi]];
      if (a <= need || !face_boxes[fi].contains(hb)) continue;
      if (best != kNone && a >= f.area2[f.face_loop[best]]) continue;
      if (locate_in_ring(p, face_rings[fi]) == Location::inside) best = fi;
    }
    if (best == kNone) throw Error("unassignable hole cycle " + std::to_string(hl));
    f.face_of_loop[hl] = best;
    f.holes[best].push_back(hl);
  }
  return f;
}

inline std::vector<std::uint8_t> vote_labels(const Pslg& g, const Faces& f, const LabelMask& mask,
                                             std::vector<Ring>& rings_out) {
  const std::size_t nf = f.face_loop.size();
  const int C = std::max(1, mask.num_classes);
  rings_out.clear();
  rings_out.reserve(f.loops.size());
  std::vector<OwnedRing> owned;
  std::vector<std::uint32_t> ring_owner;
  for (std::uint32_t fi = 0; fi < nf; ++fi) {
    rings_out.push_back(loop_ring(g, f.loops[f.face_loop[fi]]));
    ring_owner.push_back(fi);
    for (std::uint32_t hl : f.holes[fi]) {
      rings_out.push_back(loop_ring(g, f.loops[hl]));
      ring_owner.push_back(fi);
    }
  }
  for (std::size_t i = 0; i < rings_out.size(); ++i) owned.push_back({&rings_out[i], ring_owner[i]});

  std::vector<std::uint32_t> votes(nf * C, 0);
  scan_regions(mask.width, mask.height, std::span<const OwnedRing>(owned),
               [&](int row, int c0, int c1, std::uint32_t owner) {
                 for (int c = c0; c <= c1; ++c) ++votes[owner * C + mask.at(c, row)];
               });
  std::vector<std::uint8_t> labels(nf, 0);
  std::size_t ring_at = 0;
  for (std::uint32_t fi = 0; fi < nf; ++fi) {
    const std::uint32_t* v = votes.data() + std::size_t(fi) * C;
    const auto best = std::max_element(v, v + C);  // first maximum: smallest class on ties
    if (*best > 0) {
      labels[fi] = std::uint8_t(best - v);
    } else {
      Polygon poly{rings_out[ring_at], {}};
      for (std::size_t k = 0; k < f.holes[fi].size(); ++k) poly.holes.push_back(rings_out[ring_at + 1 + k]);
      const Point p = interior_point(poly);
      const int x = std::clamp(int(std::floor(p.x)), 0, mask.width - 1);
      const int y = std::clamp(int(std::floor(p.y)), 0, mask.height - 1);
      labels[fi] = mask.at(x, y);
    }
    ring_at += 1 + f.holes[fi].size();
  }
  return labels;
}

// Removes degree-1 vertices until none remain.
inline Pslg prune_dangling(const Pslg& g, std::vector<Pslg::Edge> edges) {
  std::vector<std::uint32_t> deg(g.num_vertices(), 0);
  for (const auto& [u, v] : edges) ++deg[u], ++deg[v];
  std::vector<char> alive(edges.size(), 1);
  std::vector<std::vector<std::uint32_t>> inc(g.num_vertices());
  for (std::uint32_t e = 0; e < edges.size(); ++e) {
    inc[edges[e].first].push_back(e);
    inc[edges[e].second].push_back(e);
  }
  std::vector<std::uint32_t> work;
  for (std::uint32_t v = 0; v < deg.size(); ++v)
    if (deg[v] == 1) work.push_back(v);
  while (!work.empty()) {
    const std::uint32_t v = work.back();
    work.pop_back();
    if (deg[v] != 1) continue;
    for (std::uint32_t e : inc[v]) {
      if (!alive[e]) continue;
      alive[e] = 0;
      const std::uint32_t w = edges[e].first == v ? edges[e].second : edges[e].first;
      --deg[v];
      if (--deg[w] == 1) work.push_back(w);
    }
  }
  std::vector<Pslg::Edge> kept;
  for (std::uint32_t e = 0; e < edges.size(); ++e)
    if (alive[e]) kept.push_back(edges[e]);
  std::vector<LatticePoint> verts(g.vertices().begin(), g.vertices().end());
  return Pslg::from_segments(g.width(), g.height(), verts, kept);
}

}  // namespace detail

/// Traces the faces of g, attaches holes to their smallest enclosing face,
/// labels faces by majority vote over covered pixel centres (ties go to the
/// smaller class) and merges neighbouring faces that share a label.
inline Partition assemble_and_label(Pslg g, const LabelMask& mask, AssembleStats* stats = nullptr) {
  if (mask.width != g.width() || mask.height != g.height())
    throw Error("assemble_and_label: mask size does not match the graph domain");
  AssembleStats st;
  for (;;) {
    ++st.rounds;
    const detail::Faces f = detail::build_faces(g);
    std::vector<Ring> rings;
    const std::vector<std::uint8_t> labels = detail::vote_labels(g, f, mask, rings);

    // Face on each side of every half-edge.
    std::vector<std::uint32_t> side(g.num_half_edges(), kNone);
    for (std::uint32_t li = 0; li < f.loops.size(); ++li)
      for (std::uint32_t h : f.loops[li]) side[h] = f.face_of_loop[li];
    std::vector<Pslg::Edge> keep;
    std::size_t dropped = 0;
    for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
      const std::uint32_t a = side[2 * e], b = side[2 * e + 1];
      if (a != kNone && b != kNone && labels[a] == labels[b]) {
        ++dropped;
        continue;
      }
      keep.push_back(g.edges()[e]);
    }
    if (dropped > 0) {
      st.dissolved_edges += dropped;
      g = remove_collinear_vertices(detail::prune_dangling(g, std::move(keep)));
      continue;
    }

    Partition out;
    out.width = g.width();
    out.height = g.height();
    std::size_t ring_at = 0;
    for (std::uint32_t fi = 0; fi < f.face_loop.size(); ++fi) {
      LabeledPolygon lp;
      lp.cls = labels[fi];
      lp.polygon.outer = rings[ring_at];
      for (std::size_t k = 0; k < f.holes[fi].size(); ++k)
        lp.polygon.holes.push_back(rings[ring_at + 1 + k]);
      ring_at += 1 + f.holes[fi].size();
      st.holes += lp.polygon.holes.size();
      out.polygons.push_back(std::move(lp));
    }
    st.faces = out.polygons.size();
    canonicalize(out);
    if (stats) *stats = st;
    return out;
  }
}

/// Full unsimplified reconstruction of a mask.
inline Partition reconstruct(const LabelMask& mask) {
  return assemble_and_label(remove_collinear_vertices(build_overdense_pslg(mask)), mask);
}

/// Pixel-centre rasterization: each pixel takes the class of the polygon
/// containing its centre, the smaller class when several do, and kUnlabeled
/// when none does.
inline LabelMask rasterize(const Partition& p, int num_classes = 0) {
  LabelMask m(p.width, p.height, kUnlabeled);
  std::vector<OwnedRing> owned;
  for (std::uint32_t i = 0; i < p.polygons.size(); ++i) {
    owned.push_back({&p.polygons[i].polygon.outer, i});
    for (const auto& h : p.polygons[i].polygon.holes) owned.push_back({&h, i});
  }
  scan_regions(p.width, p.height, std::span<const OwnedRing>(owned),
               [&](int row, int c0, int c1, std::uint32_t owner) {
                 const auto cls = std::uint8_t(p.polygons[owner].cls);
                 for (int c = c0; c <= c1; ++c) {
                   auto& v = m.at(c, row);
                   v = std::min(v, cls);
                 }
               });
  int max_label = 0;
  for (const auto& lp : p.polygons) max_label = std::max(max_label, lp.cls);
  m.num_classes = std::max(num_classes, max_label + 1);
  return m;
}

}  // namespace acpv
