#pragma once

// Exact area overlay of an arbitrary polygon set against its rectangular
// domain. The plane is cut into vertical slabs at every vertex x and every
// proper edge crossing; inside a slab no two edges cross, so sorting edges by
// their height at the slab midline gives trapezoids whose coverage is
// constant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "acpv/geometry.hpp"
#include "acpv/partition.hpp"
#include "acpv/scanline.hpp"

namespace acpv {

enum class PieceKind : std::uint8_t { gap, inter, intra };

/// Trapezoid between x0 and x1 with lower edge (y00 at x0, y01 at x1) and
/// upper edge (y10, y11).
struct OverlayPiece {
  PieceKind kind;
  double x0, x1, y00, y01, y10, y11;
};

struct OverlayResult {
  double domain_area = 0;
  double gap_area = 0;       // in the domain, covered by no polygon
  double covered_area = 0;   // in the domain, covered by at least one polygon
  double overlap_area = 0;   // covered by two or more polygons
  double inter_area = 0;     // covered by polygons of two or more classes
  double intra_area = 0;     // covered by two or more polygons of one class
  bool rasterized = false;   // exact sweep was inconsistent; 4x supersampled fallback used
  std::vector<OverlayPiece> pieces;

  double gap_rate() const { return domain_area > 0 ? gap_area / domain_area : 0; }
  double inter_rate() const { return domain_area > 0 ? inter_area / domain_area : 0; }
  double intra_rate() const { return domain_area > 0 ? intra_area / domain_area : 0; }
};

namespace detail {

struct OverlayEdge {
  Point a, b;  // a.x < b.x
  std::uint32_t owner;
};

inline OverlayResult overlay_rasterized(const Partition& p, int factor = 4) {
  OverlayResult r;
  r.rasterized = true;
  r.domain_area = double(p.width) * p.height;
  const int W = p.width * factor, H = p.height * factor;
  std::vector<Ring> scaled;
  std::vector<std::uint32_t> owners;
  for (std::uint32_t i = 0; i < p.polygons.size(); ++i) {
    auto add = [&](const Ring& ring) {
      Ring s;
      for (Point q : ring) s.push_back(double(factor) * q);
      scaled.push_back(std::move(s));
      owners.push_back(i);
    };
    add(p.polygons[i].polygon.outer);
    for (const auto& h : p.polygons[i].polygon.holes) add(h);
  }
  std::vector<OwnedRing> owned;
  for (std::size_t i = 0; i < scaled.size(); ++i) owned.push_back({&scaled[i], owners[i]});
  std::vector<std::vector<std::uint32_t>> cover(std::size_t(W) * H);
  scan_regions(W, H, std::span<const OwnedRing>(owned), [&](int row, int c0, int c1, std::uint32_t o) {
    for (int c = c0; c <= c1; ++c) cover[std::size_t(row) * W + c].push_back(o);
  });
  const double cell = 1.0 / (double(factor) * factor);
  for (const auto& c : cover) {
    if (c.empty()) {
      r.gap_area += cell;
      continue;
    }
    r.covered_area += cell;
    if (c.size() >= 2) r.overlap_area += cell;
    std::vector<int> classes;
    for (auto o : c) classes.push_back(p.polygons[o].cls);
    std::sort(classes.begin(), classes.end());
    if (classes.front() != classes.back()) r.inter_area += cell;
    if (std::adjacent_find(classes.begin(), classes.end()) != classes.end()) r.intra_area += cell;
  }
  return r;
}

}  // namespace detail

inline OverlayResult compute_overlay(const Partition& p, bool want_pieces = false) {
  OverlayResult r;
  const double W = p.width, H = p.height;
  r.domain_area = W * H;
  const std::uint32_t n_poly = std::uint32_t(p.polygons.size());
  const std::uint32_t kDomain = n_poly;

  std::vector<detail::OverlayEdge> edges;
  std::vector<double> xs{0.0, W};
  auto add_ring = [&](const Ring& ring, std::uint32_t owner) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      Point a = ring[j], b = ring[i];
      xs.push_back(a.x);
      if (a.x == b.x) continue;
      if (a.x > b.x) std::swap(a, b);
      edges.push_back({a, b, owner});
    }
  };
  for (std::uint32_t i = 0; i < n_poly; ++i) {
    add_ring(p.polygons[i].polygon.outer, i);
    for (const auto& h : p.polygons[i].polygon.holes) add_ring(h, i);
  }
  edges.push_back({{0, 0}, {W, 0}, kDomain});
  edges.push_back({{0, H}, {W, H}, kDomain});

  {
    std::vector<Segment> segs;
    segs.reserve(edges.size());
    for (const auto& e : edges) segs.push_back({e.a, e.b});
    for_each_box_overlap(std::span<const Segment>(segs), [&](std::uint32_t i, std::uint32_t j) {
      const auto x = segments_intersect(segs[i].a, segs[i].b, segs[j].a, segs[j].b);
      if (x.kind == SegmentRelation::point) xs.push_back(x.first.x);
    });
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::sort(edges.begin(), edges.end(),
            [](const auto& l, const auto& r) { return l.a.x < r.a.x; });

  std::vector<std::uint8_t> parity(n_poly + 1, 0);
  std::vector<int> class_count(256, 0);
  std::vector<std::uint32_t> active;
  std::size_t next_edge = 0;
  struct Item {
    double ym;
    std::uint32_t edge;
  };
  std::vector<Item> order;

  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double x0 = std::max(xs[s], 0.0);
    const double x1 = std::min(xs[s + 1], W);
    if (x1 <= x0) continue;
    const double xm = 0.5 * (x0 + x1);
    while (next_edge < edges.size() && edges[next_edge].a.x < x1) active.push_back(std::uint32_t(next_edge++));
    std::erase_if(active, [&](std::uint32_t e) { return edges[e].b.x <= x0; });

    auto y_at = [&](const detail::OverlayEdge& e, double x) {
      return e.a.y + (x - e.a.x) * (e.b.y - e.a.y) / (e.b.x - e.a.x);
    };
    order.clear();
    for (std::uint32_t e : active)
      if (edges[e].a.x <= x0 && edges[e].b.x >= x1) order.push_back({y_at(edges[e], xm), e});
    std::sort(order.begin(), order.end(), [](const Item& l, const Item& r) {
      return l.ym < r.ym || (l.ym == r.ym && l.edge < r.edge);
    });

    int covering = 0, classes_present = 0, classes_doubled = 0;
    bool in_domain = false;
    const double width = x1 - x0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& e = edges[order[k].edge];
      if (e.owner == kDomain) {
        in_domain = !in_domain;
      } else {
        const int cls = p.polygons[e.owner].cls & 0xff;
        const int delta = parity[e.owner] ? -1 : 1;
        parity[e.owner] ^= 1;
        covering += delta;
        const int before = class_count[cls];
        class_count[cls] += delta;
        if (before == 0 && delta > 0) ++classes_present;
        if (before == 1 && delta < 0) --classes_present;
        if (before == 1 && delta > 0) ++classes_doubled;
        if (before == 2 && delta < 0) --classes_doubled;
      }
      if (k + 1 == order.size()) break;
      const double h = order[k + 1].ym - order[k].ym;
      if (h <= 0 || !in_domain) continue;
      const double a = width * h;
      auto piece = [&](PieceKind kind) {
        if (!want_pieces) return;
        const auto& lo = e;
        const auto& hi = edges[order[k + 1].edge];
        r.pieces.push_back({kind, x0, x1, y_at(lo, x0), y_at(lo, x1), y_at(hi, x0), y_at(hi, x1)});
      };
      if (covering == 0) {
        r.gap_area += a;
        piece(PieceKind::gap);
        continue;
      }
      r.covered_area += a;
      if (covering >= 2) r.overlap_area += a;
      if (classes_present >= 2) {
        r.inter_area += a;
        piece(PieceKind::inter);
      }
      if (classes_doubled >= 1) {
        r.intra_area += a;
        if (classes_present < 2) piece(PieceKind::intra);
      }
    }
    // Any unbalanced parity means a malformed ring; reset for the next slab.
    for (const auto& it : order) {
      const auto& e = edges[it.edge];
      if (e.owner != kDomain && parity[e.owner]) {
        parity[e.owner] = 0;
        class_count[p.polygons[e.owner].cls & 0xff] = 0;
      }
    }
  }

  if (std::abs(r.gap_area + r.covered_area - r.domain_area) > 1e-6) {
    OverlayResult fallback = detail::overlay_rasterized(p);
    if (want_pieces) fallback.pieces = std::move(r.pieces);
    return fallback;
  }
  return r;
}

}  // namespace acpv
