#pragma once

// Planar straight-line graph on the pixel-corner lattice, stored as a
// half-edge structure: edge e owns half-edges 2e (u -> v) and 2e+1 (v -> u),
// so twin(h) == h ^ 1. Outgoing half-edges of each vertex are kept sorted
// counter-clockwise, which makes the face walk a table lookup.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acpv/error.hpp"
#include "acpv/geometry.hpp"
#include "acpv/raster.hpp"

namespace acpv {

struct LatticePoint {
  std::int32_t x = 0;
  std::int32_t y = 0;

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
  Point point() const { return {double(x), double(y)}; }
};

inline bool scan_less(LatticePoint a, LatticePoint b) {
  return a.y < b.y || (a.y == b.y && a.x < b.x);
}

inline constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

namespace detail {

// Position of a direction in [0, 2pi) measured from +x towards +y.
inline bool upper_half(std::int64_t dx, std::int64_t dy) { return dy < 0 || (dy == 0 && dx < 0); }

inline bool angle_less(std::int64_t ax, std::int64_t ay, std::int64_t bx, std::int64_t by) {
  const bool ha = upper_half(ax, ay);
  const bool hb = upper_half(bx, by);
  if (ha != hb) return hb;
  return ax * by - ay * bx > 0;
}

}  // namespace detail

class Pslg {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  Pslg() = default;

  /// Builds the half-edge structure. Vertices not touched by any edge are
  /// dropped; edge order and relative vertex order are preserved.
  static Pslg from_segments(int width, int height, const std::vector<LatticePoint>& vertices,
                            const std::vector<Edge>& edges) {
    Pslg g;
    g.width_ = width;
    g.height_ = height;
    std::vector<std::uint32_t> remap(vertices.size(), kNone);
    for (const auto& [u, v] : edges) {
      if (u >= vertices.size() || v >= vertices.size()) throw Error("pslg: edge index out of range");
      if (u == v || vertices[u] == vertices[v]) throw Error("pslg: zero-length edge");
      remap[u] = remap[v] = 0;
    }
    for (std::uint32_t i = 0; i < vertices.size(); ++i) {
      if (remap[i] == kNone) continue;
      remap[i] = std::uint32_t(g.vertices_.size());
      g.vertices_.push_back(vertices[i]);
    }
    g.edges_.reserve(edges.size());
    for (const auto& [u, v] : edges) g.edges_.emplace_back(remap[u], remap[v]);
    g.index();
    return g;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_half_edges() const { return 2 * edges_.size(); }
  std::span<const LatticePoint> vertices() const { return vertices_; }
  std::span<const Edge> edges() const { return edges_; }
  LatticePoint vertex(std::uint32_t v) const { return vertices_[v]; }

  static std::uint32_t twin(std::uint32_t h) { return h ^ 1u; }
  static std::uint32_t edge_of(std::uint32_t h) { return h >> 1; }
  std::uint32_t origin(std::uint32_t h) const {
    return (h & 1u) ? edges_[h >> 1].second : edges_[h >> 1].first;
  }
  std::uint32_t target(std::uint32_t h) const { return origin(twin(h)); }

  std::uint32_t degree(std::uint32_t v) const { return out_offset_[v + 1] - out_offset_[v]; }

  /// Outgoing half-edges of v in counter-clockwise order.
  std::span<const std::uint32_t> outgoing(std::uint32_t v) const {
    return {out_.data() + out_offset_[v], out_.data() + out_offset_[v + 1]};
  }

  /// Next half-edge along the face to the left of h.
  std::uint32_t next(std::uint32_t h) const {
    const std::uint32_t v = target(h);
    const std::uint32_t t = twin(h);
    const std::uint32_t d = degree(v);
    const std::uint32_t i = out_pos_[t];
    return out_[out_offset_[v] + (i + d - 1) % d];
  }

  bool on_border(std::uint32_t e) const {
    const LatticePoint a = vertices_[edges_[e].first];
    const LatticePoint b = vertices_[edges_[e].second];
    return (a.x == b.x && (a.x == 0 || a.x == width_)) ||
           (a.y == b.y && (a.y == 0 || a.y == height_));
  }

  bool is_corner(std::uint32_t v) const {
    const LatticePoint p = vertices_[v];
    return (p.x == 0 || p.x == width_) && (p.y == 0 || p.y == height_);
  }

  /// Number of connected components (ignoring isolated vertices).
  std::size_t components() const {
    std::vector<std::uint32_t> parent(vertices_.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::size_t k = vertices_.size();
    for (const auto& [u, v] : edges_) {
      const auto a = find(u), b = find(v);
      if (a != b) {
        parent[a] = b;
        --k;
      }
    }
    return k;
  }

 private:
  void index() {
    const std::size_t n = vertices_.size();
    out_offset_.assign(n + 1, 0);
    for (const auto& [u, v] : edges_) {
      ++out_offset_[u + 1];
      ++out_offset_[v + 1];
    }
    std::partial_sum(out_offset_.begin(), out_offset_.end(), out_offset_.begin());
    out_.assign(2 * edges_.size(), 0);
    std::vector<std::uint32_t> fill(out_offset_.begin(), out_offset_.end() - 1);
    for (std::uint32_t h = 0; h < 2 * edges_.size(); ++h) out_[fill[origin(h)]++] = h;
    out_pos_.assign(2 * edges_.size(), 0);
    for (std::uint32_t v = 0; v < n; ++v) {
      auto first = out_.begin() + out_offset_[v];
      auto last = out_.begin() + out_offset_[v + 1];
      const LatticePoint o = vertices_[v];
      std::sort(first, last, [&](std::uint32_t a, std::uint32_t b) {
        const LatticePoint pa = vertices_[target(a)], pb = vertices_[target(b)];
        return detail::angle_less(pa.x - o.x, pa.y - o.y, pb.x - o.x, pb.y - o.y);
      });
      for (auto it = first; it != last; ++it) {
        if (it + 1 != last) {
          const LatticePoint pa = vertices_[target(*it)], pb = vertices_[target(*(it + 1))];
          if (!detail::angle_less(pa.x - o.x, pa.y - o.y, pb.x - o.x, pb.y - o.y))
            throw Error("pslg: overlapping edges at (" + std::to_string(o.x) + ", " +
                        std::to_string(o.y) + ")");
        }
        out_pos_[*it] = std::uint32_t(it - first);
      }
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<LatticePoint> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> out_offset_;
  std::vector<std::uint32_t> out_;
  std::vector<std::uint32_t> out_pos_;
};

// ---------------------------------------------------------------------------
// Overdense construction
// ---------------------------------------------------------------------------

namespace detail {

class LatticeIds {
 public:
  LatticeIds(int w, int h) : w_(w), ids_(std::size_t(w + 1) * (h + 1), kNone) {}
  std::uint32_t get(std::int32_t x, std::int32_t y, std::vector<LatticePoint>& verts) {
    auto& id = ids_[std::size_t(y) * (w_ + 1) + x];
    if (id == kNone) {
      id = std::uint32_t(verts.size());
      verts.push_back({x, y});
    }
    return id;
  }

 private:
  int w_;
  std::vector<std::uint32_t> ids_;
};

}  // namespace detail

/// Generic overdense graph: a unit edge on every pixel-edge for which
/// `boundary(x0, y0, x1, y1)` holds (the two pixels it separates), plus the
/// whole domain border.
template <typename IsBoundary>
Pslg build_overdense_pslg(int width, int height, IsBoundary&& boundary) {
  std::vector<LatticePoint> verts;
  std::vector<Pslg::Edge> edges;
  detail::LatticeIds ids(width, height);
  auto add = [&](std::int32_t x0, std::int32_t y0, std::int32_t x1, std::int32_t y1) {
    edges.emplace_back(ids.get(x0, y0, verts), ids.get(x1, y1, verts));
  };
  for (int y = 0; y <= height; ++y) {
    for (int x = 0; x < width; ++x) {
      // Horizontal pixel-edge (x, y) - (x + 1, y) between rows y - 1 and y.
      if (y == 0 || y == height || boundary(x, y - 1, x, y)) add(x, y, x + 1, y);
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x <= width; ++x) {
      if (x == 0 || x == width || boundary(x - 1, y, x, y)) add(x, y, x, y + 1);
    }
  }
  return Pslg::from_segments(width, height, verts, edges);
}

/// The overdense PSLG of a label mask: every label-transition pixel-edge plus
/// the border, all as unit edges.
inline Pslg build_overdense_pslg(const LabelMask& mask) {
  return build_overdense_pslg(mask.width, mask.height, [&](int x0, int y0, int x1, int y1) {
    return mask.at(x0, y0) != mask.at(x1, y1);
  });
}

// ---------------------------------------------------------------------------
// Chains
// ---------------------------------------------------------------------------

struct Chain {
  std::vector<std::uint32_t> vertices;  // closed chains repeat the first id at the end
  bool loop = false;                    // closed and anchor-free

  bool closed() const { return vertices.size() > 1 && vertices.front() == vertices.back(); }
};

struct ChainSet {
  std::vector<Chain> chains;
  std::vector<std::uint32_t> anchors;  // sorted by (y, x)
  std::vector<char> is_anchor;         // per vertex
};

/// Splits the graph into maximal anchor-bounded chains. Anchors are vertices
/// of degree != 2 and the four domain corners. Anchors are visited in (y, x)
/// order and their edges counter-clockwise; anchor-free loops start at their
/// smallest (y, x) vertex.
inline ChainSet decompose_chains(const Pslg& g) {
  ChainSet cs;
  const std::size_t n = g.num_vertices();
  cs.is_anchor.assign(n, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (g.degree(v) != 2 || g.is_corner(v)) {
      cs.is_anchor[v] = 1;
      cs.anchors.push_back(v);
    }
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return scan_less(g.vertex(a), g.vertex(b));
  });
  std::sort(cs.anchors.begin(), cs.anchors.end(), [&](std::uint32_t a, std::uint32_t b) {
    return scan_less(g.vertex(a), g.vertex(b));
  });

  std::vector<char> used(g.num_edges(), 0);
  auto walk = [&](std::uint32_t start_h, bool loop) {
    Chain c;
    c.loop = loop;
    std::uint32_t h = start_h;
    c.vertices.push_back(g.origin(h));
    for (;;) {
      used[Pslg::edge_of(h)] = 1;
      const std::uint32_t v = g.target(h);
      c.vertices.push_back(v);
      if (cs.is_anchor[v] || v == c.vertices.front()) break;
      const auto out = g.outgoing(v);
      h = out[0] == Pslg::twin(h) ? out[1] : out[0];
    }
    cs.chains.push_back(std::move(c));
  };
  for (std::uint32_t a : cs.anchors)
    for (std::uint32_t h : g.outgoing(a))
      if (!used[Pslg::edge_of(h)]) walk(h, false);
  for (std::uint32_t v : order)
    for (std::uint32_t h : g.outgoing(v))
      if (!used[Pslg::edge_of(h)]) walk(h, true);
  return cs;
}

/// Drops degree-2 vertices that lie strictly between collinear neighbours.
inline Pslg remove_collinear_vertices(const Pslg& g) {
  const ChainSet cs = decompose_chains(g);
  std::vector<LatticePoint> verts(g.vertices().begin(), g.vertices().end());
  std::vector<Pslg::Edge> edges;
  edges.reserve(g.num_edges());
  auto straight = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    const Point pa = verts[a].point(), pb = verts[b].point(), pc = verts[c].point();
    return orientation(pa, pb, pc) == 0 && dot(pb - pa, pc - pb) > 0;
  };
  for (const Chain& c : cs.chains) {
    std::vector<std::uint32_t> vs = c.vertices;
    if (c.loop) {
      // Rotate so the loop starts at a corner of its polygon.
      vs.pop_back();
      const std::size_t m = vs.size();
      std::size_t start = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!straight(vs[(i + m - 1) % m], vs[i], vs[(i + 1) % m])) {
          start = i;
          break;
        }
      }
      std::rotate(vs.begin(), vs.begin() + std::ptrdiff_t(start), vs.end());
      vs.push_back(vs.front());
    }
    std::vector<std::uint32_t> kept{vs.front()};
    for (std::size_t i = 1; i + 1 < vs.size(); ++i)
      if (!straight(kept.back(), vs[i], vs[i + 1])) kept.push_back(vs[i]);
    kept.push_back(vs.back());
    for (std::size_t i = 1; i < kept.size(); ++i) edges.emplace_back(kept[i - 1], kept[i]);
  }
  return Pslg::from_segments(g.width(), g.height(), verts, edges);
}

// ---------------------------------------------------------------------------
// Faces
// ---------------------------------------------------------------------------

/// Half-edge ids of one face-boundary walk.
using Cycle = std::vector<std::uint32_t>;

/// Walks every face boundary. Cycles are emitted in order of their smallest
/// half-edge id, so the output is deterministic.
inline std::vector<Cycle> trace_faces(const Pslg& g) {
  for (std::uint32_t v = 0; v < g.num_vertices(); ++v) {
    if (g.degree(v) == 1) {
      const LatticePoint p = g.vertex(v);
      throw Error("non-manifold boundary: dangling edge at (" + std::to_string(p.x) + ", " +
                  std::to_string(p.y) + ")");
    }
  }
  std::vector<Cycle> cycles;
  std::vector<char> seen(g.num_half_edges(), 0);
  for (std::uint32_t h0 = 0; h0 < g.num_half_edges(); ++h0) {
    if (seen[h0]) continue;
    Cycle c;
    for (std::uint32_t h = h0; !seen[h]; h = g.next(h)) {
      seen[h] = 1;
      c.push_back(h);
    }
    cycles.push_back(std::move(c));
  }
  return cycles;
}

/// Twice the signed area of a cycle, exact for lattice coordinates.
inline std::int64_t cycle_area2(const Pslg& g, const Cycle& c) {
  std::int64_t s = 0;
  for (std::uint32_t h : c) {
    const LatticePoint a = g.vertex(g.origin(h));
    const LatticePoint b = g.vertex(g.target(h));
    s += std::int64_t(a.x) * b.y - std::int64_t(b.x) * a.y;
  }
  return s;
}

/// V - E + C == 2K, with C face-boundary cycles and K components.
inline bool euler_check(const Pslg& g, std::size_t cycles) {
  const auto v = std::int64_t(g.num_vertices());
  const auto e = std::int64_t(g.num_edges());
  return v - e + std::int64_t(cycles) == 2 * std::int64_t(g.components());
}

}  // namespace acpv
