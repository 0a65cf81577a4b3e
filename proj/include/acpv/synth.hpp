#pragma once

// Synthetic ground truth: seeded recursive splitting of the domain into
// lattice-snapped faces, rasterization, Gaussian vertex heatmaps and noise.
//
// Generated partitions are representable on the raster lattice: every
// vertex shows each incident face in one of its four surrounding pixels,
// so the overdense graph of the rasterized mask has exactly the ground
// truth junctions as anchors and passes through every ground truth vertex.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acpv/assemble.hpp"
#include "acpv/error.hpp"
#include "acpv/geometry.hpp"
#include "acpv/partition.hpp"
#include "acpv/pslg.hpp"
#include "acpv/raster.hpp"
#include "acpv/simplify.hpp"

namespace acpv {

struct NoiseConfig {
  double boundary_jitter_px = 0;
  double label_flip_rate = 0;
  double heatmap_dropout_rate = 0;
  double spurious_peak_rate = 0;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  int width = 128;
  int height = 128;
  int num_classes = 5;
  int cell_count = 12;
  double hole_probability = 0.2;
  double heatmap_sigma = 1.0;
  double bend_probability = 0.3;
  NoiseConfig noise;
};

inline void check_config(const SynthConfig& c) {
  auto rate = [](double r, const char* name) {
    if (!(r >= 0 && r <= 1)) throw Error(std::string("synth: ") + name + " must be in [0, 1]");
  };
  if (c.width < 8 || c.height < 8) throw Error("synth: domain must be at least 8x8");
  if (c.num_classes < 1 || c.num_classes > 254) throw Error("synth: num_classes must be in [1, 254]");
  if (c.cell_count < 1) throw Error("synth: cell_count must be >= 1");
  if (!(c.heatmap_sigma > 0)) throw Error("synth: heatmap_sigma must be > 0");
  if (c.noise.boundary_jitter_px < 0) throw Error("synth: boundary_jitter_px must be >= 0");
  rate(c.hole_probability, "hole_probability");
  rate(c.bend_probability, "bend_probability");
  rate(c.noise.label_flip_rate, "label_flip_rate");
  rate(c.noise.heatmap_dropout_rate, "heatmap_dropout_rate");
  rate(c.noise.spurious_peak_rate, "spurious_peak_rate");
}

inline nlohmann::json config_to_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"width", c.width},
          {"height", c.height},
          {"num_classes", c.num_classes},
          {"cell_count", c.cell_count},
          {"hole_probability", c.hole_probability},
          {"heatmap_sigma", c.heatmap_sigma},
          {"bend_probability", c.bend_probability},
          {"noise",
           {{"boundary_jitter_px", c.noise.boundary_jitter_px},
            {"label_flip_rate", c.noise.label_flip_rate},
            {"heatmap_dropout_rate", c.noise.heatmap_dropout_rate},
            {"spurious_peak_rate", c.noise.spurious_peak_rate}}}};
}

/// FNV-1a over the compact JSON form of the config, as 16 hex digits.
inline std::string config_hash(const SynthConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config_to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Portable seeded random source (the standard distributions are not
/// reproducible across library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  int integer(int lo, int hi) {
    const std::uint64_t span = std::uint64_t(hi - lo) + 1;
    return lo + int(gen_() % span);
  }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace detail {

struct Planar {
  int W = 0, H = 0;
  std::vector<LatticePoint> verts;
  std::vector<std::vector<std::uint32_t>> faces;  // CCW vertex cycles

  Point pt(std::uint32_t v) const { return verts[v].point(); }

  std::int64_t area2(const std::vector<std::uint32_t>& f) const {
    std::int64_t s = 0;
    for (std::size_t i = 0, j = f.size() - 1; i < f.size(); j = i++)
      s += std::int64_t(verts[f[j]].x) * verts[f[i]].y - std::int64_t(verts[f[i]].x) * verts[f[j]].y;
    return s;
  }

  Ring ring(const std::vector<std::uint32_t>& f) const {
    Ring r;
    for (auto v : f) r.push_back(pt(v));
    return r;
  }

  std::vector<std::set<std::uint32_t>> neighbours() const {
    std::vector<std::set<std::uint32_t>> nb(verts.size());
    for (const auto& f : faces)
      for (std::size_t i = 0, j = f.size() - 1; i < f.size(); j = i++) {
        nb[f[i]].insert(f[j]);
        nb[f[j]].insert(f[i]);
      }
    return nb;
  }
};

// Each wedge between consecutive edge directions at v that opens into the
// domain must strictly contain a diagonal direction whose pixel is inside
// the domain, and no edge may run along a diagonal.
inline bool wedges_ok(const Planar& g, LatticePoint v, std::vector<LatticePoint> dirs) {
  for (auto d : dirs)
    if (std::abs(d.x) == std::abs(d.y)) return false;
  std::sort(dirs.begin(), dirs.end(), [](LatticePoint a, LatticePoint b) {
    return angle_less(a.x, a.y, b.x, b.y);
  });
  const int n = int(dirs.size());
  if (n < 2) return false;
  static const int diag[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  auto strictly_between = [](LatticePoint a, LatticePoint b, int dx, int dy) {
    // Strictly inside the CCW sweep from a to b (which may exceed pi).
    const std::int64_t ab = std::int64_t(a.x) * b.y - std::int64_t(a.y) * b.x;
    const std::int64_t ad = std::int64_t(a.x) * dy - std::int64_t(a.y) * dx;
    const std::int64_t db = std::int64_t(dx) * b.y - std::int64_t(dy) * b.x;
    if (ab > 0) return ad > 0 && db > 0;
    return ad > 0 || db > 0 || (ab == 0 && ad > 0);
  };
  for (int i = 0; i < n; ++i) {
    const LatticePoint a = dirs[i], b = dirs[(i + 1) % n];
    // Skip the wedge lying outside the domain (border vertices).
    const double ba = std::atan2(double(a.y), double(a.x));
    double bb = std::atan2(double(b.y), double(b.x));
    if (bb <= ba) bb += 2 * M_PI;
    const double mid = 0.5 * (ba + bb);
    const double px = v.x + 0.25 * std::cos(mid), py = v.y + 0.25 * std::sin(mid);
    if (px < 0 || py < 0 || px > g.W || py > g.H) continue;
    bool found = false;
    for (const auto& d : diag) {
      const double cx = v.x + 0.5 * d[0], cy = v.y + 0.5 * d[1];
      if (cx < 0 || cy < 0 || cx > g.W || cy > g.H) continue;
      if (strictly_between(a, b, d[0], d[1])) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

inline double angle_between(Point u, Point v) {
  return std::acos(std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0));
}

// Nearest lattice point of segment (a, b) to x.
inline LatticePoint snap_on_edge(LatticePoint a, LatticePoint b, Point x) {
  const int dx = b.x - a.x, dy = b.y - a.y;
  const int g = std::gcd(std::abs(dx), std::abs(dy));
  const Point d{double(dx), double(dy)};
  const double t = std::clamp(dot(x - a.point(), d) / dot(d, d), 0.0, 1.0);
  const int k = int(std::lround(t * g));
  return {a.x + k * dx / g, a.y + k * dy / g};
}

class Generator {
 public:
  Generator(const SynthConfig& c, Rng& rng) : cfg_(c), rng_(rng) {
    g_.W = c.width;
    g_.H = c.height;
    g_.verts = {{0, 0}, {0, c.height}, {c.width, c.height}, {c.width, 0}};
    // CCW in raw coordinates (positive shoelace area).
    g_.faces = {{0, 3, 2, 1}};
    const double avg = double(c.width) * c.height / c.cell_count;
    min_area2_ = std::int64_t(2 * std::max(40.0, 0.15 * avg));
  }

  const Planar& graph() const { return g_; }

  void split_faces() {
    std::vector<char> stuck(1, 0);
    while (int(g_.faces.size()) < cfg_.cell_count) {
      int best = -1;
      std::int64_t best_area = 0;
      for (int f = 0; f < int(g_.faces.size()); ++f) {
        if (stuck[f]) continue;
        const auto a = g_.area2(g_.faces[f]);
        if (a > best_area) {
          best_area = a;
          best = f;
        }
      }
      if (best < 0 || best_area < 2 * min_area2_) break;
      bool done = false;
      for (int attempt = 0; attempt < 60 && !done; ++attempt) done = try_split(best);
      if (done) {
        stuck.assign(g_.faces.size(), 0);
      } else {
        stuck[best] = 1;
      }
    }
  }

 private:
  struct Hit {
    int edge = -1;  // index i of face edge (f[i], f[i+1])
    Point at;
    double t = std::numeric_limits<double>::infinity();
  };

  Hit cast(const std::vector<std::uint32_t>& f, Point c, Point d) const {
    Hit h;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const Point a = g_.pt(f[i]), b = g_.pt(f[(i + 1) % f.size()]);
      const Point e = b - a;
      const double den = cross(d, e);
      if (den == 0) continue;
      const double t = cross(a - c, e) / den;
      const double u = cross(a - c, d) / den;
      if (t > 1e-9 && u >= 0 && u <= 1 && t < h.t) h = {int(i), c + t * d, t};
    }
    return h;
  }

  // Returns vertex id for lattice point p on face edge i, inserting it into
  // every face that uses that edge when new.
  std::uint32_t place(std::size_t face, int edge, LatticePoint p) {
    const auto& f = g_.faces[face];
    const std::uint32_t a = f[edge], b = f[(edge + 1) % f.size()];
    if (g_.verts[a] == p) return a;
    if (g_.verts[b] == p) return b;
    const std::uint32_t id = std::uint32_t(g_.verts.size());
    g_.verts.push_back(p);
    for (auto& ff : g_.faces) {
      for (std::size_t i = 0; i < ff.size(); ++i) {
        const std::uint32_t u = ff[i], w = ff[(i + 1) % ff.size()];
        if ((u == a && w == b) || (u == b && w == a)) {
          ff.insert(ff.begin() + std::ptrdiff_t(i + 1), id);
          break;
        }
      }
    }
    return id;
  }

  bool try_split(std::size_t fi) {
    const auto& face = g_.faces[fi];
    const Ring ring = g_.ring(face);
    Point c{0, 0};
    {
      const double a = signed_area(ring);
      for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const double k = cross(ring[j], ring[i]);
        c = c + k * (ring[j] + ring[i]);
      }
      c = (1.0 / (6 * a)) * c;
      if (locate_in_ring(c, ring) != Location::inside) c = interior_point(Polygon{ring, {}});
      const Box bb = bounds(ring);
      const Point jitter{rng_.uniform(-0.15, 0.15) * (bb.max_x - bb.min_x),
                         rng_.uniform(-0.15, 0.15) * (bb.max_y - bb.min_y)};
      if (locate_in_ring(c + jitter, ring) == Location::inside) c = c + jitter;
    }
    const double theta = rng_.uniform(0, M_PI);
    const Point d{std::cos(theta), std::sin(theta)};
    const Hit h1 = cast(face, c, d), h2 = cast(face, c, -1.0 * d);
    if (h1.edge < 0 || h2.edge < 0) return false;
    const std::size_t n = face.size();
    const LatticePoint p = snap_on_edge(g_.verts[face[h1.edge]], g_.verts[face[(h1.edge + 1) % n]], h1.at);
    const LatticePoint q = snap_on_edge(g_.verts[face[h2.edge]], g_.verts[face[(h2.edge + 1) % n]], h2.at);
    if (p == q) return false;

    std::vector<LatticePoint> chord{p};
    if (rng_.bernoulli(cfg_.bend_probability)) {
      const Point pp = p.point(), qq = q.point();
      const Point mid = 0.5 * (pp + qq);
      Point nrm{-(qq.y - pp.y), qq.x - pp.x};
      nrm = (1.0 / norm(nrm)) * nrm;
      const double off = rng_.uniform(2.0, 4.0) * (rng_.bernoulli(0.5) ? 1 : -1);
      const LatticePoint m{std::int32_t(std::lround(mid.x + off * nrm.x)),
                           std::int32_t(std::lround(mid.y + off * nrm.y))};
      if (orientation(pp, m.point(), qq) == 0) return false;
      chord.push_back(m);
    }
    chord.push_back(q);
    if (!chord_ok(fi, chord)) return false;

    // Commit: place endpoints, then split the cycle.
    const std::uint32_t pid = place(fi, h1.edge, p);
    // Edge indices shift after an insertion, so look q's edge up again.
    const std::uint32_t qid = [&] {
      const auto& f = g_.faces[fi];
      for (std::size_t i = 0; i < f.size(); ++i) {
        const LatticePoint a = g_.verts[f[i]], b = g_.verts[f[(i + 1) % f.size()]];
        if (on_segment(q.point(), a.point(), b.point())) return place(fi, int(i), q);
      }
      throw Error("synth: lost chord endpoint");
    }();
    std::vector<std::uint32_t> mids;
    for (std::size_t i = 1; i + 1 < chord.size(); ++i) {
      mids.push_back(std::uint32_t(g_.verts.size()));
      g_.verts.push_back(chord[i]);
    }
    const auto f = g_.faces[fi];
    const auto ip = std::find(f.begin(), f.end(), pid) - f.begin();
    const auto iq = std::find(f.begin(), f.end(), qid) - f.begin();
    std::vector<std::uint32_t> fa, fb;
    for (auto i = ip;; i = (i + 1) % std::ptrdiff_t(f.size())) {
      fa.push_back(f[i]);
      if (i == iq) break;
    }
    for (auto it = mids.rbegin(); it != mids.rend(); ++it) fa.push_back(*it);
    for (auto i = iq;; i = (i + 1) % std::ptrdiff_t(f.size())) {
      fb.push_back(f[i]);
      if (i == ip) break;
    }
    for (auto v : mids) fb.push_back(v);
    if (g_.area2(fa) < min_area2_ || g_.area2(fb) < min_area2_ || !thick(fa) || !thick(fb) ||
        !wedges_around(fa, fb, pid, qid, mids)) {
      g_ = saved_;
      return false;
    }
    g_.faces[fi] = std::move(fa);
    g_.faces.push_back(std::move(fb));
    return true;
  }

  bool thick(const std::vector<std::uint32_t>& f) const {
    double per = 0;
    for (std::size_t i = 0, j = f.size() - 1; i < f.size(); j = i++) per += distance(g_.pt(f[i]), g_.pt(f[j]));
    return 0.5 * double(g_.area2(f)) / per >= 1.6;
  }

  bool wedges_around(const std::vector<std::uint32_t>& fa, const std::vector<std::uint32_t>& fb,
                     std::uint32_t pid, std::uint32_t qid, const std::vector<std::uint32_t>& mids) {
    // Check with the split applied.
    Planar trial = g_;
    trial.faces.erase(trial.faces.begin() + std::ptrdiff_t(current_));
    trial.faces.push_back(fa);
    trial.faces.push_back(fb);
    const auto nb = trial.neighbours();
    std::vector<std::uint32_t> check{pid, qid};
    check.insert(check.end(), mids.begin(), mids.end());
    for (auto v : check) {
      std::vector<LatticePoint> dirs;
      for (auto w : nb[v]) dirs.push_back({trial.verts[w].x - trial.verts[v].x, trial.verts[w].y - trial.verts[v].y});
      if (dirs.size() > 4 || !wedges_ok(trial, trial.verts[v], dirs)) return false;
      // Minimum angle between any two edges at v.
      for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j)
          if (angle_between(dirs[i].point(), dirs[j].point()) < kMinAngle) return false;
    }
    return true;
  }

  bool chord_ok(std::size_t fi, const std::vector<LatticePoint>& chord) {
    saved_ = g_;
    current_ = fi;
    const auto& face = g_.faces[fi];
    const Ring ring = g_.ring(face);
    for (std::size_t i = 1; i + 1 < chord.size(); ++i)
      if (locate_in_ring(chord[i].point(), ring) != Location::inside) return false;
    for (std::size_t k = 0; k + 1 < chord.size(); ++k) {
      const Point a = chord[k].point(), b = chord[k + 1].point();
      if (locate_in_ring(0.5 * (a + b), ring) != Location::inside) return false;
      for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point u = ring[i], w = ring[(i + 1) % ring.size()];
        const auto x = segments_intersect(a, b, u, w);
        if (x.kind == SegmentRelation::none) continue;
        if (x.kind == SegmentRelation::overlap) return false;
        const bool ok = (k == 0 && x.first == a) || (k + 2 == chord.size() && x.first == b);
        if (!ok) return false;
      }
    }
    // Spacing: new vertices keep clear of every other vertex and edge.
    std::vector<LatticePoint> fresh;
    for (const auto& v : chord)
      if (std::find(g_.verts.begin(), g_.verts.end(), v) == g_.verts.end()) fresh.push_back(v);
    for (const auto& v : fresh)
      for (const auto& w : g_.verts)
        if (distance(v.point(), w.point()) < kMinSpacing) return false;
    for (std::size_t i = 0; i < fresh.size(); ++i)
      for (std::size_t j = i + 1; j < fresh.size(); ++j)
        if (distance(fresh[i].point(), fresh[j].point()) < kMinSpacing) return false;
    for (const auto& v : fresh) {
      for (const auto& f : g_.faces)
        for (std::size_t i = 0; i < f.size(); ++i) {
          const Point u = g_.pt(f[i]), w = g_.pt(f[(i + 1) % f.size()]);
          const double dd = point_segment_distance(v.point(), u, w);
          if (dd > 0 && dd < kMinClearance) return false;
        }
    }
    for (std::size_t k = 0; k + 1 < chord.size(); ++k) {
      const Point a = chord[k].point(), b = chord[k + 1].point();
      for (const auto& w : g_.verts) {
        const Point wp = w.point();
        if (wp == a || wp == b) continue;
        if (point_segment_distance(wp, a, b) < kMinClearance) return false;
      }
    }
    return true;
  }

  static constexpr double kMinSpacing = 3.0;
  static constexpr double kMinClearance = 2.0;
  static constexpr double kMinAngle = 30.0 * M_PI / 180.0;

  const SynthConfig& cfg_;
  Rng& rng_;
  Planar g_;
  Planar saved_;
  std::size_t current_ = 0;
  std::int64_t min_area2_ = 0;
};

class ColoringError : public Error {
  using Error::Error;
};

// DSatur-ordered backtracking colouring with randomized colour order.
inline std::vector<int> color_faces(const std::vector<std::set<std::uint32_t>>& adj, int C, Rng& rng) {
  const std::size_t n = adj.size();
  std::vector<int> color(n, -1);
  if (n == 0) return color;
  if (C < 2 && n > 1) {
    bool any_edge = false;
    for (const auto& a : adj) any_edge |= !a.empty();
    if (any_edge) throw ColoringError("synth: recolor infeasible with fewer than 2 classes");
  }
  std::vector<std::vector<int>> prefs(n);
  for (auto& p : prefs) {
    p.resize(std::size_t(C));
    std::iota(p.begin(), p.end(), 0);
    for (int i = C - 1; i > 0; --i) std::swap(p[std::size_t(i)], p[std::size_t(rng.integer(0, i))]);
  }
  std::size_t budget = 200000;
  auto pick = [&]() -> int {
    int best = -1, best_sat = -1, best_deg = -1;
    for (std::size_t v = 0; v < n; ++v) {
      if (color[v] >= 0) continue;
      std::set<int> used;
      for (auto w : adj[v])
        if (color[w] >= 0) used.insert(color[w]);
      const int sat = int(used.size()), deg = int(adj[v].size());
      if (sat > best_sat || (sat == best_sat && deg > best_deg)) {
        best = int(v);
        best_sat = sat;
        best_deg = deg;
      }
    }
    return best;
  };
  auto solve = [&](auto&& self) -> bool {
    if (budget-- == 0) throw ColoringError("synth: colouring search exhausted");
    const int v = pick();
    if (v < 0) return true;
    for (int c : prefs[std::size_t(v)]) {
      bool clash = false;
      for (auto w : adj[std::size_t(v)]) clash |= color[w] == c;
      if (clash) continue;
      color[std::size_t(v)] = c;
      if (self(self)) return true;
      color[std::size_t(v)] = -1;
    }
    return false;
  };
  if (!solve(solve)) throw ColoringError("synth: no valid colouring with " + std::to_string(C) + " classes");
  return color;
}

inline double ring_ring_distance(const Ring& a, const Ring& b) {
  double best = std::numeric_limits<double>::infinity();
  for (Point p : a) best = std::min(best, point_to_ring_distance(p, b));
  for (Point p : b) best = std::min(best, point_to_ring_distance(p, a));
  return best;
}

}  // namespace detail

/// Pixel-centre rasterization of a partition (see rasterize in assemble.hpp).
using acpv::rasterize;

namespace detail {

// The partition is lattice-representable when the overdense graph of its
// rasterization has exactly the ground-truth junctions as anchors, passes
// through every ground-truth vertex, and yields the same number of faces.
inline bool representable(const Partition& p, int num_classes) {
  const LabelMask m = rasterize(p, num_classes);
  for (auto v : m.labels)
    if (v == kUnlabeled) return false;
  const Pslg g = build_overdense_pslg(m);
  std::set<std::pair<int, int>> present;
  std::set<std::pair<int, int>> anchors;
  for (std::uint32_t v = 0; v < g.num_vertices(); ++v) {
    const auto q = g.vertex(v);
    present.insert({q.x, q.y});
    if (g.degree(v) != 2 || g.is_corner(v)) anchors.insert({q.x, q.y});
  }
  std::map<std::pair<int, int>, std::set<std::pair<int, int>>> nb;
  for (const auto& lp : p.polygons) {
    auto add = [&](const Ring& r) {
      for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        const std::pair<int, int> a{int(r[j].x), int(r[j].y)}, b{int(r[i].x), int(r[i].y)};
        nb[a].insert(b);
        nb[b].insert(a);
      }
    };
    add(lp.polygon.outer);
    for (const auto& h : lp.polygon.holes) add(h);
  }
  std::set<std::pair<int, int>> junctions;
  for (const auto& [v, n] : nb) {
    if (!present.count(v)) return false;
    const bool corner = (v.first == 0 || v.first == p.width) && (v.second == 0 || v.second == p.height);
    if (n.size() != 2 || corner) junctions.insert(v);
  }
  if (junctions != anchors) return false;
  return reconstruct(m).polygons.size() == p.polygons.size();
}

inline Partition generate_once(const SynthConfig& cfg, Rng& rng) {
  Generator gen(cfg, rng);
  gen.split_faces();
  const Planar& g = gen.graph();
  const std::size_t nf = g.faces.size();

  // Face adjacency through shared edges.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> owner;
  std::vector<std::set<std::uint32_t>> adj(nf);
  for (std::uint32_t fi = 0; fi < nf; ++fi) {
    const auto& f = g.faces[fi];
    for (std::size_t i = 0; i < f.size(); ++i) owner[{f[i], f[(i + 1) % f.size()]}] = fi;
  }
  for (const auto& [e, fi] : owner) {
    const auto it = owner.find({e.second, e.first});
    if (it != owner.end() && it->second != fi) {
      adj[fi].insert(it->second);
      adj[it->second].insert(fi);
    }
  }
  const std::vector<int> color = color_faces(adj, cfg.num_classes, rng);

  Partition p;
  p.width = cfg.width;
  p.height = cfg.height;
  for (std::uint32_t fi = 0; fi < nf; ++fi) {
    LabeledPolygon lp;
    lp.cls = color[fi];
    lp.polygon.outer = g.ring(g.faces[fi]);
    if (cfg.num_classes >= 2 && rng.bernoulli(cfg.hole_probability)) {
      // Inset axis-aligned rectangle, well clear of the face boundary.
      const Ring& outer = lp.polygon.outer;
      const Box bb = bounds(outer);
      for (int attempt = 0; attempt < 30; ++attempt) {
        const int w = rng.integer(4, std::max(4, int((bb.max_x - bb.min_x) / 3)));
        const int h = rng.integer(4, std::max(4, int((bb.max_y - bb.min_y) / 3)));
        const int x0 = rng.integer(int(bb.min_x), std::max(int(bb.min_x), int(bb.max_x) - w));
        const int y0 = rng.integer(int(bb.min_y), std::max(int(bb.min_y), int(bb.max_y) - h));
        const Ring rect{{double(x0), double(y0)},
                        {double(x0), double(y0 + h)},
                        {double(x0 + w), double(y0 + h)},
                        {double(x0 + w), double(y0)}};
        if (!std::all_of(rect.begin(), rect.end(), [&](Point q) {
              return locate_in_ring(q, outer) == Location::inside;
            }))
          continue;
        const double margin = 3.0;
        if (ring_ring_distance(rect, outer) < margin) continue;
        bool clear = true;
        for (Point q : outer) clear &= !(q.x > x0 - margin && q.x < x0 + w + margin && q.y > y0 - margin && q.y < y0 + h + margin);
        if (!clear) continue;
        int cls = rng.integer(0, cfg.num_classes - 2);
        if (cls >= lp.cls) ++cls;
        lp.polygon.holes.push_back(rect);  // clockwise
        LabeledPolygon inner;
        inner.cls = cls;
        inner.polygon.outer.assign(rect.rbegin(), rect.rend());
        p.polygons.push_back(std::move(inner));
        break;
      }
    }
    p.polygons.push_back(std::move(lp));
  }
  canonicalize(p);
  return p;
}

}  // namespace detail

/// Seeded ground-truth partition. Candidates whose rasterization would not
/// represent them exactly are regenerated from a derived seed.
inline Partition generate_partition(const SynthConfig& cfg) {
  check_config(cfg);
  std::string colouring;
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    Rng rng(mix_seed(cfg.seed, attempt));
    Partition p;
    try {
      p = detail::generate_once(cfg, rng);
    } catch (const detail::ColoringError& e) {
      // Few classes: another layout may still be colourable.
      colouring = e.what();
      continue;
    }
    if (detail::representable(p, cfg.num_classes)) return p;
  }
  if (!colouring.empty()) throw Error(colouring + " (seed " + std::to_string(cfg.seed) + ")");
  throw Error("synth: no lattice-representable partition found for seed " + std::to_string(cfg.seed));
}

/// Max-composed Gaussians, one per distinct partition vertex. Cell (i, j)
/// samples the lattice corner (i, j), so a vertex on the lattice produces a
/// value of exactly 1 in the cell that NMS reports for it.
inline Heatmap render_heatmap(const Partition& p, double sigma) {
  if (!(sigma > 0)) throw Error("render_heatmap: sigma must be > 0");
  Heatmap hm(p.width, p.height, 0.f);
  std::vector<Point> verts;
  for (const auto& lp : p.polygons) {
    verts.insert(verts.end(), lp.polygon.outer.begin(), lp.polygon.outer.end());
    for (const auto& h : lp.polygon.holes) verts.insert(verts.end(), h.begin(), h.end());
  }
  std::sort(verts.begin(), verts.end(), ScanOrder{});
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  const int r = int(std::ceil(4 * sigma));
  const double k = 1.0 / (2 * sigma * sigma);
  for (Point v : verts) {
    const int cx = int(std::lround(v.x)), cy = int(std::lround(v.y));
    for (int y = std::max(0, cy - r - 1); y <= std::min(p.height - 1, cy + r + 1); ++y)
      for (int x = std::max(0, cx - r - 1); x <= std::min(p.width - 1, cx + r + 1); ++x) {
        const double d2 = (x - v.x) * (x - v.x) + (y - v.y) * (y - v.y);
        const float val = float(std::exp(-k * d2));
        float& cell = hm.at(x, y);
        cell = std::max(cell, std::clamp(val, 0.f, 1.f));
      }
  }
  return hm;
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

namespace detail {

// Steepest-ascent basin labels: every positive cell is assigned the peak it
// climbs to; zero cells get kNone.
inline std::vector<std::uint32_t> ascent_basins(const Heatmap& hm) {
  const int W = hm.width, H = hm.height;
  std::vector<std::uint32_t> up(std::size_t(W) * H, kNone);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const float v = hm.at(x, y);
      if (v <= 0) continue;
      int bx = x, by = y;
      float bv = v;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if ((!dx && !dy) || nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
          const float n = hm.at(nx, ny);
          if (n > bv || (n == bv && (ny < by || (ny == by && nx < bx)))) {
            bv = n;
            bx = nx;
            by = ny;
          }
        }
      up[std::size_t(y) * W + x] = std::uint32_t(by * W + bx);
    }
  std::vector<std::uint32_t> root(up.size(), kNone);
  for (std::uint32_t i = 0; i < up.size(); ++i) {
    if (up[i] == kNone) continue;
    std::uint32_t r = i;
    while (up[r] != r) r = up[r];
    root[i] = r;
  }
  return root;
}

}  // namespace detail

/// Deterministic noise injection.
inline std::pair<LabelMask, Heatmap> perturb(const LabelMask& mask, const Heatmap& heatmap,
                                             const NoiseConfig& noise, std::uint64_t seed) {
  LabelMask m = mask;
  Heatmap hm = heatmap;
  Rng rng(mix_seed(seed, 0x5eed));
  const int W = m.width, H = m.height;

  // Boundary push/pull: boundary pixels repeatedly copy a random neighbour.
  const int rounds = int(std::floor(noise.boundary_jitter_px));
  for (int r = 0; r < rounds; ++r) {
    LabelMask next = m;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const int dir = rng.integer(0, 3);
        const int nx = x + (dir == 0) - (dir == 1), ny = y + (dir == 2) - (dir == 3);
        if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
        if (m.at(nx, ny) != m.at(x, y) && rng.bernoulli(0.5)) next.at(x, y) = m.at(nx, ny);
      }
    m = std::move(next);
  }

  // Label flips on disk blobs covering roughly the requested fraction.
  if (noise.label_flip_rate > 0 && m.num_classes > 1) {
    double flipped = 0;
    const double target = noise.label_flip_rate * W * H;
    for (int guard = 0; flipped < target && guard < 100000; ++guard) {
      const double rad = rng.uniform(2.0, 5.0);
      const double cx = rng.uniform(0, W), cy = rng.uniform(0, H);
      const int cur = m.at(std::min(W - 1, int(cx)), std::min(H - 1, int(cy)));
      int cls = rng.integer(0, m.num_classes - 2);
      if (cls >= cur) ++cls;
      for (int y = std::max(0, int(cy - rad)); y <= std::min(H - 1, int(cy + rad)); ++y)
        for (int x = std::max(0, int(cx - rad)); x <= std::min(W - 1, int(cx + rad)); ++x)
          if ((x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - cy) * (y + 0.5 - cy) <= rad * rad &&
              m.at(x, y) != cls) {
            m.at(x, y) = std::uint8_t(cls);
            flipped += 1;
          }
    }
  }

  // Dropout zeroes the whole ascent basin of each dropped peak.
  if (noise.heatmap_dropout_rate > 0) {
    const auto root = detail::ascent_basins(hm);
    std::vector<std::uint32_t> roots;
    for (std::uint32_t i = 0; i < root.size(); ++i)
      if (root[i] == i) roots.push_back(i);
    std::set<std::uint32_t> dropped;
    for (auto r : roots)
      if (noise.heatmap_dropout_rate >= 1 || rng.bernoulli(noise.heatmap_dropout_rate)) dropped.insert(r);
    for (std::uint32_t i = 0; i < root.size(); ++i)
      if (root[i] != kNone && dropped.count(root[i])) hm.values[i] = 0.f;
  }

  // Spurious peaks placed more than 6 px from every label boundary.
  if (noise.spurious_peak_rate > 0) {
    std::vector<Segment> bsegs;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        if (x + 1 < W && m.at(x, y) != m.at(x + 1, y)) bsegs.push_back({{double(x + 1), double(y)}, {double(x + 1), double(y + 1)}});
        if (y + 1 < H && m.at(x, y) != m.at(x, y + 1)) bsegs.push_back({{double(x), double(y + 1)}, {double(x + 1), double(y + 1)}});
      }
    const SegmentIndex index(bsegs);
    const auto peaks = extract_peaks(heatmap, 0.3f);
    const int count = std::max(1, int(std::lround(noise.spurious_peak_rate * double(peaks.size()))));
    const double sigma = 1.0;
    for (int k = 0, guard = 0; k < count && guard < 1000 * count; ++guard) {
      const int x = rng.integer(0, W - 1), y = rng.integer(0, H - 1);
      const Point site{double(x), double(y)};
      if (!index.empty() && index.nearest(site).distance <= 6.0) continue;
      for (int yy = std::max(0, y - 4); yy <= std::min(H - 1, y + 4); ++yy)
        for (int xx = std::max(0, x - 4); xx <= std::min(W - 1, x + 4); ++xx) {
          const float v = float(std::exp(-((xx - x) * (xx - x) + (yy - y) * (yy - y)) / (2 * sigma * sigma)));
          hm.at(xx, yy) = std::max(hm.at(xx, yy), v);
        }
      ++k;
    }
  }
  return {m, hm};
}

}  // namespace acpv
