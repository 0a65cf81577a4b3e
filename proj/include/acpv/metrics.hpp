#pragma once

// Evaluation protocol: per-class region, boundary, vertex and topology
// scores, global partition consistency, vertex-to-boundary alignment and
// peak-shape statistics.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <optional>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "acpv/assemble.hpp"
#include "acpv/error.hpp"
#include "acpv/geometry.hpp"
#include "acpv/overlay.hpp"
#include "acpv/partition.hpp"
#include "acpv/raster.hpp"
#include "acpv/scanline.hpp"
#include "acpv/simplify.hpp"
#include "acpv/skeleton.hpp"
#include "acpv/validate.hpp"

namespace acpv {

// ---------------------------------------------------------------------------
// Region overlap
// ---------------------------------------------------------------------------

struct IouScore {
  double value = 1;
  bool vacuous = false;  // class absent from both masks
};

namespace detail {

inline void check_same_size(const LabelMask& a, const LabelMask& b) {
  if (a.width != b.width || a.height != b.height) throw Error("metrics: mask dimensions differ");
}

inline IouScore binary_iou(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  if (uni == 0) return {1.0, true};
  return {double(inter) / double(uni), false};
}

// Pixels of the mask within Chebyshev distance `band` of a pixel outside it.
// The image border does not count as a boundary.
inline std::vector<std::uint8_t> inner_band(const std::vector<std::uint8_t>& m, int W, int H, int band) {
  // Separable erosion with a (2 band + 1) square; outside the image is foreground.
  std::vector<std::uint8_t> tmp(m.size()), er(m.size());
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      std::uint8_t v = 1;
      for (int k = std::max(0, x - band); k <= std::min(W - 1, x + band) && v; ++k) v = m[std::size_t(y) * W + k];
      tmp[std::size_t(y) * W + x] = v;
    }
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      std::uint8_t v = 1;
      for (int k = std::max(0, y - band); k <= std::min(H - 1, y + band) && v; ++k) v = tmp[std::size_t(k) * W + x];
      er[std::size_t(y) * W + x] = v;
    }
  std::vector<std::uint8_t> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] && !er[i];
  return out;
}

}  // namespace detail

inline IouScore region_iou(const LabelMask& pred, const LabelMask& gt, int cls) {
  detail::check_same_size(pred, gt);
  return detail::binary_iou(class_binary(pred, cls), class_binary(gt, cls));
}

/// Boundary IoU: each class region is reduced to its inner band of width
/// `band` pixels before the usual IoU.
inline IouScore boundary_iou(const LabelMask& pred, const LabelMask& gt, int cls, int band = 2) {
  detail::check_same_size(pred, gt);
  if (band < 1) throw Error("boundary_iou: band must be >= 1");
  const auto p = detail::inner_band(class_binary(pred, cls), pred.width, pred.height, band);
  const auto g = detail::inner_band(class_binary(gt, cls), gt.width, gt.height, band);
  return detail::binary_iou(p, g);
}

// ---------------------------------------------------------------------------
// Polygon-pair metrics
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Point> polygon_vertices(const Polygon& p) {
  std::vector<Point> v(p.outer.begin(), p.outer.end());
  for (const auto& h : p.holes) v.insert(v.end(), h.begin(), h.end());
  return v;
}

inline void check_polygon(const Polygon& p, const char* what) {
  auto bad = [](const Ring& r) { return distinct_vertex_count(r) < 3; };
  if (bad(p.outer) || std::any_of(p.holes.begin(), p.holes.end(), bad))
    throw Error(std::string(what) + ": degenerate polygon");
}

inline double mean_distance(const Polygon& from, const Polygon& to) {
  std::vector<Segment> segs;
  append_boundary_segments(to, segs);
  const SegmentIndex index(std::move(segs));
  const auto pts = polygon_vertices(from);
  double s = 0;
  for (Point p : pts) s += index.nearest(p).distance;
  return s / double(pts.size());
}

}  // namespace detail

/// Symmetric mean vertex-to-boundary distance (holes included).
inline double polis(const Polygon& a, const Polygon& b) {
  detail::check_polygon(a, "polis");
  detail::check_polygon(b, "polis");
  // Summing in a fixed order keeps polis(a, b) == polis(b, a) bit for bit.
  const double ab = detail::mean_distance(a, b), ba = detail::mean_distance(b, a);
  return 0.5 * (std::min(ab, ba) + std::max(ab, ba));
}

/// Maximum tangent angle error in degrees. The prediction boundary is sampled
/// every `spacing` px of arc length; each sample's tangent is compared with
/// the tangent at the nearest ground-truth boundary point. Directions are
/// axial, so the difference lies in [0, 90].
inline double mta(const std::vector<Ring>& pred, const std::vector<Ring>& gt, double spacing = 1.0) {
  auto check = [](const std::vector<Ring>& rings) {
    if (rings.empty()) throw Error("mta: empty contour");
    for (const auto& r : rings)
      if (distinct_vertex_count(r) < 3) throw Error("mta: contour needs at least 3 points");
  };
  check(pred);
  check(gt);
  if (!(spacing > 0)) throw Error("mta: spacing must be > 0");
  std::vector<Segment> segs;
  for (const auto& r : gt)
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++)
      if (!(r[j] == r[i])) segs.push_back({r[j], r[i]});
  const SegmentIndex index(segs);
  auto axial = [](Point u, Point v) {
    return std::atan2(std::abs(cross(u, v)), std::abs(dot(u, v)));
  };
  double worst = 0;
  for (const auto& r : pred) {
    const std::size_t n = r.size();
    double s0 = 0;  // arc position of the current segment start
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = r[i], b = r[(i + 1) % n];
      const double len = distance(a, b);
      if (len == 0) continue;
      const Point dir = b - a;
      for (double k = std::ceil(s0 / spacing); k * spacing < s0 + len; k += 1) {
        const Point x = a + ((k * spacing - s0) / len) * dir;
        const double d = index.nearest(x).distance;
        double best = M_PI;
        index.candidates(x, d + 1e-9, [&](std::uint32_t j) {
          const auto& sg = index.segments()[j];
          if (point_segment_distance(x, sg.a, sg.b) <= d + 1e-9) best = std::min(best, axial(dir, sg.b - sg.a));
        });
        worst = std::max(worst, best);
      }
      s0 += len;
    }
  }
  return worst * 180.0 / M_PI;
}

inline double mta(const Polygon& pred, const Polygon& gt, double spacing = 1.0) {
  std::vector<Ring> p{pred.outer}, g{gt.outer};
  p.insert(p.end(), pred.holes.begin(), pred.holes.end());
  g.insert(g.end(), gt.holes.begin(), gt.holes.end());
  return mta(p, g, spacing);
}

inline double n_ratio(std::size_t n_pred, std::size_t n_gt) {
  if (n_gt == 0) throw Error("n_ratio: ground truth has no vertices");
  return double(n_pred) / double(n_gt);
}

inline double relative_deviation(std::size_t n_pred, std::size_t n_gt) {
  if (n_pred + n_gt == 0) return 0;
  const double a = double(n_pred), b = double(n_gt);
  return std::abs(a - b) / (a + b);
}

inline double c_iou(double iou, std::size_t n_pred, std::size_t n_gt) {
  return iou * (1.0 - relative_deviation(n_pred, n_gt));
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

struct MatchPair {
  std::uint32_t pred;
  std::uint32_t gt;
  double iou;
};

struct MatchSet {
  std::vector<MatchPair> pairs;
  std::vector<std::uint32_t> unmatched_pred;
  std::vector<std::uint32_t> unmatched_gt;
};

namespace detail {

// Pixel-centre coverage of one polygon as (row, c0, c1) spans.
struct Span {
  int row, c0, c1;
};

inline std::vector<std::vector<Span>> polygon_spans(const Partition& p, const std::vector<std::uint32_t>& ids) {
  std::vector<OwnedRing> owned;
  for (std::uint32_t k = 0; k < ids.size(); ++k) {
    const auto& poly = p.polygons[ids[k]].polygon;
    owned.push_back({&poly.outer, k});
    for (const auto& h : poly.holes) owned.push_back({&h, k});
  }
  std::vector<std::vector<Span>> spans(ids.size());
  scan_regions(p.width, p.height, std::span<const OwnedRing>(owned),
               [&](int row, int c0, int c1, std::uint32_t k) { spans[k].push_back({row, c0, c1}); });
  return spans;
}

}  // namespace detail

/// Greedy one-to-one matching of the class `cls` polygons by descending
/// pixel IoU; only pairs with IoU above 0.5 are kept.
inline MatchSet match_polygons(const Partition& pred, const Partition& gt, int cls) {
  if (pred.width != gt.width || pred.height != gt.height) throw Error("match_polygons: domain sizes differ");
  std::vector<std::uint32_t> pids, gids;
  for (std::uint32_t i = 0; i < pred.polygons.size(); ++i)
    if (pred.polygons[i].cls == cls) pids.push_back(i);
  for (std::uint32_t i = 0; i < gt.polygons.size(); ++i)
    if (gt.polygons[i].cls == cls) gids.push_back(i);
  const int W = gt.width;
  const auto pspans = detail::polygon_spans(pred, pids);
  const auto gspans = detail::polygon_spans(gt, gids);

  // Ground-truth pixel owners; several owners per pixel are kept so that
  // invalid ground truth still scores consistently.
  std::multimap<std::size_t, std::uint32_t> extra;
  std::vector<std::uint32_t> owner(std::size_t(W) * gt.height, kNone);
  std::vector<std::size_t> gsize(gids.size(), 0);
  for (std::uint32_t k = 0; k < gids.size(); ++k)
    for (const auto& s : gspans[k]) {
      gsize[k] += std::size_t(s.c1 - s.c0 + 1);
      for (int c = s.c0; c <= s.c1; ++c) {
        auto& o = owner[std::size_t(s.row) * W + c];
        if (o == kNone) o = k;
        else extra.insert({std::size_t(s.row) * W + c, k});
      }
    }

  std::vector<MatchPair> cand;
  for (std::uint32_t k = 0; k < pids.size(); ++k) {
    std::map<std::uint32_t, std::size_t> inter;
    std::size_t psize = 0;
    for (const auto& s : pspans[k]) {
      psize += std::size_t(s.c1 - s.c0 + 1);
      for (int c = s.c0; c <= s.c1; ++c) {
        const std::size_t i = std::size_t(s.row) * W + c;
        if (owner[i] == kNone) continue;
        ++inter[owner[i]];
        if (!extra.empty()) {
          auto [lo, hi] = extra.equal_range(i);
          for (auto it = lo; it != hi; ++it) ++inter[it->second];
        }
      }
    }
    for (const auto& [g, n] : inter) {
      const double iou = double(n) / double(psize + gsize[g] - n);
      if (iou > 0.5) cand.push_back({pids[k], gids[g], iou});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const MatchPair& a, const MatchPair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    return std::tie(a.pred, a.gt) < std::tie(b.pred, b.gt);
  });
  MatchSet m;
  std::set<std::uint32_t> used_p, used_g;
  for (const auto& c : cand) {
    if (used_p.count(c.pred) || used_g.count(c.gt)) continue;
    used_p.insert(c.pred);
    used_g.insert(c.gt);
    m.pairs.push_back(c);
  }
  for (auto i : pids)
    if (!used_p.count(i)) m.unmatched_pred.push_back(i);
  for (auto i : gids)
    if (!used_g.count(i)) m.unmatched_gt.push_back(i);
  return m;
}

// ---------------------------------------------------------------------------
// Betti numbers
// ---------------------------------------------------------------------------

struct Betti {
  int b0 = 0;  // 8-connected foreground components
  int b1 = 0;  // 4-connected background components not touching the border
  int chi() const { return b0 - b1; }
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace detail

inline Betti betti(const std::vector<std::uint8_t>& mask, int width, int height) {
  if (mask.size() != std::size_t(width) * height) throw Error("betti: size mismatch");
  const std::size_t n = mask.size();
  detail::UnionFind uf(n + 1);  // n = virtual outside node for background
  const std::uint32_t outside = std::uint32_t(n);
  auto id = [&](int x, int y) { return std::uint32_t(std::size_t(y) * width + x); };
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const bool fg = mask[id(x, y)];
      if (fg) {
        // Already-visited 8-neighbours: W, NW, N, NE.
        static const int nb[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
        for (const auto& d : nb) {
          const int nx = x + d[0], ny = y + d[1];
          if (nx >= 0 && ny >= 0 && nx < width && mask[id(nx, ny)]) uf.unite(id(x, y), id(nx, ny));
        }
      } else {
        if (x == 0 || y == 0 || x == width - 1 || y == height - 1) uf.unite(id(x, y), outside);
        if (x > 0 && !mask[id(x - 1, y)]) uf.unite(id(x, y), id(x - 1, y));
        if (y > 0 && !mask[id(x, y - 1)]) uf.unite(id(x, y), id(x, y - 1));
      }
    }
  Betti b;
  const std::uint32_t out_root = uf.find(outside);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (uf.find(i) != i) continue;
    if (mask[i]) ++b.b0;
    else if (i != out_root) ++b.b1;
  }
  return b;
}

inline int chi_err(const Betti& a, const Betti& b) { return std::abs(a.chi() - b.chi()); }
inline int beta_err(const Betti& a, const Betti& b) { return std::abs(a.b0 - b.b0) + std::abs(a.b1 - b.b1); }

// ---------------------------------------------------------------------------
// Global topology
// ---------------------------------------------------------------------------

struct GlobalTopology {
  double gap = 0;
  double inter = 0;
  double intra = 0;
  double sec = 1;
  bool rasterized = false;
};

inline GlobalTopology global_topology(const Partition& p) {
  const OverlayResult o = compute_overlay(p);
  GlobalTopology g;
  g.gap = std::clamp(o.gap_rate(), 0.0, 1.0);
  g.inter = std::clamp(o.inter_rate(), 0.0, 1.0);
  g.intra = std::clamp(o.intra_rate(), 0.0, 1.0);
  g.sec = shared_edge_consistency(p).sec();
  g.rasterized = o.rasterized;
  return g;
}

// ---------------------------------------------------------------------------
// Vertex-to-boundary alignment
// ---------------------------------------------------------------------------

/// Unit segments between pixels of different labels (the image border is
/// not a boundary).
inline std::vector<Segment> label_boundary_segments(const LabelMask& m) {
  std::vector<Segment> segs;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      if (x + 1 < m.width && m.at(x, y) != m.at(x + 1, y))
        segs.push_back({{double(x + 1), double(y)}, {double(x + 1), double(y + 1)}});
      if (y + 1 < m.height && m.at(x, y) != m.at(x, y + 1))
        segs.push_back({{double(x), double(y + 1)}, {double(x + 1), double(y + 1)}});
    }
  return segs;
}

struct V2bCounts {
  std::size_t peaks = 0;
  std::vector<std::size_t> within;  // per delta
};

inline std::optional<V2bCounts> v2b_counts(const std::vector<Peak>& peaks, const LabelMask& mask,
                                           const std::vector<double>& deltas) {
  auto segs = label_boundary_segments(mask);
  if (peaks.empty() || segs.empty()) return std::nullopt;
  const SegmentIndex index(std::move(segs));
  V2bCounts c;
  c.peaks = peaks.size();
  c.within.assign(deltas.size(), 0);
  for (const auto& pk : peaks) {
    const double d = index.nearest(pk.site()).distance;
    for (std::size_t k = 0; k < deltas.size(); ++k) c.within[k] += d <= deltas[k];
  }
  return c;
}

/// Fraction of peaks within each delta of the label boundaries; nullopt
/// when there are no peaks or no boundaries.
inline std::optional<std::vector<double>> v2b(const std::vector<Peak>& peaks, const LabelMask& mask,
                                              const std::vector<double>& deltas) {
  const auto c = v2b_counts(peaks, mask, deltas);
  if (!c) return std::nullopt;
  std::vector<double> f;
  for (auto w : c->within) f.push_back(double(w) / double(c->peaks));
  return f;
}

// ---------------------------------------------------------------------------
// Peak shape
// ---------------------------------------------------------------------------

struct PeakShape {
  double fwhm_x = 0;
  double fwhm_y = 0;
  int area_at_half = 0;
  double sharpness = 0;
  bool padded = false;  // patch reached past the heatmap border
};

namespace detail {

// Half-maximum crossing distance from the centre of a normalised profile
// (index r is the centre), by linear interpolation.
inline double half_crossing(const std::vector<double>& prof, int r, int dir) {
  for (int k = 1; k <= r; ++k) {
    const double a = prof[std::size_t(r + dir * (k - 1))], b = prof[std::size_t(r + dir * k)];
    if (b < 0.5) return (k - 1) + (a - 0.5) / (a - b);
  }
  return r;
}

}  // namespace detail

/// Shape statistics of each peak on a K x K patch normalised to a centre
/// value of 1. Peaks with a non-positive centre are skipped (skipped counts
/// them).
inline std::vector<PeakShape> peak_shape(const Heatmap& hm, const std::vector<Peak>& peaks, int K = 11,
                                         double sigma = 1.0, std::size_t* skipped = nullptr) {
  if (K < 3 || K % 2 == 0) throw Error("peak_shape: K must be odd and >= 3");
  if (!(sigma > 0)) throw Error("peak_shape: sigma must be > 0");
  const int r = K / 2;
  const int kr = std::max(1, int(std::ceil(3 * sigma)));
  std::vector<double> kernel(std::size_t(2 * kr + 1));
  double ksum = 0;
  for (int i = -kr; i <= kr; ++i) ksum += kernel[std::size_t(i + kr)] = std::exp(-i * i / (2 * sigma * sigma));
  for (auto& k : kernel) k /= ksum;

  std::vector<PeakShape> out;
  if (skipped) *skipped = 0;
  std::vector<double> patch(std::size_t(K) * K);
  for (const auto& pk : peaks) {
    const double centre = hm.at(pk.col, pk.row);
    if (!(centre > 0)) {
      if (skipped) ++*skipped;
      continue;
    }
    PeakShape s;
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        const int x = pk.col + dx, y = pk.row + dy;
        double v = 0;
        if (x < 0 || y < 0 || x >= hm.width || y >= hm.height) s.padded = true;
        else v = hm.at(x, y) / centre;
        patch[std::size_t(dy + r) * K + (dx + r)] = v;
      }
    auto P = [&](int x, int y) { return patch[std::size_t(y) * K + x]; };

    std::vector<double> row(static_cast<std::size_t>(K)), col(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
      row[std::size_t(i)] = P(i, r);
      col[std::size_t(i)] = P(r, i);
    }
    s.fwhm_x = detail::half_crossing(row, r, -1) + detail::half_crossing(row, r, 1);
    s.fwhm_y = detail::half_crossing(col, r, -1) + detail::half_crossing(col, r, 1);

    std::vector<std::uint8_t> seen(patch.size(), 0);
    std::vector<std::pair<int, int>> stack{{r, r}};
    seen[std::size_t(r) * K + r] = 1;
    while (!stack.empty()) {
      const auto [x, y] = stack.back();
      stack.pop_back();
      ++s.area_at_half;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= K || ny >= K) continue;
          auto& f = seen[std::size_t(ny) * K + nx];
          if (f || P(nx, ny) < 0.5) continue;
          f = 1;
          stack.push_back({nx, ny});
        }
    }

    // Smoothed value near the centre (edge-replicated patch), then the
    // five-point Laplacian.
    auto smooth = [&](int cx, int cy) {
      double acc = 0;
      for (int j = -kr; j <= kr; ++j)
        for (int i = -kr; i <= kr; ++i) {
          const int x = std::clamp(cx + i, 0, K - 1), y = std::clamp(cy + j, 0, K - 1);
          acc += kernel[std::size_t(i + kr)] * kernel[std::size_t(j + kr)] * P(x, y);
        }
      return acc;
    };
    const double lap = smooth(r + 1, r) + smooth(r - 1, r) + smooth(r, r + 1) + smooth(r, r - 1) - 4 * smooth(r, r);
    s.sharpness = std::max(0.0, -sigma * sigma * lap);
    out.push_back(s);
  }
  return out;
}

/// Linear-interpolated quantile (q in [0, 1]) of a non-empty sample.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw Error("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const std::size_t lo = std::size_t(std::floor(pos));
  const std::size_t hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct EvaluateOptions {
  int num_classes = 5;
  int band = 2;
  std::vector<double> deltas{2, 4, 6};
  std::vector<int> elongated{1, 3};
  int peak_k = 11;
  double peak_sigma = 1.0;
  float nms_threshold = 0.3f;
};

/// Per-class accumulators. Region scores are averaged over patches where
/// they are defined; matched-pair scores are pooled over all pairs.
struct ClassMetrics {
  double iou_sum = 0, b_iou_sum = 0;
  std::size_t iou_n = 0, b_iou_n = 0;
  double chi_err_sum = 0, beta_err_sum = 0;
  std::size_t topo_n = 0;
  double apls_sum = 0;
  std::size_t apls_n = 0;
  std::size_t pairs = 0;
  double polis_sum = 0, mta_sum = 0, n_ratio_sum = 0, c_iou_sum = 0;
  std::size_t unmatched_pred = 0, unmatched_gt = 0;

  void merge(const ClassMetrics& o) {
    iou_sum += o.iou_sum;
    b_iou_sum += o.b_iou_sum;
    iou_n += o.iou_n;
    b_iou_n += o.b_iou_n;
    chi_err_sum += o.chi_err_sum;
    beta_err_sum += o.beta_err_sum;
    topo_n += o.topo_n;
    apls_sum += o.apls_sum;
    apls_n += o.apls_n;
    pairs += o.pairs;
    polis_sum += o.polis_sum;
    mta_sum += o.mta_sum;
    n_ratio_sum += o.n_ratio_sum;
    c_iou_sum += o.c_iou_sum;
    unmatched_pred += o.unmatched_pred;
    unmatched_gt += o.unmatched_gt;
  }

  static std::optional<double> mean(double s, std::size_t n) {
    return n ? std::optional<double>(s / double(n)) : std::nullopt;
  }
  std::optional<double> iou() const { return mean(iou_sum, iou_n); }
  std::optional<double> b_iou() const { return mean(b_iou_sum, b_iou_n); }
  std::optional<double> polis() const { return mean(polis_sum, pairs); }
  std::optional<double> mta() const { return mean(mta_sum, pairs); }
  std::optional<double> n_ratio() const { return mean(n_ratio_sum, pairs); }
  std::optional<double> c_iou() const { return mean(c_iou_sum, pairs); }
  std::optional<double> apls() const { return mean(apls_sum, apls_n); }
  std::optional<double> chi_err() const { return mean(chi_err_sum, topo_n); }
  std::optional<double> beta_err() const { return mean(beta_err_sum, topo_n); }
};

struct MetricsReport {
  std::vector<ClassMetrics> classes;
  std::vector<int> elongated;
  std::size_t patches = 0;
  double gap_sum = 0, inter_sum = 0, intra_sum = 0, sec_sum = 0;
  std::size_t overlay_rasterized = 0;
  std::vector<double> deltas;
  std::size_t v2b_peaks = 0;
  std::vector<std::size_t> v2b_within;
  std::vector<double> fwhm_x, fwhm_y, area_at_half, sharpness;
  std::size_t peaks_skipped = 0, peaks_padded = 0;

  void merge(const MetricsReport& o) {
    if (classes.size() < o.classes.size()) classes.resize(o.classes.size());
    for (std::size_t c = 0; c < o.classes.size(); ++c) classes[c].merge(o.classes[c]);
    if (elongated.empty()) elongated = o.elongated;
    patches += o.patches;
    gap_sum += o.gap_sum;
    inter_sum += o.inter_sum;
    intra_sum += o.intra_sum;
    sec_sum += o.sec_sum;
    overlay_rasterized += o.overlay_rasterized;
    if (deltas.empty()) deltas = o.deltas;
    v2b_peaks += o.v2b_peaks;
    if (v2b_within.size() < o.v2b_within.size()) v2b_within.resize(o.v2b_within.size(), 0);
    for (std::size_t k = 0; k < o.v2b_within.size(); ++k) v2b_within[k] += o.v2b_within[k];
    for (auto [dst, src] : {std::pair{&fwhm_x, &o.fwhm_x}, {&fwhm_y, &o.fwhm_y},
                            {&area_at_half, &o.area_at_half}, {&sharpness, &o.sharpness}})
      dst->insert(dst->end(), src->begin(), src->end());
    peaks_skipped += o.peaks_skipped;
    peaks_padded += o.peaks_padded;
  }

  double gap() const { return patches ? gap_sum / double(patches) : 0; }
  double inter() const { return patches ? inter_sum / double(patches) : 0; }
  double intra() const { return patches ? intra_sum / double(patches) : 0; }
  double sec() const { return patches ? sec_sum / double(patches) : 1; }

  std::optional<std::vector<double>> v2b() const {
    if (v2b_peaks == 0) return std::nullopt;
    std::vector<double> f;
    for (auto w : v2b_within) f.push_back(double(w) / double(v2b_peaks));
    return f;
  }

  /// Mean over classes of a per-class score, skipping classes where it is
  /// undefined.
  template <typename Get>
  std::optional<double> class_mean(Get&& get) const {
    double s = 0;
    std::size_t n = 0;
    for (const auto& c : classes)
      if (auto v = get(c)) {
        s += *v;
        ++n;
      }
    return n ? std::optional<double>(s / double(n)) : std::nullopt;
  }
};

/// Scores one predicted partition against its ground truth. The heatmap,
/// when given, adds vertex alignment (against the prediction's own label
/// boundaries) and peak-shape statistics.
inline MetricsReport evaluate_patch(const Partition& pred, const Partition& gt, const LabelMask& gt_mask,
                                    const EvaluateOptions& opt, const Heatmap* heatmap = nullptr) {
  if (pred.width != gt_mask.width || pred.height != gt_mask.height || gt.width != gt_mask.width ||
      gt.height != gt_mask.height)
    throw Error("evaluate: prediction, ground truth and mask sizes differ");
  MetricsReport rep;
  rep.patches = 1;
  rep.elongated = opt.elongated;
  rep.deltas = opt.deltas;
  rep.classes.resize(std::size_t(opt.num_classes));
  const LabelMask pm = rasterize(pred, opt.num_classes);
  const int W = gt_mask.width, H = gt_mask.height;

  for (int c = 0; c < opt.num_classes; ++c) {
    auto& cm = rep.classes[std::size_t(c)];
    const auto pb = class_binary(pm, c), gb = class_binary(gt_mask, c);
    const auto iou = detail::binary_iou(pb, gb);
    if (!iou.vacuous) {
      cm.iou_sum += iou.value;
      ++cm.iou_n;
      const auto biou = boundary_iou(pm, gt_mask, c, opt.band);
      if (!biou.vacuous) {
        cm.b_iou_sum += biou.value;
        ++cm.b_iou_n;
      }
      const Betti bp = betti(pb, W, H), bg = betti(gb, W, H);
      cm.chi_err_sum += chi_err(bp, bg);
      cm.beta_err_sum += beta_err(bp, bg);
      ++cm.topo_n;
    }
    if (std::find(opt.elongated.begin(), opt.elongated.end(), c) != opt.elongated.end()) {
      const auto a = apls(skeleton_graph(gb, W, H), skeleton_graph(pb, W, H));
      if (a) {
        cm.apls_sum += *a;
        ++cm.apls_n;
      }
    }
    const MatchSet m = match_polygons(pred, gt, c);
    for (const auto& pr : m.pairs) {
      const Polygon& a = pred.polygons[pr.pred].polygon;
      const Polygon& b = gt.polygons[pr.gt].polygon;
      const std::size_t na = vertex_count(a), nb = vertex_count(b);
      ++cm.pairs;
      cm.polis_sum += polis(a, b);
      cm.mta_sum += mta(a, b);
      cm.n_ratio_sum += n_ratio(na, nb);
      cm.c_iou_sum += c_iou(pr.iou, na, nb);
    }
    cm.unmatched_pred += m.unmatched_pred.size();
    cm.unmatched_gt += m.unmatched_gt.size();
  }

  const GlobalTopology g = global_topology(pred);
  rep.gap_sum = g.gap;
  rep.inter_sum = g.inter;
  rep.intra_sum = g.intra;
  rep.sec_sum = g.sec;
  rep.overlay_rasterized = g.rasterized;

  if (heatmap) {
    if (heatmap->width != W || heatmap->height != H) throw Error("evaluate: heatmap size differs from mask");
    const auto peaks = extract_peaks(*heatmap, opt.nms_threshold);
    if (auto c = v2b_counts(peaks, pm, opt.deltas)) {
      rep.v2b_peaks = c->peaks;
      rep.v2b_within = c->within;
    } else {
      rep.v2b_within.assign(opt.deltas.size(), 0);
    }
    std::size_t skipped = 0;
    for (const auto& s : peak_shape(*heatmap, peaks, opt.peak_k, opt.peak_sigma, &skipped)) {
      rep.fwhm_x.push_back(s.fwhm_x);
      rep.fwhm_y.push_back(s.fwhm_y);
      rep.area_at_half.push_back(double(s.area_at_half));
      rep.sharpness.push_back(s.sharpness);
      rep.peaks_padded += s.padded;
    }
    rep.peaks_skipped = skipped;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json stats_json(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  return {{"median", quantile(v, 0.5)}, {"p90", quantile(v, 0.9)}, {"count", v.size()}};
}

}  // namespace detail

inline nlohmann::json report_to_json(const MetricsReport& r, const std::vector<std::string>& names = {}) {
  using nlohmann::json;
  json j;
  j["patches"] = r.patches;
  json classes = json::array();
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& m = r.classes[c];
    json e;
    e["class"] = c;
    if (c < names.size()) e["name"] = names[c];
    e["iou"] = detail::opt_json(m.iou());
    e["b_iou"] = detail::opt_json(m.b_iou());
    e["polis"] = detail::opt_json(m.polis());
    e["mta"] = detail::opt_json(m.mta());
    e["n_ratio"] = detail::opt_json(m.n_ratio());
    e["c_iou"] = detail::opt_json(m.c_iou());
    const bool elongated = std::find(r.elongated.begin(), r.elongated.end(), int(c)) != r.elongated.end();
    if (elongated) e["apls"] = detail::opt_json(m.apls());
    e["chi_err"] = detail::opt_json(m.chi_err());
    e["beta_err"] = detail::opt_json(m.beta_err());
    e["matched_pairs"] = m.pairs;
    e["unmatched_pred"] = m.unmatched_pred;
    e["unmatched_gt"] = m.unmatched_gt;
    classes.push_back(e);
  }
  j["classes"] = classes;
  j["global"] = {{"gap_rate", r.gap()},
                 {"inter_overlap", r.inter()},
                 {"intra_overlap", r.intra()},
                 {"sec", r.sec()},
                 {"overlay_rasterized", r.overlay_rasterized}};
  if (auto v = r.v2b()) {
    json a;
    a["peaks"] = r.v2b_peaks;
    json per = json::object();
    double s = 0;
    for (std::size_t k = 0; k < v->size(); ++k) {
      char key[32];
      std::snprintf(key, sizeof key, "%g", r.deltas[k]);
      per[key] = (*v)[k];
      s += (*v)[k];
    }
    a["v2b"] = per;
    a["v2b_avg"] = s / double(v->size());
    j["alignment"] = a;
  } else {
    j["alignment"] = nullptr;
  }
  if (!r.fwhm_x.empty()) {
    j["peak_shape"] = {{"fwhm_x", detail::stats_json(r.fwhm_x)},
                       {"fwhm_y", detail::stats_json(r.fwhm_y)},
                       {"area_at_half", detail::stats_json(r.area_at_half)},
                       {"sharpness", detail::stats_json(r.sharpness)},
                       {"skipped", r.peaks_skipped},
                       {"padded", r.peaks_padded}};
  } else {
    j["peak_shape"] = nullptr;
  }
  return j;
}

namespace detail {

inline std::string fmt_cell(const std::optional<double>& v, int precision = 4) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

// Comma-separated with each column padded to a common width.
inline std::string aligned_csv(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::string cell = r[i];
      if (i + 1 < r.size()) {
        cell += ',';
        cell.append(width[i] + 1 - cell.size() + 1, ' ');
      }
      out += cell;
    }
    out += '\n';
  }
  return out;
}

}  // namespace detail

/// Per-class rows followed by one global row.
inline std::string report_to_csv(const MetricsReport& r, const std::vector<std::string>& names = {}) {
  std::vector<std::vector<std::string>> rows{{"class", "iou", "b_iou", "n_ratio", "c_iou", "polis", "mta", "apls",
                                              "chi_err", "beta_err", "gap", "inter", "intra", "sec"}};
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& m = r.classes[c];
    const bool elongated = std::find(r.elongated.begin(), r.elongated.end(), int(c)) != r.elongated.end();
    rows.push_back({c < names.size() ? names[c] : std::to_string(c), detail::fmt_cell(m.iou()),
                    detail::fmt_cell(m.b_iou()), detail::fmt_cell(m.n_ratio()), detail::fmt_cell(m.c_iou()),
                    detail::fmt_cell(m.polis()), detail::fmt_cell(m.mta(), 2),
                    elongated ? detail::fmt_cell(m.apls()) : "-", detail::fmt_cell(m.chi_err()),
                    detail::fmt_cell(m.beta_err()), "", "", "", ""});
  }
  rows.push_back({"global", "", "", "", "", "", "", "", "", "", detail::fmt_cell(100 * r.gap(), 2),
                  detail::fmt_cell(100 * r.inter(), 2), detail::fmt_cell(100 * r.intra(), 2),
                  detail::fmt_cell(100 * r.sec(), 2)});
  return detail::aligned_csv(rows);
}

}  // namespace acpv
