#pragma once

// Independent reference implementations and hand-built fixtures shared by
// the unit tests and the acceptance run.

#include <cmath>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "acpv/geometry.hpp"
#include "acpv/metrics.hpp"
#include "acpv/skeleton.hpp"
#include "acpv/validate.hpp"

namespace oracle {

using namespace acpv;

inline Ring rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

inline Partition make(int w, int h, std::vector<LabeledPolygon> polys) {
  Partition p;
  p.width = w;
  p.height = h;
  p.polygons = std::move(polys);
  return p;
}

// Boundary distance by dense sampling of every ring.
inline double sampled_boundary_distance(Point p, const Polygon& poly, double spacing) {
  double best = 1e300;
  auto ring = [&](const Ring& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Point a = r[i], b = r[(i + 1) % r.size()];
      const int n = std::max(1, int(std::ceil(distance(a, b) / spacing)));
      for (int k = 0; k <= n; ++k) best = std::min(best, distance(p, a + (double(k) / n) * (b - a)));
    }
  };
  ring(poly.outer);
  for (const auto& h : poly.holes) ring(h);
  return best;
}

inline double polis(const Polygon& a, const Polygon& b, double spacing) {
  auto mean = [&](const Polygon& from, const Polygon& to) {
    double s = 0;
    std::size_t n = 0;
    auto add = [&](const Ring& r) {
      for (Point p : r) {
        s += sampled_boundary_distance(p, to, spacing);
        ++n;
      }
    };
    add(from.outer);
    for (const auto& h : from.holes) add(h);
    return s / double(n);
  };
  return 0.5 * (mean(a, b) + mean(b, a));
}

// Star-shaped, hence simple, random polygon.
inline Polygon random_star(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> nv(3, 9);
  const int n = nv(rng);
  const Point c{20 * u(rng), 20 * u(rng)};
  Ring r;
  for (int i = 0; i < n; ++i) {
    const double a = 2 * M_PI * (i + 0.8 * u(rng)) / n;
    const double rad = 2 + 8 * u(rng);
    r.push_back({c.x + rad * std::cos(a), c.y + rad * std::sin(a)});
  }
  return {r, {}};
}

// 8-connected foreground, 4-connected background; holes are background
// components that do not touch the border.
inline Betti flood_fill_betti(const std::vector<std::uint8_t>& m, int W, int H) {
  std::vector<char> seen(m.size(), 0);
  Betti b;
  for (int start = 0; start < int(m.size()); ++start) {
    if (seen[start]) continue;
    const bool fg = m[start];
    bool touches = false;
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const int i = q.front();
      q.pop();
      const int x = i % W, y = i / W;
      if (x == 0 || y == 0 || x == W - 1 || y == H - 1) touches = true;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy) continue;
          if (!fg && dx && dy) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
          const int j = ny * W + nx;
          if (seen[j] || bool(m[j]) != fg) continue;
          seen[j] = 1;
          q.push(j);
        }
    }
    if (fg) ++b.b0;
    else if (!touches) ++b.b1;
  }
  return b;
}

inline std::vector<std::uint8_t> random_binary(std::mt19937_64& rng, int W, int H) {
  std::uniform_real_distribution<double> u(0, 1);
  const double density = 0.2 + 0.6 * u(rng);
  std::vector<std::uint8_t> m(std::size_t(W) * H);
  for (auto& v : m) v = u(rng) < density;
  return m;
}

// Textbook recursive Douglas-Peucker; ties keep the earliest index.
inline void dp_recursive(const std::vector<Point>& pts, std::size_t lo, std::size_t hi, double eps,
                         std::vector<bool>& keep) {
  if (hi <= lo + 1) return;
  double dmax = -1;
  std::size_t idx = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
    if (d > dmax) {
      dmax = d;
      idx = i;
    }
  }
  if (dmax > eps) {
    keep[idx] = true;
    dp_recursive(pts, lo, idx, eps, keep);
    dp_recursive(pts, idx, hi, eps, keep);
  }
}

inline std::vector<std::size_t> dp_indices(const std::vector<Point>& pts, double eps) {
  std::vector<bool> keep(pts.size(), false);
  keep.front() = keep.back() = true;
  dp_recursive(pts, 0, pts.size() - 1, eps, keep);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (keep[i]) out.push_back(i);
  return out;
}

// Monotone-in-x random walk; every third chain is rounded to integers so
// exact distance ties occur.
inline std::vector<Point> random_chain(std::mt19937_64& rng, int t) {
  std::uniform_real_distribution<double> step(-2, 2);
  std::uniform_int_distribution<int> len(2, 40);
  std::vector<Point> pts{{0, 0}};
  const int n = len(rng);
  for (int k = 1; k < n; ++k) pts.push_back({pts.back().x + 1 + std::abs(step(rng)), pts.back().y + step(rng)});
  if (t % 3 == 0)
    for (auto& p : pts) p = {std::round(p.x), std::round(p.y)};
  return pts;
}

inline SkeletonGraph graph(std::vector<Point> nodes, std::vector<std::tuple<int, int, double>> edges) {
  SkeletonGraph g;
  g.nodes = std::move(nodes);
  g.adjacency.resize(g.nodes.size());
  for (auto [a, b, w] : edges) g.add_edge(std::uint32_t(a), std::uint32_t(b), w);
  g.finalize();
  return g;
}

// Path of unit edges from (0, 0) to (n, 0).
inline SkeletonGraph line_graph(int n) {
  std::vector<Point> nodes;
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 0; i <= n; ++i) {
    nodes.push_back({double(i), 0});
    if (i) edges.push_back({i - 1, i, 1.0});
  }
  return graph(nodes, edges);
}

// Three arms of the given lengths from a centre at the origin.
inline SkeletonGraph star_graph(double a, double b, double c) {
  return graph({{0, 0}, {-5, 0}, {5, 0}, {0, 5}}, {{0, 1, a}, {0, 2, b}, {0, 3, c}});
}

struct AplsFixture {
  std::string name;
  SkeletonGraph gt, pred;
  std::optional<double> expect;
};

inline std::vector<AplsFixture> apls_fixtures() {
  const auto line = line_graph(10);
  auto bridge = [](std::vector<std::tuple<int, int, double>> e) { return graph({{0, 0}, {10, 0}}, std::move(e)); };
  const auto cycle = graph({{0, 0}, {1, 0}, {1, 1}}, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
  const auto two = graph({{0, 0}, {4, 0}, {20, 0}, {24, 0}}, {{0, 1, 4.0}, {2, 3, 4.0}});
  return {
      {"identity", line, line, 1.0},
      {"detour", line, bridge({{0, 1, 15.0}}), 0.5},
      {"shortcut", line, bridge({{0, 1, 4.0}}), 0.4},
      {"too long", line, bridge({{0, 1, 25.0}}), 0.0},
      {"missing corridor", line, bridge({}), 0.0},
      {"offset nodes", line, graph({{0.3, 0.2}, {9.8, -0.3}}, {{0, 1, 10.0}}), 1.0},
      {"empty prediction", line, SkeletonGraph{}, 0.0},
      {"cycle", cycle, cycle, std::nullopt},
      // Arm pairs differ by 0.4, two of the three leaf pairs by 0.2.
      {"star", star_graph(5, 5, 5), star_graph(5, 5, 7), 1.0 - 0.8 / 6.0},
      // No pairs across the two components.
      {"two components", two,
       graph({{0, 0}, {4, 0}, {20, 0}, {24, 0}}, {{0, 1, 4.0}, {2, 3, 6.0}}), 0.75},
  };
}

struct ViolationFixture {
  char constraint;
  Partition partition;
  std::function<bool(const ComplianceReport&)> flag;
};

// One partition per constraint, each breaking that constraint.
inline std::vector<ViolationFixture> violation_fixtures() {
  Ring cw = rect(0, 0, 2, 2);
  std::reverse(cw.begin(), cw.end());
  return {
      {'a', make(3, 2, {{0, {rect(0, 0, 2, 2), {}}}, {1, {rect(1, 0, 3, 2), {}}}}),
       [](const ComplianceReport& r) { return r.planar_partition_ok; }},
      {'b', make(4, 2, {{0, {rect(0, 0, 2, 2), {}}}, {1, {rect(2, 0, 4, 1), {}}}, {2, {rect(2, 1, 4, 2), {}}}}),
       [](const ComplianceReport& r) { return r.shared_boundaries_ok; }},
      {'c', make(4, 2, {{0, {rect(0, 0, 3, 2), {}}}}),
       [](const ComplianceReport& r) { return r.zero_gap_overlap_ok; }},
      {'d', make(2, 2, {{0, {cw, {}}}}), [](const ComplianceReport& r) { return r.linear_geometry_ok; }},
      {'e', make(4, 2, {{0, {rect(0, 0, 2, 2), {}}}, {0, {rect(2, 0, 4, 2), {}}}}),
       [](const ComplianceReport& r) { return r.semantic_consistency_ok; }},
      {'f', make(2, 2, {{0, {{{0, 0}, {1, 0}, {2, 0}, {2, 2}, {0, 2}}, {}}}}),
       [](const ComplianceReport& r) { return r.minimal_redundancy_ok; }},
  };
}

}  // namespace oracle
