#pragma once

// Centreline pseudo-graphs of binary masks and the path-length similarity
// score computed on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "acpv/error.hpp"
#include "acpv/geometry.hpp"

namespace acpv {

/// Zhang-Suen thinning. Input and output are row-major 0/1 grids.
inline std::vector<std::uint8_t> zhang_suen_thin(std::vector<std::uint8_t> img, int width, int height) {
  if (img.size() != std::size_t(width) * height) throw Error("zhang_suen_thin: size mismatch");
  auto px = [&](int x, int y) -> int {
    return x >= 0 && y >= 0 && x < width && y < height && img[std::size_t(y) * width + x] ? 1 : 0;
  };
  std::vector<std::size_t> del;
  for (bool changed = true; changed;) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      del.clear();
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          if (!img[std::size_t(y) * width + x]) continue;
          // P2..P9 clockwise from north.
          const int p[8] = {px(x, y - 1), px(x + 1, y - 1), px(x + 1, y), px(x + 1, y + 1),
                            px(x, y + 1), px(x - 1, y + 1), px(x - 1, y), px(x - 1, y - 1)};
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[k];
            a += !p[k] && p[(k + 1) % 8];
          }
          if (b < 2 || b > 6 || a != 1) continue;
          if (pass == 0) {
            if (p[0] * p[2] * p[4] || p[2] * p[4] * p[6]) continue;
          } else {
            if (p[0] * p[2] * p[6] || p[0] * p[4] * p[6]) continue;
          }
          del.push_back(std::size_t(y) * width + x);
        }
      for (auto i : del) img[i] = 0;
      changed |= !del.empty();
    }
  }
  return img;
}

struct SkeletonGraph {
  std::vector<Point> nodes;
  /// adjacency[i] = (neighbour, length)
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency;
  /// Nodes whose degree differs from 2.
  std::vector<std::uint32_t> control_nodes;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }

  void add_edge(std::uint32_t a, std::uint32_t b, double w) {
    adjacency[a].push_back({b, w});
    adjacency[b].push_back({a, w});
  }

  void finalize() {
    control_nodes.clear();
    for (std::uint32_t i = 0; i < adjacency.size(); ++i)
      if (adjacency[i].size() != 2) control_nodes.push_back(i);
  }
};

/// Skeleton pixels become nodes (at pixel centres) joined to their
/// 8-neighbours with length 1 or sqrt(2).
inline SkeletonGraph skeleton_graph(const std::vector<std::uint8_t>& binary, int width, int height) {
  const auto sk = zhang_suen_thin(binary, width, height);
  SkeletonGraph g;
  std::vector<std::uint32_t> id(sk.size(), std::numeric_limits<std::uint32_t>::max());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (sk[std::size_t(y) * width + x]) {
        id[std::size_t(y) * width + x] = std::uint32_t(g.nodes.size());
        g.nodes.push_back({x + 0.5, y + 0.5});
      }
  g.adjacency.resize(g.nodes.size());
  static const int fwd[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const auto a = id[std::size_t(y) * width + x];
      if (a == std::numeric_limits<std::uint32_t>::max()) continue;
      for (const auto& d : fwd) {
        const int nx = x + d[0], ny = y + d[1];
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        const auto b = id[std::size_t(ny) * width + nx];
        if (b == std::numeric_limits<std::uint32_t>::max()) continue;
        g.add_edge(a, b, d[0] && d[1] ? std::sqrt(2.0) : 1.0);
      }
    }
  g.finalize();
  return g;
}

namespace detail {

inline std::vector<double> dijkstra(const SkeletonGraph& g, std::uint32_t src) {
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0;
  pq.push({0, src});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : g.adjacency[u])
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.push({dist[v], v});
      }
  }
  return dist;
}

inline std::uint32_t nearest_node(const SkeletonGraph& g, Point p) {
  std::uint32_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < g.size(); ++i) {
    const double d = distance(p, g.nodes[i]);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

/// Average path-length similarity of pred against gt over all gt control
/// node pairs joined by a finite path. nullopt when gt has no such pair;
/// 0 when pred is empty.
inline std::optional<double> apls(const SkeletonGraph& gt, const SkeletonGraph& pred) {
  const auto& ctrl = gt.control_nodes;
  std::vector<std::uint32_t> mapped(ctrl.size());
  if (!pred.empty())
    for (std::size_t i = 0; i < ctrl.size(); ++i) mapped[i] = detail::nearest_node(pred, gt.nodes[ctrl[i]]);
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < ctrl.size(); ++i) {
    const auto dg = detail::dijkstra(gt, ctrl[i]);
    std::vector<double> dp;
    if (!pred.empty()) dp = detail::dijkstra(pred, mapped[i]);
    for (std::size_t j = i + 1; j < ctrl.size(); ++j) {
      const double lg = dg[ctrl[j]];
      if (!std::isfinite(lg) || lg <= 0) continue;
      ++pairs;
      const double lp = pred.empty() ? std::numeric_limits<double>::infinity() : dp[mapped[j]];
      sum += std::isfinite(lp) ? std::min(1.0, std::abs(lg - lp) / lg) : 1.0;
    }
  }
  if (pairs == 0) return std::nullopt;
  if (pred.empty()) return 0.0;
  return 1.0 - sum / double(pairs);
}

}  // namespace acpv
