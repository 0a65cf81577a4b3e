#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "acpv/geometry.hpp"

namespace acpv {

/// A ring tagged with the index of the region it bounds. A region is the
/// even-odd interior of all its rings.
struct OwnedRing {
  const Ring* ring;
  std::uint32_t owner;
};

/// Visits the pixel centres covered by each region of a W x H grid.
/// fill(row, first_col, last_col, owner) receives closed column ranges; a
/// centre lying exactly on a crossing counts as covered.
template <typename Fill>
void scan_regions(int width, int height, std::span<const OwnedRing> rings, Fill&& fill) {
  struct Crossing {
    std::uint32_t owner;
    double x;
  };
  std::vector<std::vector<Crossing>> rows(std::size_t(std::max(height, 0)));
  for (const OwnedRing& r : rings) {
    const Ring& pts = *r.ring;
    for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
      const Point a = pts[j], b = pts[i];
      if (a.y == b.y) continue;
      const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
      // Rows whose centre c = row + 0.5 satisfies lo <= c < hi.
      const int r0 = std::max(0, int(std::ceil(lo - 0.5)));
      const int r1 = std::min(height - 1, int(std::ceil(hi - 0.5)) - 1);
      for (int row = r0; row <= r1; ++row) {
        const double c = row + 0.5;
        rows[row].push_back({r.owner, a.x + (c - a.y) * (b.x - a.x) / (b.y - a.y)});
      }
    }
  }
  for (int row = 0; row < height; ++row) {
    auto& xs = rows[row];
    std::sort(xs.begin(), xs.end(), [](const Crossing& l, const Crossing& r) {
      return l.owner < r.owner || (l.owner == r.owner && l.x < r.x);
    });
    for (std::size_t k = 0; k + 1 < xs.size();) {
      if (xs[k].owner != xs[k + 1].owner) {
        ++k;
        continue;
      }
      const int c0 = std::max(0, int(std::ceil(xs[k].x - 0.5)));
      const int c1 = std::min(width - 1, int(std::floor(xs[k + 1].x - 0.5)));
      if (c0 <= c1) fill(row, c0, c1, xs[k].owner);
      k += 2;
    }
  }
}

}  // namespace acpv
