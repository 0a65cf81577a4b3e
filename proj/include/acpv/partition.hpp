#pragma once

#include <cstdint>
#include <vector>

#include "acpv/geometry.hpp"

namespace acpv {

struct LabeledPolygon {
  int cls = 0;
  Polygon polygon;
};

/// Labeled polygons-with-holes over the domain [0, width] x [0, height].
struct Partition {
  int width = 0;
  int height = 0;
  std::vector<LabeledPolygon> polygons;
};

/// Label written by rasterization where no polygon covers a pixel center.
inline constexpr std::uint8_t kUnlabeled = 255;

inline std::size_t vertex_count(const Partition& p) {
  std::size_t n = 0;
  for (const auto& lp : p.polygons) n += vertex_count(lp.polygon);
  return n;
}

}  // namespace acpv
