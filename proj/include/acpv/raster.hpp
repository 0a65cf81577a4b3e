#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "acpv/error.hpp"

namespace acpv {

/// Row-major grid of class indices.
struct LabelMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;
  int num_classes = 1;

  LabelMask() = default;
  LabelMask(int w, int h, std::uint8_t fill = 0, int classes = 1)
      : width(w), height(h), labels(std::size_t(w) * h, fill), num_classes(classes) {}

  std::uint8_t& at(int x, int y) { return labels[std::size_t(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;
};

/// Throws unless the mask is non-empty and every label is below num_classes.
inline void check_mask(const LabelMask& m) {
  if (m.width < 1 || m.height < 1) throw Error("mask: empty dimensions");
  if (m.labels.size() != std::size_t(m.width) * m.height) throw Error("mask: size mismatch");
  for (auto v : m.labels)
    if (v >= m.num_classes) throw Error("mask: label exceeds num_classes");
}

/// Row-major float grid, values in [0, 1].
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  Heatmap() = default;
  Heatmap(int w, int h, float fill = 0.f) : width(w), height(h), values(std::size_t(w) * h, fill) {}

  float& at(int x, int y) { return values[std::size_t(y) * width + x]; }
  float at(int x, int y) const { return values[std::size_t(y) * width + x]; }

  friend bool operator==(const Heatmap&, const Heatmap&) = default;
};

/// Binary class mask: 1 where labels == cls.
inline std::vector<std::uint8_t> class_binary(const LabelMask& m, int cls) {
  std::vector<std::uint8_t> out(m.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.labels[i] == cls;
  return out;
}

}  // namespace acpv
