#pragma once

// Deterministic SVG rendering of partitions: class fills, black outlines,
// optional vertex dots and gap/overlap shading.

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "acpv/geometry.hpp"
#include "acpv/overlay.hpp"
#include "acpv/partition.hpp"

namespace acpv {

struct SvgStyle {
  std::vector<std::string> palette{"#d62728", "#7f7f7f", "#2ca02c", "#1f77b4", "#e3c16f"};
  double scale = 4.0;
  double stroke_width = 1.0;
  bool vertices = true;
  bool overlay = true;  // gaps in black, overlaps in red
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string ring_path(const Ring& r, double s) {
  std::string d;
  for (std::size_t i = 0; i < r.size(); ++i) {
    d += i ? " L" : "M";
    d += num(r[i].x * s) + ' ' + num(r[i].y * s);
  }
  return d + " Z";
}

}  // namespace detail

inline std::string render_svg(const Partition& p, const SvgStyle& style = {}) {
  const double s = style.scale;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(p.width * s) + "\" height=\"" +
         detail::num(p.height * s) + "\" viewBox=\"0 0 " + detail::num(p.width * s) + ' ' +
         detail::num(p.height * s) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + detail::num(p.width * s) + "\" height=\"" + detail::num(p.height * s) +
         "\" fill=\"#ffffff\"/>\n";
  out += "<g id=\"polygons\" stroke=\"#000000\" stroke-width=\"" + detail::num(style.stroke_width) +
         "\" fill-rule=\"evenodd\">\n";
  for (std::size_t i = 0; i < p.polygons.size(); ++i) {
    const auto& lp = p.polygons[i];
    const std::string fill = style.palette.empty()
                                 ? std::string("#cccccc")
                                 : style.palette[std::size_t(lp.cls) % style.palette.size()];
    std::string d = detail::ring_path(lp.polygon.outer, s);
    for (const auto& h : lp.polygon.holes) d += ' ' + detail::ring_path(h, s);
    out += "<path data-class=\"" + std::to_string(lp.cls) + "\" fill=\"" + fill + "\" d=\"" + d + "\"/>\n";
  }
  out += "</g>\n";

  if (style.overlay) {
    const OverlayResult o = compute_overlay(p, true);
    out += "<g id=\"overlay\" stroke=\"none\">\n";
    for (const auto& pc : o.pieces) {
      const char* fill = pc.kind == PieceKind::gap ? "#000000" : "#ff0000";
      const Ring r{{pc.x0, pc.y00}, {pc.x1, pc.y01}, {pc.x1, pc.y11}, {pc.x0, pc.y10}};
      out += std::string("<path class=\"") + (pc.kind == PieceKind::gap ? "gap" : "overlap") + "\" fill=\"" +
             fill + "\" d=\"" + detail::ring_path(r, s) + "\"/>\n";
    }
    out += "</g>\n";
  }

  if (style.vertices) {
    std::set<Point, ScanOrder> pts;
    for (const auto& lp : p.polygons) {
      pts.insert(lp.polygon.outer.begin(), lp.polygon.outer.end());
      for (const auto& h : lp.polygon.holes) pts.insert(h.begin(), h.end());
    }
    out += "<g id=\"vertices\" fill=\"#ff8c00\">\n";
    const std::string r = detail::num(1.5 * style.stroke_width);
    for (Point q : pts)
      out += "<circle cx=\"" + detail::num(q.x * s) + "\" cy=\"" + detail::num(q.y * s) + "\" r=\"" + r + "\"/>\n";
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace acpv
