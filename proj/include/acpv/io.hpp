#pragma once

// File formats:
//   masks     8-bit PGM (P5) or 8-bit grayscale PNG
//   heatmaps  grayscale PFM ("Pf"), written little-endian (scale -1)
//   vectors   GeoJSON FeatureCollection in pixel units, no CRS

#include <png.h>

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acpv/error.hpp"
#include "acpv/geometry.hpp"
#include "acpv/partition.hpp"
#include "acpv/raster.hpp"

namespace acpv {

struct LoadDiagnostics {
  std::size_t clamped_values = 0;
  std::size_t reoriented_rings = 0;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

// Netpbm-style header tokenizer: whitespace separated, '#' starts a comment.
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : s_(bytes) {}

  std::string token() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw Error("unexpected EOF");
    return s_.substr(start, pos_ - start);
  }

  long integer(const char* what) {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0' || t.empty()) throw Error(std::string("malformed header: bad ") + what);
    return v;
  }

  double real(const char* what) {
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (*end != '\0' || t.empty()) throw Error(std::string("malformed header: bad ") + what);
    return v;
  }

  // Consumes the single whitespace byte that ends the header.
  std::size_t data_offset() {
    if (pos_ >= s_.size()) throw Error("unexpected EOF");
    if (!std::isspace(static_cast<unsigned char>(s_[pos_])))
      throw Error("malformed header: missing separator");
    return pos_ + 1;
  }

 private:
  void skip() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

inline bool has_png_signature(const std::string& bytes) {
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

inline LabelMask decode_pgm(const std::string& bytes) {
  HeaderReader h(bytes);
  if (h.token() != "P5") throw Error("malformed header: expected P5");
  const long w = h.integer("width");
  const long hgt = h.integer("height");
  const long maxval = h.integer("maxval");
  if (w < 1 || hgt < 1) throw Error("malformed header: dimensions must be positive");
  if (maxval < 1) throw Error("malformed header: bad maxval");
  if (maxval > 255) throw Error("value >= 256: only 8-bit masks are supported");
  const std::size_t off = h.data_offset();
  const std::size_t n = std::size_t(w) * std::size_t(hgt);
  if (bytes.size() < off + n) throw Error("unexpected EOF");
  if (bytes.size() > off + n) throw Error("dimension mismatch: trailing data after raster");
  LabelMask m(static_cast<int>(w), static_cast<int>(hgt));
  std::memcpy(m.labels.data(), bytes.data() + off, n);
  return m;
}

inline LabelMask decode_png(const std::string& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw Error(std::string("png: ") + image.message);
  const auto native = image.format;
  if (native & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) {
    png_image_free(&image);
    throw Error("png: expected single-channel grayscale");
  }
  if (native & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error("value >= 256: only 8-bit masks are supported");
  }
  image.format = PNG_FORMAT_GRAY;
  LabelMask m(int(image.width), int(image.height));
  if (!png_image_finish_read(&image, nullptr, m.labels.data(), 0, nullptr))
    throw Error(std::string("png: ") + image.message);
  return m;
}

}  // namespace detail

/// Loads an 8-bit mask. num_classes is 1 + max label unless given.
inline LabelMask load_mask(const std::filesystem::path& path,
                           std::optional<int> num_classes = std::nullopt) {
  const std::string bytes = detail::read_file(path);
  LabelMask m = detail::has_png_signature(bytes) ? detail::decode_png(bytes)
                                                 : detail::decode_pgm(bytes);
  int max_label = 0;
  for (auto v : m.labels) max_label = std::max(max_label, int(v));
  m.num_classes = max_label + 1;
  if (num_classes) {
    if (*num_classes < m.num_classes)
      throw Error("mask: label " + std::to_string(max_label) + " exceeds configured class count");
    m.num_classes = *num_classes;
  }
  return m;
}

inline std::string encode_pgm(const LabelMask& m) {
  std::string out = "P5\n" + std::to_string(m.width) + " " + std::to_string(m.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(m.labels.data()), m.labels.size());
  return out;
}

/// Writes PNG when the extension is .png, PGM otherwise.
inline void save_mask(const LabelMask& m, const std::filesystem::path& path) {
  if (path.extension() == ".png") {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(m.width);
    image.height = png_uint_32(m.height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, m.labels.data(), 0, nullptr))
      throw Error(std::string("png: ") + image.message);
    return;
  }
  detail::write_file(path, encode_pgm(m));
}

inline Heatmap decode_pfm(const std::string& bytes, LoadDiagnostics* diag = nullptr) {
  detail::HeaderReader h(bytes);
  const std::string magic = h.token();
  if (magic == "PF") throw Error("expected grayscale Pf");
  if (magic != "Pf") throw Error("bad magic: expected grayscale Pf");
  const long w = h.integer("width");
  const long hgt = h.integer("height");
  const double scale = h.real("scale");
  if (w < 1 || hgt < 1) throw Error("malformed header: dimensions must be positive");
  if (scale == 0.0 || !std::isfinite(scale)) throw Error("malformed header: bad scale");
  const std::size_t off = h.data_offset();
  const std::size_t n = std::size_t(w) * std::size_t(hgt);
  if (bytes.size() < off + 4 * n) throw Error("unexpected EOF");
  const bool file_little = scale < 0;
  const bool swap = file_little != (std::endian::native == std::endian::little);

  Heatmap hm(static_cast<int>(w), static_cast<int>(hgt));
  std::size_t clamped = 0;
  for (long row = 0; row < hgt; ++row) {
    // PFM stores the bottom row first.
    const std::size_t src_row = std::size_t(hgt - 1 - row);
    for (long col = 0; col < w; ++col) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + off + 4 * (src_row * w + col), 4);
      if (swap) bits = __builtin_bswap32(bits);
      float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v))
        throw Error("non-finite heatmap value at (" + std::to_string(col) + ", " +
                    std::to_string(row) + ")");
      if (v < 0.f || v > 1.f) {
        v = std::clamp(v, 0.f, 1.f);
        ++clamped;
      }
      hm.at(int(col), int(row)) = v;
    }
  }
  if (diag) diag->clamped_values += clamped;
  return hm;
}

inline Heatmap load_heatmap(const std::filesystem::path& path, LoadDiagnostics* diag = nullptr) {
  return decode_pfm(detail::read_file(path), diag);
}

inline std::string encode_pfm(const Heatmap& hm) {
  std::string out =
      "Pf\n" + std::to_string(hm.width) + " " + std::to_string(hm.height) + "\n-1.0\n";
  const std::size_t off = out.size();
  out.resize(off + 4 * hm.values.size());
  for (int row = 0; row < hm.height; ++row) {
    const std::size_t dst_row = std::size_t(hm.height - 1 - row);
    for (int col = 0; col < hm.width; ++col) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(hm.at(col, row));
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      std::memcpy(out.data() + off + 4 * (dst_row * hm.width + col), &bits, 4);
    }
  }
  return out;
}

inline void save_heatmap(const Heatmap& hm, const std::filesystem::path& path) {
  detail::write_file(path, encode_pfm(hm));
}

// ---------------------------------------------------------------------------
// GeoJSON partitions
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json ring_to_json(const Ring& r) {
  nlohmann::json coords = nlohmann::json::array();
  for (Point p : r) coords.push_back({p.x, p.y});
  if (!r.empty()) coords.push_back({r.front().x, r.front().y});
  return coords;
}

inline Ring ring_from_json(const nlohmann::json& j, std::size_t feature) {
  const std::string where = "feature " + std::to_string(feature);
  if (!j.is_array()) throw Error(where + ": ring is not an array");
  Ring r;
  r.reserve(j.size());
  for (const auto& c : j) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
      throw Error(where + ": malformed coordinate");
    const Point p{c[0].get<double>(), c[1].get<double>()};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(where + ": non-finite coordinate");
    r.push_back(p);
  }
  if (r.size() < 2 || !(r.front() == r.back())) throw Error(where + ": unclosed ring");
  r.pop_back();
  return r;
}

}  // namespace detail

inline std::string partition_to_geojson(const Partition& p) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& lp : p.polygons) {
    nlohmann::json rings = nlohmann::json::array();
    rings.push_back(detail::ring_to_json(lp.polygon.outer));
    for (const auto& h : lp.polygon.holes) rings.push_back(detail::ring_to_json(h));
    features.push_back({{"type", "Feature"},
                        {"properties", {{"class", lp.cls}}},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}}});
  }
  const nlohmann::json doc = {{"type", "FeatureCollection"},
                              {"properties", {{"width", p.width}, {"height", p.height}}},
                              {"features", features}};
  return doc.dump() + "\n";
}

inline void write_partition(const Partition& p, const std::filesystem::path& path) {
  detail::write_file(path, partition_to_geojson(p));
}

enum class LoadMode {
  strict,   // reject rings that break the Partition invariants
  lenient,  // keep them so a validator can report on them
};

inline Partition partition_from_geojson(const std::string& text, LoadDiagnostics* diag = nullptr,
                                        LoadMode mode = LoadMode::strict) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("geojson: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
    throw Error("geojson: expected a FeatureCollection");
  const auto props = doc.find("properties");
  if (props == doc.end() || !props->is_object() || !props->contains("width") ||
      !props->contains("height"))
    throw Error("geojson: missing top-level width/height properties");
  Partition out;
  out.width = (*props)["width"].get<int>();
  out.height = (*props)["height"].get<int>();
  if (out.width < 1 || out.height < 1) throw Error("geojson: bad domain size");

  const auto& features = doc.at("features");
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const auto& f = features[fi];
    const std::string where = "feature " + std::to_string(fi);
    const auto& geom = f.at("geometry");
    const std::string type = geom.value("type", "");
    if (type == "MultiPolygon") throw Error(where + ": split MultiPolygons upstream");
    if (type != "Polygon") throw Error(where + ": non-Polygon geometry '" + type + "'");
    const auto fp = f.find("properties");
    if (fp == f.end() || !fp->is_object() || !fp->contains("class") ||
        !(*fp)["class"].is_number_integer())
      throw Error(where + ": missing \"class\"");
    LabeledPolygon lp;
    lp.cls = (*fp)["class"].get<int>();
    if (lp.cls < 0 || lp.cls > 254) throw Error(where + ": class out of range");
    const auto& rings = geom.at("coordinates");
    if (!rings.is_array() || rings.empty()) throw Error(where + ": polygon without rings");
    for (std::size_t ri = 0; ri < rings.size(); ++ri) {
      Ring r = detail::ring_from_json(rings[ri], fi);
      if (mode == LoadMode::strict) {
        if (distinct_vertex_count(r) < 3)
          throw Error(where + ": ring " + std::to_string(ri) + " has fewer than 3 vertices");
        if (ring_self_intersection(r))
          throw Error(where + ": ring " + std::to_string(ri) + " is not simple");
      }
      const double a = signed_area(r);
      const bool want_ccw = ri == 0;
      if ((want_ccw && a < 0) || (!want_ccw && a > 0)) {
        std::reverse(r.begin(), r.end());
        if (diag) ++diag->reoriented_rings;
      }
      if (ri == 0)
        lp.polygon.outer = std::move(r);
      else
        lp.polygon.holes.push_back(std::move(r));
    }
    out.polygons.push_back(std::move(lp));
  }
  return out;
}

inline Partition load_partition(const std::filesystem::path& path, LoadDiagnostics* diag = nullptr,
                                LoadMode mode = LoadMode::strict) {
  return partition_from_geojson(detail::read_file(path), diag, mode);
}

}  // namespace acpv
