#include <gtest/gtest.h>

#include <filesystem>

#include "acpv/assemble.hpp"
#include "acpv/io.hpp"

using namespace acpv;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path d = fs::temp_directory_path() / (std::string("acpv_io_") + info->name());
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string pgm(int w, int h, std::initializer_list<int> px) {
  std::string s = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (int v : px) s.push_back(char(v));
  return s;
}

std::string pfm_bytes(int w, int h, const std::vector<float>& v) {
  Heatmap hm(w, h);
  hm.values = v;
  return encode_pfm(hm);
}

}  // namespace

TEST(Pgm, TwoByTwoInfersClassCount) {
  const auto d = scratch_dir();
  detail::write_file(d / "m.pgm", pgm(2, 2, {0, 1, 0, 1}));
  const LabelMask m = load_mask(d / "m.pgm");
  EXPECT_EQ(m.width, 2);
  EXPECT_EQ(m.height, 2);
  EXPECT_EQ(m.num_classes, 2);
  EXPECT_EQ(m.labels, (std::vector<std::uint8_t>{0, 1, 0, 1}));
}

TEST(Pgm, AllZeroIsOneClass) {
  const auto d = scratch_dir();
  detail::write_file(d / "z.pgm", pgm(3, 2, {0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(load_mask(d / "z.pgm").num_classes, 1);
}

TEST(Pgm, ConfiguredClassCount) {
  const auto d = scratch_dir();
  detail::write_file(d / "m.pgm", pgm(2, 1, {0, 3}));
  EXPECT_EQ(load_mask(d / "m.pgm", 5).num_classes, 5);
  EXPECT_THROW(load_mask(d / "m.pgm", 2), Error);
}

TEST(Pgm, TruncatedRaster) {
  std::string s = pgm(4, 4, {0, 1, 2});
  try {
    detail::decode_pgm(s);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unexpected EOF"), std::string::npos);
  }
}

TEST(Pgm, HeaderErrors) {
  EXPECT_THROW(detail::decode_pgm("P2\n1 1\n255\n0"), Error);
  EXPECT_THROW(detail::decode_pgm("P5\n1 1\n65535\n\0\0"), Error);
  EXPECT_THROW(detail::decode_pgm("P5\n0 1\n255\n"), Error);
  // Comments in the header are allowed.
  const LabelMask m = detail::decode_pgm(std::string("P5\n# c\n1 1\n255\n") + char(2));
  EXPECT_EQ(m.labels[0], 2);
}

TEST(Png, RoundTrip) {
  const auto d = scratch_dir();
  LabelMask m(5, 3);
  for (std::size_t i = 0; i < m.labels.size(); ++i) m.labels[i] = std::uint8_t(i % 4);
  save_mask(m, d / "m.png");
  const LabelMask back = load_mask(d / "m.png");
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.num_classes, 4);
  save_mask(m, d / "m.pgm");
  EXPECT_EQ(load_mask(d / "m.pgm").labels, m.labels);
}

TEST(Pfm, ValuesAndClamping) {
  LoadDiagnostics diag;
  const Heatmap hm = decode_pfm(pfm_bytes(2, 1, {0.5f, 1.7f}), &diag);
  EXPECT_FLOAT_EQ(hm.at(0, 0), 0.5f);
  EXPECT_FLOAT_EQ(hm.at(1, 0), 1.0f);
  EXPECT_EQ(diag.clamped_values, 1u);
}

TEST(Pfm, RowOrderRoundTrip) {
  Heatmap hm(3, 2);
  for (std::size_t i = 0; i < hm.values.size(); ++i) hm.values[i] = float(i) / 8;
  EXPECT_EQ(decode_pfm(encode_pfm(hm)), hm);
  // Bottom row is stored first.
  const std::string bytes = encode_pfm(hm);
  float first;
  std::memcpy(&first, bytes.data() + bytes.size() - 4 * 6, 4);
  EXPECT_FLOAT_EQ(first, hm.at(0, 1));
}

TEST(Pfm, BigEndianScale) {
  std::string s = "Pf\n1 1\n1.0\n";
  const float v = 0.25f;
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::little) bits = __builtin_bswap32(bits);
  s.append(reinterpret_cast<const char*>(&bits), 4);
  EXPECT_FLOAT_EQ(decode_pfm(s).at(0, 0), 0.25f);
}

TEST(Pfm, RejectsColorAndNonFinite) {
  try {
    decode_pfm("PF\n1 1\n-1.0\n000000000000");
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("expected grayscale Pf"), std::string::npos);
  }
  EXPECT_THROW(decode_pfm(pfm_bytes(1, 1, {std::numeric_limits<float>::quiet_NaN()})), Error);
  EXPECT_THROW(decode_pfm("Pf\n2 2\n-1.0\n0000"), Error);
}

TEST(GeoJson, RoundTripIsExact) {
  LabelMask m(6, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) m.at(x, y) = std::uint8_t((x > 2) + 2 * (y > 3 && x < 2));
  m.num_classes = 3;
  const Partition p = reconstruct(m);
  const Partition q = partition_from_geojson(partition_to_geojson(p));
  ASSERT_EQ(q.polygons.size(), p.polygons.size());
  EXPECT_EQ(q.width, 6);
  EXPECT_EQ(q.height, 5);
  for (std::size_t i = 0; i < p.polygons.size(); ++i) {
    EXPECT_EQ(q.polygons[i].cls, p.polygons[i].cls);
    EXPECT_EQ(q.polygons[i].polygon.outer, p.polygons[i].polygon.outer);
    EXPECT_EQ(q.polygons[i].polygon.holes, p.polygons[i].polygon.holes);
  }
  EXPECT_EQ(partition_to_geojson(q), partition_to_geojson(p));
}

TEST(GeoJson, ClockwiseOuterIsReoriented) {
  const std::string text = R"({"type":"FeatureCollection","properties":{"width":2,"height":2},
    "features":[{"type":"Feature","properties":{"class":0},
    "geometry":{"type":"Polygon","coordinates":[[[0,0],[0,2],[2,2],[2,0],[0,0]]]}}]})";
  LoadDiagnostics diag;
  const Partition p = partition_from_geojson(text, &diag);
  ASSERT_EQ(p.polygons.size(), 1u);
  EXPECT_EQ(diag.reoriented_rings, 1u);
  EXPECT_GT(signed_area(p.polygons[0].polygon.outer), 0);
}

TEST(GeoJson, Errors) {
  auto message = [](const std::string& text) {
    try {
      partition_from_geojson(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string multi = R"({"type":"FeatureCollection","properties":{"width":2,"height":2},
    "features":[{"type":"Feature","properties":{"class":0},
    "geometry":{"type":"MultiPolygon","coordinates":[]}}]})";
  EXPECT_NE(message(multi).find("split MultiPolygons upstream"), std::string::npos);
  const std::string no_class = R"({"type":"FeatureCollection","properties":{"width":2,"height":2},
    "features":[{"type":"Feature","properties":{},
    "geometry":{"type":"Polygon","coordinates":[[[0,0],[0,2],[2,2],[0,0]]]}}]})";
  EXPECT_NE(message(no_class).find("class"), std::string::npos);
  EXPECT_NE(message(R"({"type":"FeatureCollection","features":[]})").find("width"), std::string::npos);
  EXPECT_NE(message("{").find("geojson"), std::string::npos);
}

TEST(GeoJson, LenientKeepsBowtie) {
  const std::string text = R"({"type":"FeatureCollection","properties":{"width":2,"height":2},
    "features":[{"type":"Feature","properties":{"class":0},
    "geometry":{"type":"Polygon","coordinates":[[[0,0],[2,2],[2,0],[0,2],[0,0]]]}}]})";
  EXPECT_THROW(partition_from_geojson(text), Error);
  EXPECT_EQ(partition_from_geojson(text, nullptr, LoadMode::lenient).polygons.size(), 1u);
}
