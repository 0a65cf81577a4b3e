#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "acpv/assemble.hpp"
#include "acpv/pslg.hpp"
#include "acpv/validate.hpp"

using namespace acpv;

namespace {

LabelMask mask_from(std::vector<std::vector<int>> rows) {
  LabelMask m(int(rows[0].size()), int(rows.size()));
  int mx = 0;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      m.at(x, y) = std::uint8_t(rows[y][x]);
      mx = std::max(mx, rows[y][x]);
    }
  m.num_classes = mx + 1;
  return m;
}

std::vector<std::int64_t> abs_areas(const Pslg& g) {
  std::vector<std::int64_t> a;
  for (const auto& c : trace_faces(g)) a.push_back(std::abs(cycle_area2(g, c)));
  std::sort(a.begin(), a.end());
  return a;
}

std::int64_t area_sum(const Pslg& g) {
  std::int64_t s = 0;
  for (const auto& c : trace_faces(g)) s += cycle_area2(g, c);
  return s;
}

std::uint32_t find_vertex(const Pslg& g, int x, int y) {
  for (std::uint32_t v = 0; v < g.num_vertices(); ++v)
    if (g.vertex(v) == LatticePoint{x, y}) return v;
  return kNone;
}

LabelMask random_mask(std::mt19937_64& rng, int w, int h, int classes) {
  LabelMask m(w, h, 0, classes);
  std::uniform_int_distribution<int> c(0, classes - 1);
  // Blocky noise: random rectangles painted over a random background.
  for (auto& v : m.labels) v = std::uint8_t(c(rng));
  std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
  for (int k = 0; k < 6; ++k) {
    const int x0 = px(rng), y0 = py(rng), x1 = px(rng), y1 = py(rng);
    const int cls = c(rng);
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) m.at(x, y) = std::uint8_t(cls);
  }
  return m;
}

}  // namespace

TEST(Overdense, TwoColumns) {
  const Pslg g = build_overdense_pslg(mask_from({{0, 1}, {0, 1}}));
  // Frame with 8 unit edges plus the x = 1 chain.
  EXPECT_EQ(g.num_edges(), 10u);
  EXPECT_EQ(g.num_vertices(), 9u);
  EXPECT_EQ(g.degree(find_vertex(g, 1, 0)), 3u);
  EXPECT_EQ(g.degree(find_vertex(g, 1, 2)), 3u);
  EXPECT_EQ(g.degree(find_vertex(g, 1, 1)), 2u);
  // Two bounded faces of area 2 and the unbounded face.
  EXPECT_EQ(abs_areas(g), (std::vector<std::int64_t>{4, 4, 8}));
  EXPECT_EQ(area_sum(g), 0);
}

TEST(Overdense, UniformMaskIsTheFrame) {
  const Pslg g = build_overdense_pslg(LabelMask(3, 3));
  EXPECT_EQ(g.num_vertices(), 12u);
  EXPECT_EQ(g.num_edges(), 12u);
  EXPECT_EQ(trace_faces(g).size(), 2u);
  const ChainSet cs = decompose_chains(g);
  EXPECT_EQ(cs.anchors.size(), 4u);
  EXPECT_EQ(cs.chains.size(), 4u);
  for (const auto& c : cs.chains) {
    EXPECT_FALSE(c.loop);
    EXPECT_EQ(c.vertices.size(), 4u);
  }
}

TEST(Overdense, FourQuadrants) {
  const Pslg g = build_overdense_pslg(mask_from({{0, 1}, {2, 3}}));
  EXPECT_EQ(g.degree(find_vertex(g, 1, 1)), 4u);
  const auto areas = abs_areas(g);
  EXPECT_EQ(areas, (std::vector<std::int64_t>{2, 2, 2, 2, 8}));
  const ChainSet cs = decompose_chains(g);
  // Corners, the centre and the four T-junctions on the frame.
  EXPECT_EQ(cs.anchors.size(), 9u);
  EXPECT_EQ(cs.chains.size(), 12u);
}

TEST(Chains, DonutLoopIsAnchorFree) {
  LabelMask m(5, 5);
  for (int y = 1; y < 4; ++y)
    for (int x = 1; x < 4; ++x) m.at(x, y) = 1;
  m.num_classes = 2;
  const Pslg g = build_overdense_pslg(m);
  const ChainSet cs = decompose_chains(g);
  ASSERT_EQ(cs.chains.size(), 5u);
  const auto loops = std::count_if(cs.chains.begin(), cs.chains.end(), [](const Chain& c) { return c.loop; });
  EXPECT_EQ(loops, 1);
  const Chain& loop = cs.chains.back();
  EXPECT_TRUE(loop.loop);
  EXPECT_TRUE(loop.closed());
  EXPECT_EQ(loop.vertices.size(), 13u);
  // Starts at its smallest (y, x) vertex.
  EXPECT_EQ(g.vertex(loop.vertices.front()), (LatticePoint{1, 1}));
  const Pslg r = remove_collinear_vertices(g);
  EXPECT_EQ(r.num_vertices(), 8u);
  EXPECT_TRUE(euler_check(r, trace_faces(r).size()));
}

TEST(Chains, EveryEdgeInExactlyOneChain) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Pslg g = build_overdense_pslg(random_mask(rng, 12, 9, 3));
    const ChainSet cs = decompose_chains(g);
    std::size_t edges = 0;
    for (const auto& c : cs.chains) {
      edges += c.vertices.size() - 1;
      for (std::size_t i = 1; i + 1 < c.vertices.size(); ++i) EXPECT_FALSE(cs.is_anchor[c.vertices[i]]);
    }
    EXPECT_EQ(edges, g.num_edges());
  }
}

TEST(Faces, EulerOnRandomMasks) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const Pslg g = build_overdense_pslg(random_mask(rng, 10, 7, 4));
    ASSERT_TRUE(euler_check(g, trace_faces(g).size()));
    ASSERT_EQ(area_sum(g), 0);
  }
}

TEST(Faces, DanglingEdgeIsRejected) {
  std::vector<LatticePoint> v{{0, 0}, {0, 2}, {2, 2}, {2, 0}, {1, 1}};
  std::vector<Pslg::Edge> e{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}};
  const Pslg g = Pslg::from_segments(2, 2, v, e);
  try {
    trace_faces(g);
    FAIL() << "no error";
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("dangling edge at (1, 1)"), std::string::npos);
  }
  EXPECT_THROW(Pslg::from_segments(2, 2, v, {{0, 0}}), Error);
}

TEST(Reconstruct, BuildingInParcel) {
  LabelMask m(8, 8, 2, 3);
  for (int y = 2; y < 6; ++y)
    for (int x = 2; x < 6; ++x) m.at(x, y) = 1;
  for (int y = 3; y < 5; ++y)
    for (int x = 3; x < 5; ++x) m.at(x, y) = 0;
  const Partition p = reconstruct(m);
  ASSERT_EQ(p.polygons.size(), 3u);
  std::size_t holes = 0;
  for (const auto& lp : p.polygons) holes += lp.polygon.holes.size();
  EXPECT_EQ(holes, 2u);
  EXPECT_EQ(rasterize(p, 3), m);
  EXPECT_TRUE(validate_acpv(p).all_ok());
}

TEST(Reconstruct, RandomMasksRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(1, 14), cls(1, 5);
  for (int t = 0; t < 1000; ++t) {
    const int C = cls(rng);
    const LabelMask m = random_mask(rng, dim(rng), dim(rng), C);
    const Partition p = reconstruct(m);
    ASSERT_EQ(rasterize(p, C).labels, m.labels) << "mask " << t;
    if (t % 10 == 0) {
      const auto rep = validate_acpv(p);
      ASSERT_TRUE(rep.all_ok()) << "mask " << t;
      ASSERT_EQ(rep.sec, 1.0);
    }
  }
}
