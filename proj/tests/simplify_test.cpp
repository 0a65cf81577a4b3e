#include <gtest/gtest.h>

#include <cmath>

#include "acpv/simplify.hpp"
#include "acpv/validate.hpp"

using namespace acpv;

namespace {

Heatmap gaussian_field(int w, int h, std::vector<Point> centers, double sigma) {
  Heatmap hm(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0;
      for (Point c : centers) v = std::max(v, std::exp(-((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y)) / (2 * sigma * sigma)));
      hm.at(x, y) = float(v);
    }
  return hm;
}

LabelMask columns(int w, int h, std::vector<int> cuts) {
  LabelMask m(w, h, 0, int(cuts.size()) + 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int c = 0;
      while (c < int(cuts.size()) && x >= cuts[c]) ++c;
      m.at(x, y) = std::uint8_t(c);
    }
  return m;
}

// Index of the chain running along x = col.
std::uint32_t vertical_chain(const Pslg& g, const ChainSet& cs, int col) {
  for (std::uint32_t c = 0; c < cs.chains.size(); ++c) {
    bool all = true;
    for (auto v : cs.chains[c].vertices) all &= g.vertex(v).x == col;
    if (all && col > 0 && col < g.width()) return c;
  }
  return kNone;
}

std::size_t total(const Keypoints& kp) {
  std::size_t n = 0;
  for (const auto& k : kp) n += k.size();
  return n;
}

void fill(LabelMask& m, int x0, int y0, int x1, int y1, int c) {
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.at(x, y) = std::uint8_t(c);
}

}  // namespace

TEST(Peaks, SingleGaussian) {
  const auto peaks = extract_peaks(gaussian_field(21, 21, {{10, 10}}, 1.0), 0.3f);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0].center(), (Point{10.5, 10.5}));
  EXPECT_EQ(peaks[0].site(), (Point{10, 10}));
  EXPECT_FLOAT_EQ(peaks[0].score, 1.0f);
}

TEST(Peaks, TwoSeparatedGaussians) {
  const auto peaks = extract_peaks(gaussian_field(40, 20, {{8, 10}, {28, 10}}, 1.5), 0.3f);
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_EQ(peaks[0].col, 8);
  EXPECT_EQ(peaks[1].col, 28);
}

TEST(Peaks, PlateauYieldsOnePeak) {
  Heatmap hm(8, 8);
  for (int y = 2; y < 5; ++y)
    for (int x = 2; x < 5; ++x) hm.at(x, y) = 0.8f;
  const auto peaks = extract_peaks(hm, 0.3f);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0].col, 2);
  EXPECT_EQ(peaks[0].row, 2);
}

TEST(Peaks, ThresholdAndZeros) {
  EXPECT_TRUE(extract_peaks(Heatmap(5, 5), 0.0f).empty());
  Heatmap hm(5, 5);
  hm.at(2, 2) = 0.2f;
  EXPECT_TRUE(extract_peaks(hm, 0.3f).empty());
  EXPECT_EQ(extract_peaks(hm, 0.2f).size(), 1u);
}

TEST(Projection, KeepsNearDropsFar) {
  const LabelMask m = columns(20, 20, {10});
  const Pslg g = build_overdense_pslg(m);
  const ChainSet cs = decompose_chains(g);
  const auto c = vertical_chain(g, cs, 10);
  ASSERT_NE(c, kNone);
  const auto kp = project_peaks(std::vector<Point>{{10.4, 8}}, g, cs);
  ASSERT_EQ(kp[c].size(), 1u);
  EXPECT_EQ(g.vertex(cs.chains[c].vertices[kp[c][0]]), (LatticePoint{10, 8}));
  EXPECT_EQ(total(project_peaks(std::vector<Point>{{15, 8}}, g, cs)), 0u);
  // Near an anchor: absorbed.
  EXPECT_EQ(total(project_peaks(std::vector<Point>{{10, 1}}, g, cs)), 0u);
  EXPECT_THROW(project_peaks(std::vector<Point>{}, g, cs, {0.0, 1.5}), Error);
}

TEST(Projection, EquidistantGoesToLowerChain) {
  const LabelMask m = columns(20, 20, {8, 12});
  const Pslg g = build_overdense_pslg(m);
  const ChainSet cs = decompose_chains(g);
  const auto a = vertical_chain(g, cs, 8), b = vertical_chain(g, cs, 12);
  ASSERT_NE(a, kNone);
  ASSERT_NE(b, kNone);
  const auto kp = project_peaks(std::vector<Point>{{10, 9}}, g, cs);
  EXPECT_EQ(total(kp), 1u);
  EXPECT_EQ(kp[std::min(a, b)].size(), 1u);
}

TEST(Vss, StraightBoundaryNeedsNoPeaks) {
  const LabelMask m = columns(20, 20, {10});
  const Heatmap hm(20, 20);
  const auto r = vectorize(m, &hm);
  EXPECT_EQ(r.peaks, 0u);
  EXPECT_EQ(r.simplified_vertices, 6u);
  EXPECT_EQ(vertex_count(r.partition), 8u);
  EXPECT_EQ(rasterize(r.partition, 2), m);
  EXPECT_TRUE(validate_acpv(r.partition).all_ok());
}

TEST(Vss, CornerPeakKeepsLShape) {
  LabelMask m(20, 20, 0, 2);
  fill(m, 0, 0, 10, 10, 1);
  Heatmap hm(20, 20);
  // Without a keypoint the corner is cut.
  auto r = vectorize(m, &hm);
  EXPECT_NE(rasterize(r.partition, 2), m);
  EXPECT_TRUE(validate_acpv(r.partition).all_ok());
  hm.at(10, 10) = 1.0f;
  r = vectorize(m, &hm);
  EXPECT_EQ(r.peaks, 1u);
  EXPECT_EQ(rasterize(r.partition, 2), m);
  EXPECT_EQ(r.partition.polygons[0].polygon.outer.size() + r.partition.polygons[1].polygon.outer.size(), 4u + 6u);
}

TEST(Vss, SquareLoop) {
  LabelMask m(20, 20, 0, 2);
  fill(m, 5, 5, 15, 15, 1);
  Heatmap hm(20, 20);
  auto r = vectorize(m, &hm);
  auto rep = validate_acpv(r.partition);
  EXPECT_TRUE(rep.all_ok());
  ASSERT_EQ(r.partition.polygons.size(), 2u);
  for (Point c : {Point{5, 5}, Point{15, 5}, Point{15, 15}, Point{5, 15}}) hm.at(int(c.x), int(c.y)) = 1.0f;
  r = vectorize(m, &hm);
  EXPECT_EQ(r.peaks, 4u);
  EXPECT_EQ(rasterize(r.partition, 2), m);
  EXPECT_EQ(vertex_count(r.partition), 12u);
}

TEST(Vss, RequiresMatchingHeatmap) {
  const LabelMask m = columns(8, 8, {4});
  EXPECT_THROW(vectorize(m, nullptr), Error);
  const Heatmap small(4, 4);
  EXPECT_THROW(vectorize(m, &small), Error);
}

TEST(Dp, Staircase) {
  // Diagonal staircase with unit steps.
  LabelMask m(12, 12, 0, 2);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) m.at(x, y) = x + y < 12;
  VectorizeOptions o;
  o.mode = Mode::dp;
  o.dp_epsilon = 1.0;
  const auto r = vectorize(m, nullptr, o);
  EXPECT_TRUE(validate_acpv(r.partition).all_ok());
  // Corners plus the two frame junctions: the staircase is one diagonal.
  EXPECT_EQ(r.simplified_vertices, 6u);
  o.dp_epsilon = 0.5;
  EXPECT_GT(vectorize(m, nullptr, o).simplified_vertices, 6u);
}

TEST(Dp, EpsilonSweepIsMonotone) {
  LabelMask m(40, 30, 0, 3);
  fill(m, 3, 4, 30, 20, 1);
  fill(m, 10, 8, 22, 27, 2);
  fill(m, 14, 1, 17, 9, 0);
  std::size_t prev = SIZE_MAX;
  for (double eps : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    VectorizeOptions o;
    o.mode = Mode::dp;
    o.dp_epsilon = eps;
    const auto r = vectorize(m, nullptr, o);
    EXPECT_TRUE(validate_acpv(r.partition).all_ok()) << eps;
    EXPECT_LE(r.simplified_vertices, prev) << eps;
    prev = r.simplified_vertices;
  }
}

TEST(Dp, ZeroEpsilonMatchesCollinearRemoval) {
  LabelMask m(10, 10, 0, 2);
  fill(m, 2, 3, 7, 9, 1);
  VectorizeOptions o;
  o.mode = Mode::dp;
  o.dp_epsilon = 0.0;
  VectorizeOptions none;
  none.mode = Mode::none;
  EXPECT_EQ(vectorize(m, nullptr, o).simplified_vertices, vectorize(m, nullptr, none).simplified_vertices);
  EXPECT_EQ(rasterize(vectorize(m, nullptr, o).partition, 2), m);
}

TEST(Repair, IslandCutByDiagonal) {
  // Without a corner keypoint the L boundary becomes x + y = 6, which
  // touches the island at two of its corners.
  LabelMask m(10, 10, 0, 3);
  fill(m, 0, 0, 6, 6, 1);
  fill(m, 2, 2, 4, 4, 2);
  const Heatmap hm(10, 10);
  for (Mode mode : {Mode::vss, Mode::dp}) {
    VectorizeOptions o;
    o.mode = mode;
    o.dp_epsilon = 8.0;
    const auto r = vectorize(m, &hm, o);
    EXPECT_GT(r.repair.reinserted, 0u);
    EXPECT_GT(r.repair.rounds, 0u);
    EXPECT_EQ(r.partition.polygons.size(), 3u);
    EXPECT_TRUE(validate_acpv(r.partition).all_ok());
  }
}

TEST(Vectorize, NoneModeIsExact) {
  LabelMask m(9, 7, 0, 3);
  fill(m, 1, 1, 5, 6, 1);
  fill(m, 5, 0, 9, 3, 2);
  VectorizeOptions o;
  o.mode = Mode::none;
  const auto r = vectorize(m, nullptr, o);
  EXPECT_EQ(rasterize(r.partition, 3), m);
  EXPECT_TRUE(validate_acpv(r.partition).all_ok());
}
