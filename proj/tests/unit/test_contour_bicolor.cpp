#include <gtest/gtest.h>

#include <random>

#include "garment/bicolor.hpp"
#include "garment/contour.hpp"
#include "garment/filters.hpp"
#include "synthetic.hpp"

using namespace garment;

namespace {

GrayImage square_outline(int size, int lo, int hi) {
  GrayImage m(size, size);
  for (int i = lo; i <= hi; ++i) {
    m.at(i, lo) = m.at(i, hi) = 1.0;
    m.at(lo, i) = m.at(hi, i) = 1.0;
  }
  return m;
}

}  // namespace

TEST(OuterBoundary, FillsClosedSquare) {
  const ContourMap cm{square_outline(20, 3, 16), ContourProvenance::user_drawn};
  const GrayImage region = outer_boundary(cm);
  EXPECT_EQ(region.count_on(), 14u * 14u);
  EXPECT_TRUE(region.on(10, 10));
  EXPECT_FALSE(region.on(1, 1));
}

TEST(OuterBoundary, BridgesOnePixelGapButNotWider) {
  GrayImage m = square_outline(20, 3, 16);
  m.at(10, 3) = 0.0;
  EXPECT_NO_THROW(outer_boundary({m, ContourProvenance::user_drawn}));
  m.at(9, 3) = m.at(11, 3) = 0.0;
  try {
    outer_boundary({m, ContourProvenance::user_drawn});
    FAIL() << "open contour accepted";
  } catch (const OpenContourError& e) {
    EXPECT_EQ(e.gap_tolerance(), 1);
  }
}

TEST(OuterCurve, IsRegionBorder) {
  const GrayImage region = outer_boundary({square_outline(20, 3, 16), ContourProvenance::user_drawn});
  const GrayImage curve = outer_curve(region);
  EXPECT_EQ(curve.count_on(), 4u * 13u);
}

TEST(SimplifyContour, RemovesShortSpurAndSpeck) {
  GrayImage m = square_outline(30, 3, 26);
  for (int y = 4; y < 7; ++y) m.at(15, y) = 1.0;
  m.at(20, 20) = 1.0;
  const ContourMap out = simplify_contour({m, ContourProvenance::extracted}, 5);
  EXPECT_FALSE(out.mask.on(15, 5));
  EXPECT_FALSE(out.mask.on(20, 20));
  EXPECT_EQ(out.mask.count_on(), square_outline(30, 3, 26).count_on());
}

TEST(ExtractContour, ClosedOnSyntheticGarments) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 4; ++i) {
    const auto g = synthetic::two_tone_garment(rng, 256);
    const ContourMap cm = simplify_contour(extract_contour(g.image), 10);
    EXPECT_EQ(cm.provenance, ContourProvenance::extracted);
    const GrayImage region = outer_boundary(cm);
    std::size_t inside = 0;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) inside += g.silhouette.on(x, y) && region.on(x, y);
    EXPECT_GT(static_cast<double>(inside), 0.97 * static_cast<double>(g.silhouette.count_on())) << "garment " << i;
  }
}

TEST(ExtractContour, BlankImageHasNoContour) {
  const ContourMap cm = extract_contour(RasterImage(64, 64, {1, 1, 1}));
  EXPECT_EQ(cm.mask.count_on(), 0u);
}

TEST(ChainNormals, PointLeftOfTangent) {
  std::vector<Pixel> pts;
  for (int x = 0; x < 10; ++x) pts.push_back({x, 5});
  const auto n = chain_normals(pts);
  ASSERT_EQ(n.size(), pts.size());
  for (const Vec2& v : n) {
    EXPECT_NEAR(v.x, 0.0, 1e-12);
    EXPECT_NEAR(v.y, 1.0, 1e-12);
  }
}

TEST(LinkChains, SplitsAtJunction) {
  GrayImage m(21, 21);
  for (int i = 0; i < 21; ++i) m.at(i, 10) = 1.0;
  for (int y = 0; y < 10; ++y) m.at(10, y) = 1.0;
  const auto chains = link_chains(m);
  EXPECT_EQ(chains.size(), 3u);
  for (const auto& c : chains)
    for (const Pixel& p : c) EXPECT_FALSE(p == (Pixel{10, 10}));
}

TEST(SampleBicolor, RecoversBothColorsOfStripes) {
  const Rgb a{0.8, 0.1, 0.1};
  const Rgb b{0.1, 0.2, 0.9};
  const RasterImage img = synthetic::stripes(64, 64, 16, true, a, b);
  auto chains = detect_texture_edges(img, 0.08, 0.2);
  ASSERT_FALSE(chains.empty());
  const BiColoredEdgeSet set = sample_bicolor(img, chains, 2.0);
  std::size_t points = 0;
  for (const auto& e : set.edges)
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      const Pixel p = e.points[i];
      if (p.x < 4 || p.x > 59) continue;
      ++points;
      const bool ab = e.left[i] == a && e.right[i] == b;
      const bool ba = e.left[i] == b && e.right[i] == a;
      EXPECT_TRUE(ab || ba) << p.x << "," << p.y;
    }
  EXPECT_GT(points, 100u);
}

TEST(RemoveCorners, SplitsRightAngle) {
  std::vector<Pixel> chain;
  for (int x = 0; x <= 20; ++x) chain.push_back({x, 0});
  for (int y = 1; y <= 20; ++y) chain.push_back({20, y});
  const auto out = remove_corners({chain}, 60.0, 5);
  EXPECT_GE(out.size(), 2u);
  for (const auto& c : out)
    for (const Pixel& p : c) EXPECT_FALSE(p == (Pixel{20, 0}));
}

TEST(RemoveNear, DropsPointsWithinBand) {
  std::vector<Pixel> chain;
  for (int x = 0; x < 30; ++x) chain.push_back({x, 10});
  GrayImage mask(30, 20);
  mask.at(15, 10) = 1.0;
  const auto out = remove_near({chain}, mask, 2);
  std::size_t total = 0;
  for (const auto& c : out) {
    total += c.size();
    for (const Pixel& p : c) EXPECT_GT(std::abs(p.x - 15), 2);
  }
  EXPECT_EQ(total, 30u - 5u);
}

TEST(Rasterize, RailsOnBothSides) {
  BiColoredEdgeSet set{20, 20, {}, 0};
  BiColoredEdge e;
  for (int x = 3; x < 17; ++x) {
    e.points.push_back({x, 10});
    e.left.push_back({1, 0, 0});
    e.right.push_back({0, 0, 1});
  }
  set.edges.push_back(e);
  const BicolorRaster r = rasterize_bicolor(set);
  EXPECT_EQ(r.color.pixel(8, 11), (Rgb{1, 0, 0}));
  EXPECT_EQ(r.color.pixel(8, 9), (Rgb{0, 0, 1}));
  EXPECT_FALSE(r.coverage.on(8, 10));
}

TEST(DropUnseparated, RemovesPointsWhoseRailsShareARegion) {
  const GrayImage walls = square_outline(30, 2, 27);
  const GrayImage region = outer_boundary({walls, ContourProvenance::user_drawn});
  BiColoredEdgeSet set{30, 30, {}, 0};
  BiColoredEdge e;
  for (int x = 5; x < 25; ++x) {
    e.points.push_back({x, 15});
    e.left.push_back({1, 0, 0});
    e.right.push_back({0, 0, 1});
  }
  set.edges.push_back(e);
  EXPECT_TRUE(drop_unseparated(set, region, walls).edges.empty());

  GrayImage split = walls;
  for (int x = 2; x <= 27; ++x) split.at(x, 15) = 1.0;
  const auto kept = drop_unseparated(set, region, split);
  ASSERT_EQ(kept.edges.size(), 1u);
  EXPECT_EQ(kept.edges[0].points.size(), 20u);
}

TEST(BrushStroke, FourStringCarriesStripeInside) {
  const std::vector<Vec2> line{{10, 30}, {50, 30}};
  const Rgb stripe{0.9, 0.1, 0.1};
  const Rgb ground{1, 1, 1};
  const BiColoredEdgeSet set = brush_stroke(line, {BrushKind::four_string, {stripe, ground}, 6.0}, 64, 64);
  ASSERT_EQ(set.edges.size(), 2u);
  EXPECT_NO_THROW(validate(set));
  const BicolorRaster r = rasterize_bicolor(set);
  EXPECT_EQ(r.color.pixel(30, 28), stripe);
  EXPECT_EQ(r.color.pixel(30, 32), stripe);
  EXPECT_EQ(r.color.pixel(30, 26), ground);
  EXPECT_EQ(r.color.pixel(30, 34), ground);
}

TEST(EdgeSetJson, RoundTripIsFixpoint) {
  const std::vector<Vec2> line{{5, 5}, {40, 20}, {60, 50}};
  const BiColoredEdgeSet set = brush_stroke(line, {BrushKind::two_string, {{1, 0, 0}, {0, 1, 0}}, 6.0}, 64, 64);
  const auto j1 = to_json(set);
  const auto j2 = to_json(edge_set_from_json(j1));
  EXPECT_EQ(j1, j2);
}
