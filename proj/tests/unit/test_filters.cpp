#include <gtest/gtest.h>

#include <random>

#include "garment/filters.hpp"
#include "garment/raster.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace garment;

namespace {

GrayImage from_rows(const std::vector<std::string>& rows) {
  GrayImage m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m.at(x, y) = rows[y][x] == '#' ? 1.0 : 0.0;
  return m;
}

int components8(const GrayImage& m) { return static_cast<int>(connected_components(m, true).members.size()); }

int holes4(const GrayImage& m) {
  GrayImage inv(m.width() + 2, m.height() + 2, 1.0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) inv.at(x + 1, y + 1) = m.on(x, y) ? 0.0 : 1.0;
  return static_cast<int>(connected_components(inv, false).members.size()) - 1;
}

bool one_pixel_wide(const GrayImage& m) {
  for (int y = 0; y + 1 < m.height(); ++y)
    for (int x = 0; x + 1 < m.width(); ++x)
      if (m.on(x, y) && m.on(x + 1, y) && m.on(x, y + 1) && m.on(x + 1, y + 1)) return false;
  return true;
}

}  // namespace

TEST(GaussianKernel, NormalizedWithExpectedRadius) {
  const auto k = gaussian_kernel(1.4);
  EXPECT_EQ(k.size(), 2u * 5u + 1u);
  double sum = 0.0;
  for (double v : k) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(k.front(), k.back());
}

TEST(GaussianBlur, PreservesConstantImage) {
  const RasterImage img(17, 11, {0.2, 0.4, 0.9});
  const RasterImage out = gaussian_blur(img, 2.0);
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 17; ++x) EXPECT_NEAR(distance(out.pixel(x, y), img.pixel(x, y)), 0.0, 1e-12);
}

TEST(ColorSobel, UnitStepHasUnitMagnitude) {
  RasterImage img(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 4; x < 8; ++x) img.set(x, y, {1.0, 0.0, 0.0});
  const Gradient g = color_sobel(img);
  EXPECT_NEAR(g.magnitude.at(3, 4), 1.0, 1e-12);
  EXPECT_NEAR(g.magnitude.at(1, 4), 0.0, 1e-12);
}

TEST(Canny, MatchesOracleOnRandomShapes) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    const RasterImage img = synthetic::random_shapes(rng, 40, 40);
    const GrayImage lib = canny(img, {1.4, 0.08, 0.2});
    const GrayImage ref = oracle::canny(img, 1.4, 0.08, 0.2);
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 40; ++x) ASSERT_EQ(lib.on(x, y), ref.on(x, y)) << "image " << i << " at " << x << "," << y;
  }
}

TEST(Thin, FilledRectangleBecomesOnePixelWideConnectedLine) {
  GrayImage m(30, 12);
  for (int y = 3; y < 9; ++y)
    for (int x = 3; x < 27; ++x) m.at(x, y) = 1.0;
  const GrayImage t = thin(m);
  EXPECT_GT(t.count_on(), 0u);
  EXPECT_TRUE(one_pixel_wide(t));
  EXPECT_EQ(components8(t), 1);
  EXPECT_EQ(holes4(t), 0);
}

TEST(Thin, KeepsDiagonalTwoPixelLine) {
  GrayImage m(40, 40);
  for (int i = 2; i < 36; ++i) {
    m.at(i, i) = 1.0;
    m.at(i + 1, i) = 1.0;
  }
  const GrayImage t = thin(m);
  EXPECT_EQ(components8(t), 1);
  EXPECT_GE(t.count_on(), 30u);
  EXPECT_TRUE(one_pixel_wide(t));
}

TEST(Thin, PreservesRingHole) {
  const GrayImage m = from_rows({
      "............",
      ".##########.",
      ".##########.",
      ".###....###.",
      ".###....###.",
      ".##########.",
      ".##########.",
      "............",
  });
  const GrayImage t = thin(m);
  EXPECT_EQ(components8(t), 1);
  EXPECT_EQ(holes4(t), 1);
  EXPECT_TRUE(one_pixel_wide(t));
}

TEST(Thin, ThinLineIsFixpoint) {
  GrayImage m(20, 5);
  for (int x = 2; x < 18; ++x) m.at(x, 2) = 1.0;
  const GrayImage t = thin(m);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 20; ++x) EXPECT_EQ(t.on(x, y), m.on(x, y));
}

TEST(Thin, KeepMaskIsNeverRemoved) {
  GrayImage m(16, 16);
  for (int y = 4; y < 12; ++y)
    for (int x = 4; x < 12; ++x) m.at(x, y) = 1.0;
  GrayImage keep(16, 16);
  for (int x = 4; x < 12; ++x) keep.at(x, 4) = 1.0;
  const GrayImage t = thin(m, keep);
  for (int x = 4; x < 12; ++x) EXPECT_TRUE(t.on(x, 4));
}

TEST(Morphology, ClosingBridgesOnePixelGap) {
  GrayImage m(10, 3);
  for (int x = 0; x < 10; ++x)
    if (x != 5) m.at(x, 1) = 1.0;
  EXPECT_EQ(components8(m), 2);
  EXPECT_TRUE(close3x3(m).on(5, 1));
}

TEST(ConnectedComponents, FourVersusEightConnectivity) {
  const GrayImage m = from_rows({"#.", ".#"});
  EXPECT_EQ(connected_components(m, false).members.size(), 2u);
  EXPECT_EQ(connected_components(m, true).members.size(), 1u);
}

TEST(ChessboardDistance, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  GrayImage src(23, 17);
  for (int i = 0; i < 6; ++i) src.at(static_cast<int>(rng() % 23), static_cast<int>(rng() % 17)) = 1.0;
  const auto d = chessboard_distance(src);
  for (int y = 0; y < 17; ++y)
    for (int x = 0; x < 23; ++x) {
      int best = 1 << 30;
      for (int v = 0; v < 17; ++v)
        for (int u = 0; u < 23; ++u)
          if (src.on(u, v)) best = std::min(best, std::max(std::abs(u - x), std::abs(v - y)));
      EXPECT_EQ(d[static_cast<std::size_t>(y) * 23 + x], best);
    }
}

TEST(Resample, IdentityAtSameSize) {
  std::mt19937_64 rng(1);
  const RasterImage img = synthetic::random_shapes(rng, 13, 9);
  const RasterImage out = resample(img, 13, 9);
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(out.data()[i], img.data()[i], 1e-12);
}

TEST(PointwiseProduct, RejectsSizeMismatch) {
  EXPECT_THROW(pointwise_product(RasterImage(4, 4), GrayImage(3, 4)), std::invalid_argument);
}
