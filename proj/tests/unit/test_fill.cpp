#include <gtest/gtest.h>

#include <random>

#include "garment/patchmatch.hpp"
#include "garment/synthesizer.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace garment;

namespace {

GrayImage box(int size, int lo, int hi) {
  GrayImage m(size, size);
  for (int y = lo; y <= hi; ++y)
    for (int x = lo; x <= hi; ++x) m.at(x, y) = 1.0;
  return m;
}

}  // namespace

TEST(PatchSsd, ZeroOnSelfAndEarlyExit) {
  std::mt19937_64 rng(1);
  const RasterImage img = synthetic::random_shapes(rng, 20, 20);
  EXPECT_EQ(patch_ssd(img, 3, 4, img, 3, 4, 7, 1e300), 0.0);
  const RasterImage other(20, 20, {1, 1, 1});
  const RasterImage black(20, 20);
  EXPECT_GT(patch_ssd(black, 0, 0, other, 0, 0, 7, 1.0), 1.0);
}

TEST(NnfSweep, EnergyNeverIncreasesAndApproachesExhaustive) {
  std::mt19937_64 rng(3);
  const RasterImage src = synthetic::random_shapes(rng, 32, 32);
  const RasterImage tgt = synthetic::random_shapes(rng, 28, 28);
  NearestNeighborField nnf = random_nnf(tgt, src, 5, 11);
  double prev = nnf_energy(nnf);
  for (int i = 0; i < 8; ++i) {
    nnf_sweep(nnf, tgt, src, 100 + i);
    const double e = nnf_energy(nnf);
    EXPECT_LE(e, prev + 1e-9);
    prev = e;
  }
  const auto best = oracle::exhaustive_nnf(tgt, src, 5);
  std::size_t close = 0;
  for (std::size_t i = 0; i < best.size(); ++i) close += nnf.dist[i] <= best[i] * 1.05 + 1e-9;
  EXPECT_GT(static_cast<double>(close), 0.9 * static_cast<double>(best.size()));
}

TEST(Vote, IdentityFieldReproducesSource) {
  std::mt19937_64 rng(5);
  const RasterImage src = synthetic::random_shapes(rng, 16, 16);
  const NearestNeighborField nnf = identity_nnf(src, src, 5);
  const RasterImage out = vote(nnf, src, 16, 16);
  for (std::size_t i = 0; i < src.data().size(); ++i) EXPECT_NEAR(out.data()[i], src.data()[i], 1e-12);
}

TEST(ExpandTexture, DeterministicForSeedAndSized) {
  const RasterImage patch = synthetic::stripes(24, 24, 6, true, {0.9, 0.2, 0.2}, {0.9, 0.9, 0.8});
  PatchMatchConfig cfg;
  cfg.em_iterations = 2;
  cfg.scales = 2;
  const RasterImage a = expand_texture(patch, 48, 40, cfg, 17);
  const RasterImage b = expand_texture(patch, 48, 40, cfg, 17);
  EXPECT_EQ(a.width(), 48);
  EXPECT_EQ(a.height(), 40);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST(FillRegion, MatchesDirectSolve) {
  std::mt19937_64 rng(14);
  const GrayImage region = box(24, 2, 21);
  GrayImage walls(24, 24);
  for (int y = 2; y <= 14; ++y) walls.at(12, y) = 1.0;
  GrayImage constraints(24, 24);
  RasterImage colors(24, 24);
  for (int i = 0; i < 8; ++i) {
    const int x = 3 + static_cast<int>(rng() % 18);
    const int y = 3 + static_cast<int>(rng() % 18);
    if (walls.on(x, y)) continue;
    constraints.at(x, y) = 1.0;
    colors.set(x, y, synthetic::random_u8_color(rng));
  }
  constraints.at(4, 4) = 1.0;
  colors.set(4, 4, {1, 0, 0});
  constraints.at(19, 4) = 1.0;
  colors.set(19, 4, {0, 0, 1});
  SynthConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_iterations = 200000;
  const SynthResult lib = fill_region(region, walls, constraints, colors, cfg);
  const RasterImage ref = oracle::harmonic_direct(region, walls, constraints, colors);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x) {
      if (!region.on(x, y) || walls.on(x, y)) continue;
      EXPECT_NEAR(distance(lib.image.pixel(x, y), ref.pixel(x, y)), 0.0, 1e-6);
    }
}

TEST(FillRegion, SingleConstraintGivesConstant) {
  const GrayImage region = box(16, 1, 14);
  GrayImage constraints(16, 16);
  RasterImage colors(16, 16);
  constraints.at(5, 5) = 1.0;
  colors.set(5, 5, {0.2, 0.6, 0.4});
  const SynthResult r = fill_region(region, GrayImage(16, 16), constraints, colors, {});
  for (int y = 1; y <= 14; ++y)
    for (int x = 1; x <= 14; ++x) EXPECT_EQ(r.image.pixel(x, y), (Rgb{0.2, 0.6, 0.4}));
  EXPECT_TRUE(r.warnings.empty());
}

TEST(FillRegion, SealedRegionTakesNearestStroke) {
  const GrayImage region = box(20, 1, 18);
  GrayImage walls(20, 20);
  for (int y = 1; y <= 18; ++y) walls.at(10, y) = 1.0;
  GrayImage constraints(20, 20);
  RasterImage colors(20, 20);
  constraints.at(3, 10) = 1.0;
  colors.set(3, 10, {0, 1, 0});
  const SynthResult r = fill_region(region, walls, constraints, colors, {});
  EXPECT_EQ(r.image.pixel(15, 10), (Rgb{0, 1, 0}));
  EXPECT_FALSE(r.warnings.empty());
}

TEST(FillRegion, NoConstraintsUsesDefaultColor) {
  const GrayImage region = box(10, 1, 8);
  SynthConfig cfg;
  const SynthResult r = fill_region(region, GrayImage(10, 10), GrayImage(10, 10), RasterImage(10, 10), cfg);
  EXPECT_EQ(r.image.pixel(5, 5), cfg.default_color);
  EXPECT_EQ(r.image.pixel(0, 0), cfg.background);
}

TEST(FillRegion, MaximumPrincipleHolds) {
  std::mt19937_64 rng(2);
  const GrayImage region = box(20, 1, 18);
  GrayImage constraints(20, 20);
  RasterImage colors(20, 20);
  for (int i = 0; i < 6; ++i) {
    const int x = 1 + static_cast<int>(rng() % 18);
    const int y = 1 + static_cast<int>(rng() % 18);
    constraints.at(x, y) = 1.0;
    colors.set(x, y, synthetic::random_u8_color(rng));
  }
  double lo[3] = {1, 1, 1};
  double hi[3] = {0, 0, 0};
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x)
      if (constraints.on(x, y))
        for (int c = 0; c < 3; ++c) {
          lo[c] = std::min(lo[c], colors.at(x, y, c));
          hi[c] = std::max(hi[c], colors.at(x, y, c));
        }
  const SynthResult r = fill_region(region, GrayImage(20, 20), constraints, colors, {});
  for (int y = 1; y <= 18; ++y)
    for (int x = 1; x <= 18; ++x)
      for (int c = 0; c < 3; ++c) {
        EXPECT_GE(r.image.at(x, y, c), lo[c] - 1e-6);
        EXPECT_LE(r.image.at(x, y, c), hi[c] + 1e-6);
      }
}

TEST(Synthesize, OpenContourThrows) {
  GrayImage contour(20, 20);
  for (int x = 2; x < 18; ++x) contour.at(x, 10) = 1.0;
  const RepresentationStack rep(contour, RasterImage(20, 20), GrayImage(20, 20));
  EXPECT_THROW(synthesize(rep), OpenContourError);
}

TEST(Synthesize, VoronoiCopiesNearestConstraint) {
  GrayImage contour(20, 20);
  for (int i = 1; i <= 18; ++i) contour.at(i, 1) = contour.at(i, 18) = contour.at(1, i) = contour.at(18, i) = 1.0;
  RasterImage bic(20, 20);
  GrayImage cov(20, 20);
  bic.set(4, 4, {1, 0, 0});
  cov.at(4, 4) = 1.0;
  bic.set(15, 15, {0, 0, 1});
  cov.at(15, 15) = 1.0;
  SynthConfig cfg;
  cfg.mode = SynthMode::voronoi;
  const SynthResult r = synthesize(RepresentationStack(contour, bic, cov), cfg);
  EXPECT_EQ(r.image.pixel(5, 5), (Rgb{1, 0, 0}));
  EXPECT_EQ(r.image.pixel(14, 14), (Rgb{0, 0, 1}));
}
