// Acceptance gate: one [PASS]/[FAIL] line per primary criterion, tolerances and time budgets
// pinned below. Exit status is the number of failed criteria.
//
//   acceptance --cli path/to/bicolor [--work DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "garment/bicolor.hpp"
#include "garment/contour.hpp"
#include "garment/document.hpp"
#include "garment/filters.hpp"
#include "garment/image_io.hpp"
#include "garment/losses.hpp"
#include "garment/palette.hpp"
#include "garment/parallel.hpp"
#include "garment/patchmatch.hpp"
#include "garment/pipeline.hpp"
#include "garment/service.hpp"
#include "garment/shading.hpp"
#include "garment/synthesizer.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace garment;

namespace {

// ---- pinned tolerances and budgets ----
constexpr double kKlTol = 1e-9;
constexpr double kKlBudget = 1.0;
constexpr double kLossTol = 1e-9;
constexpr int kLossTrials = 100;
constexpr double kLossBudget = 5.0;
constexpr int kRoundTripGarments = 50;
constexpr double kRoundTripMae = 2.0 / 255.0;
constexpr int kRoundTripBand = 3;
constexpr double kRoundTripBudget = 60.0;
constexpr int kIntrinsicImages = 50;
constexpr double kIntrinsicTol = 1.0 / 255.0;
constexpr double kIntrinsicBudget = 30.0;
constexpr int kCannyImages = 20;
constexpr double kCannyBudget = 10.0;
constexpr double kNnfSlack = 0.05;
constexpr double kNnfShare = 0.90;
constexpr double kPatchMatchBudget = 60.0;
constexpr double kResidualTol = 1e-6;
constexpr double kMaxPrincipleTol = 1e-4;
constexpr int kConstraintSets = 100;
constexpr double kHarmonicBudget = 60.0;
constexpr int kThreadsN = 4;
constexpr int kCorpusSize = 10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

ColorCluster gaussian(const Rgb& mean, double var) {
  ColorCluster c;
  c.mean = mean;
  for (int i = 0; i < 3; ++i) c.cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = var;
  c.count = 1;
  return c;
}

ColorClusterStats stats_of(std::vector<ColorCluster> clusters) {
  ColorClusterStats s;
  s.clusters = std::move(clusters);
  return s;
}

// ---------------------------------------------------------------------------

Outcome kl_closed_form() {
  const auto same = stats_of({gaussian({0.2, 0.4, 0.6}, 0.01)});
  const double v0 = kl_color_loss(same, same);
  const double v1 = kl_color_loss(stats_of({gaussian({0, 0, 0}, 1.0)}), stats_of({gaussian({1, 0, 0}, 1.0)}));
  const double v2 = kl_color_loss(stats_of({gaussian({0, 0, 0}, 1.0)}), stats_of({gaussian({0, 0, 0}, 2.0)}));
  const double want2 = 0.5 * (3.0 * std::log(2.0) - 1.5);
  const double err = std::max({std::fabs(v0), std::fabs(v1 - 0.5), std::fabs(v2 - want2)});
  return {err <= kKlTol, "identical " + sci(v0) + ", shift " + fmt(v1, 12) + ", 2I " + fmt(v2, 12) +
                             " (want " + fmt(want2, 12) + "), max err " + sci(err)};
}

Outcome loss_oracles() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 8);
  double worst = 0.0;
  auto track = [&](double a, double b) { worst = std::max(worst, std::fabs(a - b)); };
  auto random_image = [&](int w, int h) {
    RasterImage img(w, h);
    for (double& v : img.data()) v = u(rng);
    return img;
  };
  for (int t = 0; t < kLossTrials; ++t) {
    const int w = dim(rng);
    const int h = dim(rng);
    const int scales = 1 + t % 3;
    DiscriminatorResponses resp;
    std::vector<std::vector<double>> real, fake;
    for (int s = 0; s < scales; ++s) {
      ScaleResponse r;
      for (int i = 0; i < dim(rng) * dim(rng); ++i) r.real.push_back(u(rng));
      for (int i = 0; i < dim(rng) * dim(rng); ++i) r.fake.push_back(u(rng));
      real.push_back(r.real);
      fake.push_back(r.fake);
      resp.push_back(r);
    }
    track(lsgan_d_loss(resp), oracle::lsgan_d(real, fake));
    track(lsgan_g_loss(fake), oracle::lsgan_g(fake));

    const RasterImage y = random_image(w, h);
    const RasterImage y_hat = random_image(w, h);
    track(l1_loss(y, y_hat), oracle::l1(y, y_hat));

    FeatureStack stack;
    std::vector<std::vector<double>> fr, fc;
    for (int l = 0; l < 1 + t % 4; ++l) {
      FeatureLayer layer;
      const int m = dim(rng) * dim(rng);
      for (int i = 0; i < m; ++i) {
        layer.reference.push_back(u(rng) * 4 - 2);
        layer.candidate.push_back(u(rng) * 4 - 2);
      }
      fr.push_back(layer.reference);
      fc.push_back(layer.candidate);
      stack.push_back(layer);
    }
    track(perceptual_loss(stack), oracle::perceptual(fr, fc));

    std::vector<ColorCluster> cy, ch;
    std::vector<oracle::Gaussian3> oy, oh;
    for (int k = 0; k < 1 + t % 4; ++k) {
      for (int side = 0; side < 2; ++side) {
        double a[3][3];
        for (auto& row : a)
          for (double& v : row) v = u(rng) - 0.5;
        ColorCluster c;
        oracle::Gaussian3 g{};
        for (int i = 0; i < 3; ++i) {
          c.mean[i] = u(rng);
          g.mean[i] = c.mean[i];
          for (int j = 0; j < 3; ++j) {
            double s = i == j ? 0.05 : 0.0;
            for (int l = 0; l < 3; ++l) s += a[i][l] * a[j][l];
            c.cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
            g.cov[i][j] = s;
          }
        }
        (side == 0 ? cy : ch).push_back(c);
        (side == 0 ? oy : oh).push_back(g);
      }
    }
    track(kl_color_loss(stats_of(cy), stats_of(ch)), oracle::kl(oy, oh));

    const RasterImage refl = random_image(w, h);
    GrayImage shade(w, h);
    for (double& v : shade.data()) v = u(rng);
    track(shading_rec_loss(y, refl, shade), oracle::rec(y, refl, shade));
    track(shading_dense_loss(shade), oracle::dense(shade));

    const GeneratorLossParts parts{u(rng), u(rng), u(rng), u(rng)};
    const LossWeights wts{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    track(total_generator_loss(parts, wts),
          wts.adv * parts.adv + wts.l1 * parts.l1 + wts.perceptual * parts.perceptual + wts.kl * parts.kl);
    track(total_shading_loss(parts.adv, parts.l1, wts), wts.rec * parts.adv + wts.dense * parts.l1);
  }
  const double g = total_generator_loss({1, 1, 1, 1}, LossWeights{});
  const double s = total_shading_loss(0.01, 0.1, LossWeights{});
  const bool pass = worst <= kLossTol && std::fabs(g - 21.01) <= kLossTol && std::fabs(s - 1.1) <= kLossTol;
  return {pass, std::to_string(kLossTrials) + " trials, max |lib - oracle| " + sci(worst) + "; generator total " +
                    fmt(g, 10) + ", shading total " + fmt(s, 10)};
}

/// Pixels within `band` (Chebyshev) of a color discontinuity of the source.
GrayImage edge_band(const RasterImage& img, int band) {
  GrayImage edges(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (const Pixel& d : kNeighbors8) {
        const int nx = x + d.x;
        const int ny = y + d.y;
        if (img.contains(nx, ny) && !(img.pixel(nx, ny) == img.pixel(x, y))) {
          edges.at(x, y) = 1.0;
          break;
        }
      }
  const std::vector<int> dist = chessboard_distance(edges);
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out.at(x, y) = dist[static_cast<std::size_t>(y) * img.width() + x] <= band ? 1.0 : 0.0;
  return out;
}

Outcome representation_round_trip() {
  std::mt19937_64 rng(2024);
  const PipelineConfig cfg;
  double worst = 0.0;
  std::size_t bad_pixels = 0;
  int bad_garments = 0;
  for (int i = 0; i < kRoundTripGarments; ++i) {
    const synthetic::Garment g = synthetic::two_tone_garment(rng);
    const Representation rep = extract_representation(g.image, cfg);
    const BicolorRaster raster = rasterize_bicolor(rep.edges);
    SynthResult out = synthesize(RepresentationStack(rep.contour.mask, raster.color, raster.coverage), cfg.synth);
    const GrayImage band = edge_band(g.image, kRoundTripBand);
    std::size_t bad = 0;
    for (int y = 0; y < g.image.height(); ++y)
      for (int x = 0; x < g.image.width(); ++x) {
        if (band.on(x, y)) continue;
        double mae = 0.0;
        for (int c = 0; c < 3; ++c) mae += std::fabs(to_u8(out.image.at(x, y, c)) / 255.0 - g.image.at(x, y, c));
        mae /= 3.0;
        worst = std::max(worst, mae);
        if (mae > kRoundTripMae + 1e-12) ++bad;
      }
    bad_pixels += bad;
    if (bad > 0) ++bad_garments;
  }
  return {bad_pixels == 0, std::to_string(kRoundTripGarments) + " garments, worst per-pixel MAE " +
                               fmt(worst * 255.0) + "/255, " + std::to_string(bad_pixels) + " pixels over " +
                               fmt(kRoundTripMae * 255.0) + "/255 in " + std::to_string(bad_garments) + " garments"};
}

Outcome intrinsic_round_trip() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int i = 0; i < kIntrinsicImages; ++i) {
    const auto s = synthetic::cluster_colored(rng, 96, 96);
    const GrayImage mask = synthetic::full_mask(96, 96);
    const ColorClusterStats stats = hierarchical_clusters(s.image, mask);
    const IntrinsicPair pair = decompose(s.image, mask, stats);
    for (int y = 0; y < 96; ++y)
      for (int x = 0; x < 96; ++x)
        for (int c = 0; c < 3; ++c) {
          const double r = pair.reflectance.at(x, y, c);
          if (r <= kReflectanceFloor) continue;
          worst = std::max(worst, std::fabs(r * pair.shading.at(x, y) - s.image.at(x, y, c)));
          ++checked;
        }
  }
  return {worst <= kIntrinsicTol + 1e-12, std::to_string(kIntrinsicImages) + " images, " + std::to_string(checked) +
                                              " channel samples, max |R*S - I| " + fmt(worst * 255.0) + "/255"};
}

Outcome canny_equivalence() {
  std::mt19937_64 rng(5);
  int mismatched_images = 0;
  std::size_t diff_pixels = 0;
  std::size_t edge_pixels = 0;
  const CannyParams p;
  for (int i = 0; i < kCannyImages; ++i) {
    const RasterImage img = synthetic::random_shapes(rng, 32, 32);
    const GrayImage a = canny(img, p);
    const GrayImage b = oracle::canny(img, p.sigma, p.low, p.high);
    std::size_t d = 0;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        d += a.on(x, y) != b.on(x, y) ? 1 : 0;
        edge_pixels += b.on(x, y) ? 1 : 0;
      }
    diff_pixels += d;
    if (d > 0) ++mismatched_images;
  }
  return {mismatched_images == 0, std::to_string(kCannyImages) + " images 32x32, " + std::to_string(edge_pixels) +
                                      " reference edge pixels, " + std::to_string(diff_pixels) + " differing"};
}

Outcome patchmatch_criteria() {
  std::mt19937_64 rng(9);
  const PatchMatchConfig cfg;
  int increases = 0;
  int sweeps = 0;
  double worst_share = 1.0;
  for (int i = 0; i < 8; ++i) {
    RasterImage src(16, 16);
    switch (i % 4) {
      case 0: src = synthetic::random_shapes(rng, 16, 16); break;
      case 1: src = synthetic::stripes(16, 16, 6, i % 8 < 4, synthetic::random_u8_color(rng), synthetic::random_u8_color(rng)); break;
      case 2:
        for (double& v : src.data()) v = std::uniform_int_distribution<int>(0, 255)(rng) / 255.0;
        break;
      default: {
        const Rgb a = synthetic::random_u8_color(rng);
        const Rgb b = synthetic::random_u8_color(rng);
        for (int y = 0; y < 16; ++y)
          for (int x = 0; x < 16; ++x) src.set(x, y, ((x / 4 + y / 4) % 2) ? a : b);
      }
    }
    ExpandTrace trace;
    const RasterImage out = expand_texture(src, 40, 40, cfg, 100 + i, trace);
    for (const auto& energies : trace.sweep_energies)
      for (std::size_t k = 1; k < energies.size(); ++k) {
        ++sweeps;
        if (energies[k] > energies[k - 1]) ++increases;
      }
    const std::vector<double> best = oracle::exhaustive_nnf(out, src, cfg.patch_size);
    std::size_t ok = 0;
    for (std::size_t q = 0; q < best.size(); ++q)
      if (trace.final_nnf.dist[q] <= best[q] * (1.0 + kNnfSlack) + 1e-9) ++ok;
    worst_share = std::min(worst_share, static_cast<double>(ok) / static_cast<double>(best.size()));
  }

  // Vertical stripes 2 px wide, period 4, expanded 4x.
  const RasterImage stripe = synthetic::stripes(16, 16, 4, false, {0.9, 0.9, 0.9}, {0.1, 0.2, 0.5});
  const RasterImage big = expand_texture(stripe, 64, 64, cfg, 1);
  double mean = 0.0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) mean += big.at(x, y, 2);
  mean /= 64.0 * 64.0;
  int peak = 0;
  double peak_value = -1e300;
  for (int lag = 1; lag <= 7; ++lag) {
    double acc = 0.0;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x + lag < 64; ++x) acc += (big.at(x, y, 2) - mean) * (big.at(x + lag, y, 2) - mean);
    acc /= 64.0 * (64 - lag);
    if (acc > peak_value) {
      peak_value = acc;
      peak = lag;
    }
  }
  const bool pass = increases == 0 && worst_share >= kNnfShare && peak == 4;
  return {pass, std::to_string(sweeps) + " sweeps, " + std::to_string(increases) +
                    " energy increases; worst share within 5% of exhaustive " + fmt(worst_share * 100.0) +
                    "%; stripe autocorrelation peak at lag " + std::to_string(peak) + " (source period 4)"};
}

/// Largest |sum over open 4-neighbors of (u - u_n)| at non-constraint open pixels.
double laplace_residual(const RasterImage& u, const GrayImage& region, const GrayImage& walls, const GrayImage& fixed) {
  auto open = [&](int x, int y) { return region.contains(x, y) && region.on(x, y) && !walls.on(x, y); };
  double worst = 0.0;
  for (int y = 0; y < u.height(); ++y)
    for (int x = 0; x < u.width(); ++x) {
      if (!open(x, y) || fixed.on(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        double r = 0.0;
        for (const Pixel& d : kNeighbors4)
          if (open(x + d.x, y + d.y)) r += u.at(x, y, c) - u.at(x + d.x, y + d.y, c);
        worst = std::max(worst, std::fabs(r));
      }
    }
  return worst;
}

struct ConstraintSet {
  GrayImage region{1, 1};
  GrayImage walls{1, 1};
  GrayImage mask{1, 1};
  RasterImage colors{1, 1};
};

ConstraintSet random_constraints(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> coord(0, n - 1);
  ConstraintSet s{GrayImage(n, n), GrayImage(n, n), GrayImage(n, n), RasterImage(n, n)};
  const double r = n * 0.45;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (std::hypot(x - n / 2.0 + 0.5, y - n / 2.0 + 0.5) < r) s.region.at(x, y) = 1.0;
  const int walls = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int w = 0; w < walls; ++w) {
    const bool vertical = coord(rng) % 2 == 0;
    const int at = n / 4 + coord(rng) / 2;
    for (int t = 0; t < n; ++t) s.walls.at(vertical ? at : t, vertical ? t : at) = 1.0;
  }
  const int count = std::uniform_int_distribution<int>(2, 12)(rng);
  auto place = [&](int x, int y) {
    s.mask.at(x, y) = 1.0;
    s.colors.set(x, y, synthetic::random_u8_color(rng, 0.0, 1.0));
  };
  for (int i = 0; i < count; ++i) {
    const int x = coord(rng);
    const int y = coord(rng);
    if (s.region.on(x, y) && !s.walls.on(x, y)) place(x, y);
  }
  // Every sealed part gets at least one constraint.
  GrayImage open(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) open.at(x, y) = s.region.on(x, y) && !s.walls.on(x, y) ? 1.0 : 0.0;
  const Components comps = connected_components(open, false);
  for (const auto& members : comps.members) {
    bool has = false;
    for (const Pixel& p : members) has = has || s.mask.on(p.x, p.y);
    if (!has) {
      const Pixel p = members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng)];
      place(p.x, p.y);
    }
  }
  return s;
}

Outcome harmonic_criteria() {
  std::mt19937_64 rng(31);
  SynthConfig cfg;
  double worst_residual = 0.0;
  double worst_reported = 0.0;
  double worst_violation = 0.0;
  double worst_direct = 0.0;
  for (int t = 0; t < kConstraintSets; ++t) {
    const int n = t % 2 == 0 ? 32 : 64;
    const ConstraintSet s = random_constraints(rng, n);
    const SynthResult res = fill_region(s.region, s.walls, s.mask, s.colors, cfg);
    worst_reported = std::max(worst_reported, res.max_residual);
    worst_residual = std::max(worst_residual, laplace_residual(res.image, s.region, s.walls, s.mask));
    GrayImage open(n, n);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) open.at(x, y) = s.region.on(x, y) && !s.walls.on(x, y) ? 1.0 : 0.0;
    const Components comps = connected_components(open, false);
    for (const auto& members : comps.members) {
      Rgb lo{1e9, 1e9, 1e9};
      Rgb hi{-1e9, -1e9, -1e9};
      for (const Pixel& p : members)
        if (s.mask.on(p.x, p.y))
          for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], s.colors.at(p.x, p.y, c));
            hi[c] = std::max(hi[c], s.colors.at(p.x, p.y, c));
          }
      for (const Pixel& p : members)
        for (int c = 0; c < 3; ++c) {
          const double v = res.image.at(p.x, p.y, c);
          worst_violation = std::max({worst_violation, lo[c] - v, v - hi[c]});
        }
    }
    if (n == 32) {
      const RasterImage direct = oracle::harmonic_direct(s.region, s.walls, s.mask, s.colors);
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
          if (open.on(x, y))
            for (int c = 0; c < 3; ++c)
              worst_direct = std::max(worst_direct, std::fabs(direct.at(x, y, c) - res.image.at(x, y, c)));
    }
  }

  // One constraint in a closed region: the fill is that color exactly.
  const int n = 128;
  GrayImage region(n, n);
  for (int y = 8; y < n - 8; ++y)
    for (int x = 8; x < n - 8; ++x) region.at(x, y) = 1.0;
  GrayImage mask(n, n);
  RasterImage colors(n, n);
  const Rgb red{0.8, 0.1, 0.15};
  mask.at(40, 70) = 1.0;
  colors.set(40, 70, red);
  const SynthResult single = fill_region(region, GrayImage(n, n), mask, colors, cfg);
  bool constant = true;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (region.on(x, y) && !(single.image.pixel(x, y) == red)) constant = false;

  const bool pass = worst_residual <= kResidualTol && worst_reported <= kResidualTol &&
                    worst_violation <= kMaxPrincipleTol && worst_direct <= kMaxPrincipleTol && constant;
  return {pass, "max residual " + sci(worst_residual) + " (solver " + sci(worst_reported) + "), max principle violation " +
                    sci(std::max(0.0, worst_violation)) + " over " + std::to_string(kConstraintSets) +
                    " sets, vs direct solve " + sci(worst_direct) + ", single constraint " +
                    (constant ? "exactly constant" : "NOT constant")};
}

// ---- determinism through the CLI and the service ----

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

json stroke_doc() {
  return json::parse(R"({
    "canvas": {"w": 160, "h": 160}, "mode": "sparse", "seed": 4,
    "contour_layer": {"strokes": [[[12, 12], [147, 12], [147, 147], [12, 147], [12, 12]], [[80, 12], [80, 60]]]},
    "texture_layer": {"strokes": [
      {"points": [[20, 50], [140, 70]], "brush": "2-string", "colors": [[200, 30, 30], [30, 30, 200]]},
      {"points": [[20, 110], [70, 100], [140, 120]], "brush": "4-string", "colors": [[250, 250, 250], [20, 110, 40]], "spacing": 6}]},
    "shading_layer": {"strokes": [[[60, 20], [60, 140]]]},
    "color_points": [{"x": 100, "y": 30, "color": [240, 200, 30], "size": 3}]
  })");
}

json dense_doc(const RasterImage& patch) {
  json d = json::parse(R"({
    "canvas": {"w": 120, "h": 120}, "mode": "dense", "seed": 9,
    "contour_layer": {"strokes": [[[10, 10], [109, 10], [109, 109], [10, 109], [10, 10]]]},
    "texture_layer": {"edges": []}
  })");
  d["dense_patch"] = {{"png", base64_encode(encode_png(patch))}};
  return d;
}

std::map<std::string, Bytes> snapshot(const fs::path& dir) {
  std::map<std::string, Bytes> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

Outcome determinism(const fs::path& cli, const fs::path& work) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found: " + cli.string()};
  const fs::path in = work / "inputs";
  fs::create_directories(in / "photos");
  std::mt19937_64 rng(404);
  const synthetic::Garment g = synthetic::two_tone_garment(rng);
  write_file(in / "garment.png", encode_png(g.image));
  write_file(in / "mask.png", encode_png_mask(g.silhouette));
  const RasterImage patch = synthetic::stripes(24, 24, 8, true, {0.85, 0.2, 0.2}, {0.95, 0.9, 0.8});
  write_file(in / "patch.png", encode_png(patch));
  write_text(in / "doc.json", stroke_doc().dump());
  write_text(in / "dense.json", dense_doc(patch).dump());
  const DesignDocument doc = parse_document(stroke_doc());
  write_file(in / "contour.png", encode_png_mask(doc.contour.mask));
  write_file(in / "shading_edges.png", encode_png_mask(doc.shading));
  write_file(in / "small.png", encode_png(resample(g.image, doc.contour.mask.width(), doc.contour.mask.height())));
  for (int i = 0; i < 3; ++i) {
    write_file(in / "photos" / ("g" + std::to_string(i) + ".png"), encode_png(synthetic::two_tone_garment(rng).image));
  }
  const std::string red = "#c81e1e";

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"extract", "extract " + quote(in / "garment.png") + " -o OUT/extract.json"},
      {"synth", "synth --doc " + quote(in / "doc.json") + " -o OUT/synth.png --shading-out OUT/shading.png"},
      {"synth voronoi", "synth --doc " + quote(in / "doc.json") + " --mode voronoi -o OUT/voronoi.png"},
      {"synth dense", "synth --doc " + quote(in / "dense.json") + " -o OUT/dense.png"},
      {"shade", "shade --contour " + quote(in / "contour.png") + " --edges " + quote(in / "shading_edges.png") +
                    " -o OUT/shade.png --image " + quote(in / "small.png") + " --enhanced OUT/enhanced.png"},
      {"expand", "--seed 7 expand --patch " + quote(in / "patch.png") + " --size 96x80 -o OUT/expand.png --edges OUT/expand.json"},
      {"recolor doc", "recolor --doc " + quote(in / "doc.json") + " --map '" + red + "=#00ff00' -o OUT/recolor.json"},
      {"recolor image", "--seed 3 recolor --image " + quote(in / "garment.png") + " --k 2 --map '0=#00ff00' -o OUT/recolor.png"},
      {"metrics kl", "metrics kl --ref " + quote(in / "garment.png") + " --cand " + quote(in / "garment.png") +
                         " --mask " + quote(in / "mask.png") + " --k 2 > OUT/kl.json"},
      {"dataset build", "dataset build --in " + quote(in / "photos") + " --out OUT/corpus > OUT/dataset.json"},
  };
  std::vector<std::string> failures;
  std::size_t compared = 0;
  for (const auto& [name, args] : commands) {
    std::map<std::string, Bytes> runs[2];
    for (int r = 0; r < 2; ++r) {
      const int threads = r == 0 ? 1 : kThreadsN;
      const fs::path out = work / (name + "_t" + std::to_string(threads));
      fs::remove_all(out);
      fs::create_directories(out);
      std::string cmd = args;
      for (std::size_t pos; (pos = cmd.find("OUT")) != std::string::npos;) cmd.replace(pos, 3, quote(out));
      cmd = quote(cli) + " --threads " + std::to_string(threads) + " " + cmd;
      if (std::system(cmd.c_str()) != 0) failures.push_back(name + " exited non-zero");
      runs[r] = snapshot(out);
    }
    if (runs[0].empty() || runs[0] != runs[1]) {
      failures.push_back(name + " differs");
    } else {
      compared += runs[0].size();
    }
  }

  // Service: concurrent identical requests at 1 and N threads.
  const Service service;
  const std::string body = stroke_doc().dump();
  std::vector<std::string> bodies;
  for (int threads : {1, kThreadsN}) {
    set_thread_count(threads);
    std::string a, b;
    std::thread t1([&] { a = service.handle("POST", "/v1/synthesize", body).body.dump(); });
    std::thread t2([&] { b = service.handle("POST", "/v1/synthesize", body).body.dump(); });
    t1.join();
    t2.join();
    bodies.push_back(a);
    bodies.push_back(b);
  }
  set_thread_count(1);
  for (const auto& b : bodies)
    if (b != bodies.front()) {
      failures.push_back("service /v1/synthesize bodies differ");
      break;
    }

  std::string detail = std::to_string(commands.size()) + " CLI operations (" + std::to_string(compared) +
                       " output files) at 1 vs " + std::to_string(kThreadsN) + " threads, 4 concurrent service calls";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

Outcome dataset_pipeline(const fs::path& work) {
  const fs::path in = work / "corpus_in";
  fs::remove_all(in);
  fs::create_directories(in);
  std::mt19937_64 rng(1234);
  for (int i = 0; i < kCorpusSize; ++i) {
    RasterImage img(1, 1);
    if (i == 0) {
      img = RasterImage(512, 512, {1, 1, 1});
      for (int y = 100; y < 420; ++y)
        for (int x = 120; x < 390; ++x) img.set(x, y, {0.2, 0.45, 0.7});
    } else {
      img = synthetic::two_tone_garment(rng).image;
    }
    char name[32];
    std::snprintf(name, sizeof name, "garment_%02d.png", i);
    write_file(in / name, encode_png(img));
  }
  PipelineConfig cfg;
  cfg.ablation = true;
  const fs::path out_a = work / "corpus_a";
  const fs::path out_b = work / "corpus_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  const CorpusReport first = build_corpus(in, out_a, cfg);
  const auto snap_first = snapshot(out_a);
  const CorpusReport rerun = build_corpus(in, out_a, cfg);
  const auto snap_rerun = snapshot(out_a);
  build_corpus(in, out_b, cfg);
  const auto snap_fresh = snapshot(out_b);

  std::vector<std::string> problems;
  const json& m = first.manifest;
  if (m["samples"].size() != static_cast<std::size_t>(kCorpusSize)) problems.push_back("manifest sample count");
  const int val = m["counts"]["val"].get<int>();
  const int want_val = static_cast<int>(std::lround(kCorpusSize * cfg.val_fraction));
  if (val != want_val || m["counts"]["train"].get<int>() != kCorpusSize - val) problems.push_back("split counts");
  if (first.failed != 0) problems.push_back(std::to_string(first.failed) + " failures");
  for (const auto& s : m["samples"]) {
    const fs::path dir = out_a / s["id"].get<std::string>();
    for (const char* f : {"source.png", "contour.png", "bicolor.json", "bicolor.png", "meta.json"})
      if (!fs::exists(dir / f)) problems.push_back(s["id"].get<std::string>() + " lacks " + f);
    const bool shading = s["has_shading"].get<bool>();
    if (fs::exists(dir / "shading.u16.png") != shading || fs::exists(dir / "shading_edges.png") != shading) {
      problems.push_back(s["id"].get<std::string>() + " shading files disagree with manifest");
    }
    try {
      const GrayImage contour = load_mask(dir / "contour.png");
      const auto bytes = read_file(dir / "bicolor.json");
      const BiColoredEdgeSet edges = edge_set_from_json(json::parse(bytes.begin(), bytes.end()));
      validate(edges);
      if (contour.width() != kCanonicalSize || edges.width != kCanonicalSize) problems.push_back("canvas size");
      if (shading) {
        const GrayImage sh = decode_shading(read_file(dir / "shading.u16.png"));
        for (double v : sh.data())
          if (!(v >= 0.0) || !std::isfinite(v)) {
            problems.push_back(s["id"].get<std::string>() + " negative shading");
            break;
          }
      }
    } catch (const std::exception& e) {
      problems.push_back(s["id"].get<std::string>() + ": " + e.what());
    }
  }
  if (rerun.skipped_unchanged != kCorpusSize) problems.push_back("rerun rebuilt unchanged samples");
  if (snap_rerun != snap_first) problems.push_back("rerun changed bytes");
  if (snap_fresh != snap_first) problems.push_back("fresh build differs");

  std::string detail = std::to_string(kCorpusSize) + " garments, " + std::to_string(snap_first.size()) + " files, " +
                       std::to_string(m["counts"]["with_shading"].get<int>()) + " with shading, train/val " +
                       std::to_string(m["counts"]["train"].get<int>()) + "/" + std::to_string(val) + ", rerun skipped " +
                       std::to_string(rerun.skipped_unchanged);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path cli;
  fs::path work = fs::temp_directory_path() / ("garment_acceptance_" + std::to_string(::getpid()));
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") cli = argv[i + 1];
    if (flag == "--work") work = argv[i + 1];
  }
  fs::create_directories(work);
  set_thread_count(1);

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"color KL closed form", kKlBudget, kl_closed_form},
      {"loss oracle equivalence", kLossBudget, loss_oracles},
      {"representation round trip", kRoundTripBudget, representation_round_trip},
      {"intrinsic round trip", kIntrinsicBudget, intrinsic_round_trip},
      {"canny equivalence", kCannyBudget, canny_equivalence},
      {"patchmatch", kPatchMatchBudget, patchmatch_criteria},
      {"harmonic synthesizer", kHarmonicBudget, harmonic_criteria},
      {"determinism", 0.0, [&] { return determinism(cli, work); }},
      {"dataset pipeline", 0.0, [&] { return dataset_pipeline(work); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = c.budget_s <= 0.0 || secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << o.detail << " [" << fmt(secs) << " s";
    if (c.budget_s > 0.0) std::cout << " / budget " << fmt(c.budget_s) << " s" << (in_budget ? "" : " EXCEEDED");
    std::cout << "]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  fs::remove_all(work);
  return failed;
}
