#include "garment/shading.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace garment {

namespace {

double brightness(const Rgb& c) { return c.r + c.g + c.b; }

/// Shading that maps reflectance r onto color i: channel mean of i/r over channels above the floor.
double ratio_shading(const Rgb& i, const Rgb& r) {
  double sum = 0.0;
  int used = 0;
  for (int c = 0; c < 3; ++c) {
    if (r[c] < kReflectanceFloor) continue;
    sum += i[c] / r[c];
    ++used;
  }
  if (used == 0)
    for (int c = 0; c < 3; ++c) sum += i[c] / kReflectanceFloor;
  return std::max(0.0, sum / (used == 0 ? 3 : used));
}

/// Largest per-channel gap between i and r scaled by ratio_shading(i, r).
double reconstruction_error(const Rgb& i, const Rgb& r) {
  const double s = ratio_shading(i, r);
  double worst = 0.0;
  for (int c = 0; c < 3; ++c) worst = std::max(worst, std::fabs(std::max(r[c], kReflectanceFloor) * s - i[c]));
  return worst;
}

/// Material id per cluster. Clusters are visited by decreasing size; each joins the first
/// material whose representative, rescaled, reproduces its mean within merge_tol.
std::vector<std::size_t> materials(const ColorClusterStats& stats, const DecomposeConfig& cfg) {
  const std::size_t k = stats.clusters.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return stats.clusters[a].count > stats.clusters[b].count; });
  std::vector<std::size_t> out(k);
  std::vector<std::size_t> heads;
  for (std::size_t i : order) {
    out[i] = i;
    const Rgb& m = stats.clusters[i].mean;
    if (brightness(m) >= cfg.dark_sum) {
      for (std::size_t h : heads)
        if (reconstruction_error(m, stats.clusters[h].mean) <= cfg.merge_tol) {
          out[i] = h;
          break;
        }
    }
    if (out[i] == i) heads.push_back(i);
  }
  return out;
}

/// Representative cluster of each material: most pixels, ties to the brighter mean.
std::vector<std::size_t> representatives(const ColorClusterStats& stats, const std::vector<std::size_t>& material) {
  std::vector<std::size_t> rep(stats.clusters.size(), stats.clusters.size());
  for (std::size_t i = 0; i < stats.clusters.size(); ++i) {
    std::size_t& r = rep[material[i]];
    if (r == stats.clusters.size()) {
      r = i;
      continue;
    }
    const auto& ci = stats.clusters[i];
    const auto& cr = stats.clusters[r];
    if (ci.count > cr.count || (ci.count == cr.count && brightness(ci.mean) > brightness(cr.mean))) r = i;
  }
  return rep;
}

void require_stats(const RasterImage& img, const GrayImage& mask, const ColorClusterStats& stats) {
  if (!img.same_size(mask)) throw std::invalid_argument("decompose: mask size differs from image");
  if (mask.count_on() == 0) throw std::invalid_argument("decompose: empty garment mask");
  if (!img.same_size(stats.label_map) || stats.clusters.empty()) {
    throw std::invalid_argument("decompose: cluster stats do not cover the image");
  }
}

}  // namespace

IntrinsicPair decompose(const RasterImage& img, const GrayImage& garment_mask, const ColorClusterStats& clusters,
                        const DecomposeConfig& cfg) {
  require_stats(img, garment_mask, clusters);
  const auto material = materials(clusters, cfg);
  const auto rep = representatives(clusters, material);
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < clusters.clusters.size(); ++i)
    if (rep[i] < clusters.clusters.size()) reps.push_back(rep[i]);

  IntrinsicPair out{img, GrayImage(img.width(), img.height(), 1.0), 0};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (!garment_mask.on(x, y)) continue;
      const Rgb i = img.pixel(x, y);
      const int l = clusters.label(x, y);
      std::size_t r = l >= 0 ? rep[material[static_cast<std::size_t>(l)]] : reps.front();
      // Nearest-mean labels can cross materials in shadowed areas; such a pixel takes
      // whichever material (or its own cluster) explains it best.
      if (brightness(i) >= cfg.dark_sum && reconstruction_error(i, clusters.clusters[r].mean) > cfg.merge_tol) {
        double best = reconstruction_error(i, clusters.clusters[r].mean);
        std::vector<std::size_t> candidates = reps;
        if (l >= 0) candidates.push_back(static_cast<std::size_t>(l));
        for (std::size_t cand : candidates) {
          const double e = reconstruction_error(i, clusters.clusters[cand].mean);
          if (e < best) {
            best = e;
            r = cand;
          }
        }
      }
      Rgb refl = clusters.clusters[r].mean;
      for (int c = 0; c < 3; ++c) {
        if (refl[c] < kReflectanceFloor) {
          refl[c] = kReflectanceFloor;
          ++out.clamped_channels;
        }
      }
      out.reflectance.set(x, y, refl);
      out.shading.at(x, y) = ratio_shading(i, clusters.clusters[r].mean);
    }
  return out;
}

GrayImage largest_material_region(const GrayImage& garment_mask, const ColorClusterStats& clusters,
                                  const DecomposeConfig& cfg) {
  if (!garment_mask.same_size(clusters.label_map)) throw std::invalid_argument("region: size mismatch");
  GrayImage region(garment_mask.width(), garment_mask.height());
  if (clusters.clusters.empty()) return region;
  const auto material = materials(clusters, cfg);
  std::vector<std::size_t> total(clusters.clusters.size(), 0);
  for (std::size_t i = 0; i < clusters.clusters.size(); ++i) total[material[i]] += clusters.clusters[i].count;
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(total.begin(), total.end()) - total.begin());
  for (int y = 0; y < region.height(); ++y)
    for (int x = 0; x < region.width(); ++x) {
      const int l = clusters.label(x, y);
      if (garment_mask.on(x, y) && l >= 0 && material[static_cast<std::size_t>(l)] == best) region.at(x, y) = 1.0;
    }
  return region;
}

GrayImage shading_edges_for_training(const RasterImage& img, const GrayImage& garment_mask,
                                     const ColorClusterStats& clusters, const CannyParams& canny_params) {
  require_stats(img, garment_mask, clusters);
  const GrayImage inner = erode3x3(erode3x3(largest_material_region(garment_mask, clusters)));
  GrayImage edges = canny(img, canny_params);
  for (int y = 0; y < edges.height(); ++y)
    for (int x = 0; x < edges.width(); ++x)
      if (!inner.on(x, y)) edges.at(x, y) = 0.0;
  return edges;
}

GrayImage render_shading(const ContourMap& contour, const GrayImage& shading_edges, const ShadeConfig& cfg) {
  if (!contour.mask.same_size(shading_edges)) throw std::invalid_argument("render_shading: size mismatch");
  if (!(cfg.sigma > 0.0) || cfg.a < 0.0 || cfg.s_min < 0.0 || cfg.s_min > 1.0) {
    throw std::invalid_argument("render_shading: need sigma > 0, a >= 0, 0 <= s_min <= 1");
  }
  GrayImage region(contour.mask.width(), contour.mask.height(), 1.0);
  try {
    region = outer_boundary(contour);
  } catch (const OpenContourError&) {
  }
  GrayImage edges = shading_edges;
  for (double& v : edges.data()) v = v > 0.5 ? 1.0 : 0.0;
  const double center_tap = gaussian_kernel(cfg.sigma)[static_cast<std::size_t>(std::ceil(3.0 * cfg.sigma))];
  const GrayImage blurred = gaussian_blur(edges, cfg.sigma);
  GrayImage out(region.width(), region.height(), 1.0);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      if (!region.on(x, y)) continue;
      out.at(x, y) = std::clamp(1.0 - cfg.a * blurred.at(x, y) / center_tap, cfg.s_min, 1.0);
    }
  return out;
}

RasterImage enhance(const RasterImage& image, const GrayImage& shading) {
  RasterImage out = pointwise_product(image, shading);
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

}  // namespace garment
