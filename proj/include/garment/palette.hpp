#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "garment/bicolor.hpp"
#include "garment/raster.hpp"

namespace garment {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Added to every cluster covariance so it stays invertible.
inline constexpr double kCovarianceFloor = 1e-6;

struct ColorCluster {
  Rgb mean;
  Mat3 cov{};
  std::size_t count = 0;
};

struct ColorClusterStats {
  std::vector<ColorCluster> clusters;
  /// Cluster index per pixel; -1 outside the mask.
  GrayImage label_map{1, 1};
  /// Set when fewer clusters than requested could be formed.
  bool reduced_k = false;
  /// k-means: within-cluster SSE after each assignment step.
  std::vector<double> sse_history;

  int k() const { return static_cast<int>(clusters.size()); }
  int label(int x, int y) const { return static_cast<int>(label_map.at(x, y)); }
};

struct PaletteConfig {
  double dist_thresh = 0.12;
  std::size_t max_samples = 4096;
};

/// Average-linkage agglomeration on at most cfg.max_samples masked colors, cut at
/// cfg.dist_thresh; every masked pixel is then labeled by its nearest cluster mean.
ColorClusterStats hierarchical_clusters(const RasterImage& img, const GrayImage& mask, const PaletteConfig& cfg = {});

/// k-means++ seeding then Lloyd iterations (fixpoint or 100 rounds).
ColorClusterStats kmeans_clusters(const RasterImage& img, const GrayImage& mask, int k, std::uint64_t seed);

/// Mean, regularized covariance and count per label in [0, k), in label order.
/// Pixels with label < 0 are ignored.
ColorClusterStats cluster_stats(const RasterImage& img, const GrayImage& label_map, int k);

/// Shifts every pixel of a mapped cluster by (new mean - old mean), clamped to [0,1].
RasterImage recolor_clusters(const RasterImage& img, const ColorClusterStats& stats, const std::map<int, Rgb>& mapping);

/// Replaces every left/right sample within `tol` of `from` by `to`.
BiColoredEdgeSet recolor_edges(const BiColoredEdgeSet& set, const Rgb& from, const Rgb& to, double tol,
                               std::size_t* replaced = nullptr);

/// Sum of squared distances of labeled pixels to their cluster means.
double within_cluster_sse(const RasterImage& img, const ColorClusterStats& stats);

/// {k, clusters:[{mean:[r,g,b], cov:[[..]x3], count}]}
nlohmann::json to_json(const ColorClusterStats& stats);
ColorClusterStats stats_from_json(const nlohmann::json& j);

}  // namespace garment
