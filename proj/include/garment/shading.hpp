#pragma once

#include "garment/contour.hpp"
#include "garment/filters.hpp"
#include "garment/palette.hpp"
#include "garment/raster.hpp"

namespace garment {

/// Reflectance floor used in S = I / R.
inline constexpr double kReflectanceFloor = 1.0 / 255.0;

struct IntrinsicPair {
  RasterImage reflectance;
  GrayImage shading;
  /// Reflectance channels raised to the floor.
  std::size_t clamped_channels = 0;
};

struct ShadeConfig {
  double a = 0.5;
  double sigma = 4.0;
  double s_min = 0.3;
};

struct DecomposeConfig {
  /// A cluster shares a material's reflectance when the rescaled material mean
  /// reproduces the cluster mean within this per-channel error.
  double merge_tol = 0.5 / 255.0;
  /// Clusters darker than this channel sum are never merged by chromaticity.
  double dark_sum = 0.05;
};

/// I = R x S on the mask: each material takes the mean of its largest cluster as R,
/// S is the mean of I/R over channels where R is above the floor. Outside the mask R = I, S = 1.
IntrinsicPair decompose(const RasterImage& img, const GrayImage& garment_mask, const ColorClusterStats& clusters,
                        const DecomposeConfig& cfg = {});

/// Pixels of the material holding the most garment pixels.
GrayImage largest_material_region(const GrayImage& garment_mask, const ColorClusterStats& clusters,
                                  const DecomposeConfig& cfg = {});

/// Canny edges inside the largest material region shrunk by 2 px, which drops its outline.
GrayImage shading_edges_for_training(const RasterImage& img, const GrayImage& garment_mask,
                                     const ColorClusterStats& clusters, const CannyParams& canny_params = {});

/// S = clamp(1 - a * B, s_min, 1) inside the garment, 1 outside, where B is the blurred edge
/// mask scaled so a straight 1-px line reaches exactly 1. An open contour shades the whole canvas.
GrayImage render_shading(const ContourMap& contour, const GrayImage& shading_edges, const ShadeConfig& cfg = {});

/// Pointwise product clamped to [0,1].
RasterImage enhance(const RasterImage& image, const GrayImage& shading);

}  // namespace garment
