#pragma once

#include <string>
#include <vector>

#include "garment/contour.hpp"
#include "garment/raster.hpp"

namespace garment {

enum class SynthMode { harmonic, voronoi };

struct SynthConfig {
  SynthMode mode = SynthMode::harmonic;
  /// Stop once the largest residual of the discrete Laplace equations is at or below tol.
  double tol = 1e-6;
  int max_iterations = 20000;
  /// Interior color when nothing constrains the fill.
  Rgb default_color{0.5, 0.5, 0.5};
  Rgb background{1.0, 1.0, 1.0};
  /// Dense mode: pixels this close to the garment outline are blended, the rest copy the texture.
  int dense_rim = 4;
};

struct SynthResult {
  RasterImage image;
  GrayImage region;
  double max_residual = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// Harmonic (or nearest-constraint) fill of the garment interior from the stroke colors.
/// Coverage pixels are fixed; contour pixels insulate. Throws OpenContourError.
SynthResult synthesize(const RepresentationStack& rep, const SynthConfig& cfg = {});

/// Dense-texture mode: the texture, tiled over the garment's bounding box, fixes every pixel
/// deeper than cfg.dense_rim inside the garment; the rim is solved harmonically.
SynthResult synthesize_dense(const RepresentationStack& rep, const RasterImage& texture, const SynthConfig& cfg = {});

/// Lower-level entry: fills `region` minus `walls` from the constraint pixels. Every
/// 4-connected part of region \ walls is solved on its own; a part without constraints takes
/// the color of the nearest constraint within the region.
SynthResult fill_region(const GrayImage& region, const GrayImage& walls, const GrayImage& constraint_mask,
                        const RasterImage& constraint_colors, const SynthConfig& cfg);

}  // namespace garment
