#pragma once

#include <stdexcept>
#include <string>

#include "garment/raster.hpp"

namespace garment {

enum class ContourProvenance { extracted, user_drawn };

/// Binary garment contour (silhouette plus seams), 1 px wide when extracted.
struct ContourMap {
  GrayImage mask{1, 1};
  ContourProvenance provenance = ContourProvenance::extracted;
};

struct ContourConfig {
  double blur_sigma = 2.0;
  /// High threshold as a percentile of nonzero gradient magnitudes.
  double high_percentile = 0.90;
  /// Low threshold as a fraction of the high threshold.
  double low_ratio = 0.4;
  int min_branch_len = 12;
  /// RGB distance from the border color above which a pixel counts as foreground.
  double silhouette_thresh = 0.06;
  /// Share of border pixels that must match the border color for the silhouette to be added.
  double border_uniformity = 0.9;
};

/// Raised when the contour encloses no region even after gap closing.
class OpenContourError : public std::runtime_error {
 public:
  explicit OpenContourError(int gap_tolerance_px);
  int gap_tolerance() const { return gap_tolerance_; }

 private:
  int gap_tolerance_;
};

/// Blur, color Sobel magnitude, percentile hysteresis, thinning. On a near-uniform
/// background the foreground silhouette is added before thinning, so low-contrast
/// stretches of the outline stay closed.
ContourMap extract_contour(const RasterImage& img, const ContourConfig& cfg = {});

/// Foreground pixels 4-adjacent to the background when the canvas border is near-uniform;
/// all zero otherwise. Notches between sleeves and body are included.
GrayImage background_silhouette(const RasterImage& img, const ContourConfig& cfg = {});

/// Drops components and dangling branches shorter than min_branch_len, repeated to a fixpoint.
ContourMap simplify_contour(const ContourMap& cm, int min_branch_len);

/// Filled region enclosed by the outermost closed contour(s), contour pixels included.
/// One 3x3 closing bridges 1-px gaps before the exterior flood fill from the canvas border.
GrayImage outer_boundary(const ContourMap& cm);

/// Pixels of the filled region that touch the exterior (8-neighborhood); the silhouette curve.
GrayImage outer_curve(const GrayImage& region);

}  // namespace garment
