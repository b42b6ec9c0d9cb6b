#pragma once

#include <array>
#include <vector>

#include "garment/raster.hpp"

namespace garment {

/// 8-neighborhood in clockwise order starting north: N, NE, E, SE, S, SW, W, NW.
inline constexpr std::array<Pixel, 8> kNeighbors8{{{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};
inline constexpr std::array<Pixel, 4> kNeighbors4{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

/// Normalized 1-D Gaussian taps of radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur, horizontal then vertical pass, border replicate.
GrayImage gaussian_blur(const GrayImage& img, double sigma);
RasterImage gaussian_blur(const RasterImage& img, double sigma);

struct Gradient {
  GrayImage gx;
  GrayImage gy;
  GrayImage magnitude;
};

/// Sobel gradient of a color image. Each pixel takes the channel with the largest
/// magnitude; values are scaled by 1/4 so a sharp unit step has magnitude 1.
Gradient color_sobel(const RasterImage& img);

/// Keeps pixels with candidate[p] && mag[p] >= low that are 8-connected to a pixel with mag >= high.
GrayImage hysteresis(const GrayImage& magnitude, const GrayImage& candidates, double low, double high);

struct CannyParams {
  double sigma = 1.4;
  double low = 0.08;
  double high = 0.2;
};

/// Canny edge map: Gaussian smoothing, color Sobel, non-maximum suppression, hysteresis.
GrayImage canny(const RasterImage& img, const CannyParams& params);

int count_neighbors8(const GrayImage& mask, int x, int y);
/// Number of 0->1 transitions around the circular 8-neighborhood.
int crossing_number(const GrayImage& mask, int x, int y);

/// Sequential border thinning to an 8-connected one-pixel skeleton; endpoints and
/// topology are preserved.
GrayImage thin(const GrayImage& mask);
/// As thin(), but pixels on in `keep` are never removed.
GrayImage thin(const GrayImage& mask, const GrayImage& keep);

GrayImage dilate3x3(const GrayImage& mask);
GrayImage erode3x3(const GrayImage& mask);
GrayImage close3x3(const GrayImage& mask);

/// Connected components of on-pixels; labels are 0..n-1 in raster order of first pixel, -1 elsewhere.
struct Components {
  std::vector<int> labels;
  std::vector<std::vector<Pixel>> members;
};
Components connected_components(const GrayImage& mask, bool eight_connected);

/// Chebyshev (chessboard) distance to the nearest on-pixel of `sources`; large value if none.
std::vector<int> chessboard_distance(const GrayImage& sources);

}  // namespace garment
