#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace garment {

/// Canonical working canvas edge length; service inputs are resampled to it.
inline constexpr int kCanonicalSize = 512;

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  double& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }
  double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

Rgb operator+(const Rgb& a, const Rgb& b);
Rgb operator-(const Rgb& a, const Rgb& b);
Rgb operator*(const Rgb& a, double s);
double distance(const Rgb& a, const Rgb& b);
Rgb clamp01(const Rgb& c);

/// Integer pixel coordinate.
struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel& a, const Pixel& b) {
    // Raster order: top-most first, then left-most.
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Dense single-channel image. Used for masks ({0,1}), label maps and shading.
class GrayImage {
 public:
  GrayImage(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  double& at(int x, int y) { return data_[index(x, y)]; }
  double at(int x, int y) const { return data_[index(x, y)]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  /// Border-replicating read.
  double clamped(int x, int y) const;
  /// Mask semantics: true for any value > 0.5.
  bool on(int x, int y) const { return at(x, y) > 0.5; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_size(const GrayImage& o) const { return width_ == o.width_ && height_ == o.height_; }
  std::size_t count_on() const;
  bool all_finite() const;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<double> data_;
};

/// Dense interleaved RGB image with nominal range [0,1].
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  int pixel_count() const { return width_ * height_; }

  double& at(int x, int y, int c) { return data_[index(x, y) + static_cast<std::size_t>(c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y) + static_cast<std::size_t>(c)]; }
  Rgb pixel(int x, int y) const;
  void set(int x, int y, const Rgb& v);
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  /// Bilinear sample at continuous coordinates (pixel centers on integers), border-replicating.
  Rgb bilinear(double x, double y) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_size(const RasterImage& o) const { return width_ == o.width_ && height_ == o.height_; }
  bool same_size(const GrayImage& o) const { return width_ == o.width() && height_ == o.height(); }
  bool all_finite() const;

  GrayImage channel(int c) const;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
           kChannels;
  }

  int width_;
  int height_;
  std::vector<double> data_;
};

/// Generator input: binary contour plus the rasterized bi-colored edge layer.
/// Black is a legal stroke color, so coverage is carried separately from the color raster.
struct RepresentationStack {
  GrayImage contour;
  RasterImage bicolor;
  GrayImage coverage;

  RepresentationStack(GrayImage contour_map, RasterImage bicolor_raster, GrayImage coverage_mask);
};

/// Bilinear resampling with corner-aligned sampling grids.
RasterImage resample(const RasterImage& img, int new_width, int new_height);
GrayImage resample(const GrayImage& img, int new_width, int new_height);

/// out[p,c] = r[p,c] * s[p]
RasterImage pointwise_product(const RasterImage& r, const GrayImage& s);

}  // namespace garment
