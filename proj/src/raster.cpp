#include "garment/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace garment {

Rgb operator+(const Rgb& a, const Rgb& b) { return {a.r + b.r, a.g + b.g, a.b + b.b}; }
Rgb operator-(const Rgb& a, const Rgb& b) { return {a.r - b.r, a.g - b.g, a.b - b.b}; }
Rgb operator*(const Rgb& a, double s) { return {a.r * s, a.g * s, a.b * s}; }

double distance(const Rgb& a, const Rgb& b) {
  const Rgb d = a - b;
  return std::sqrt(d.r * d.r + d.g * d.g + d.b * d.b);
}

Rgb clamp01(const Rgb& c) {
  return {std::clamp(c.r, 0.0, 1.0), std::clamp(c.g, 0.0, 1.0), std::clamp(c.b, 0.0, 1.0)};
}

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

double GrayImage::clamped(int x, int y) const {
  return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
}

std::size_t GrayImage::count_on() const {
  return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](double v) { return v > 0.5; }));
}

bool GrayImage::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kChannels);
  for (std::size_t i = 0; i < data_.size(); i += kChannels) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Rgb RasterImage::pixel(int x, int y) const {
  const std::size_t i = index(x, y);
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void RasterImage::set(int x, int y, const Rgb& v) {
  const std::size_t i = index(x, y);
  data_[i] = v.r;
  data_[i + 1] = v.g;
  data_[i + 2] = v.b;
}

Rgb RasterImage::bilinear(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  Rgb out;
  for (int c = 0; c < kChannels; ++c) {
    const double top = at(x0, y0, c) * (1.0 - fx) + at(x1, y0, c) * fx;
    const double bottom = at(x0, y1, c) * (1.0 - fx) + at(x1, y1, c) * fx;
    out[c] = top * (1.0 - fy) + bottom * fy;
  }
  // Exact passthrough for samples that land on a pixel center.
  if (fx == 0.0 && fy == 0.0) return pixel(x0, y0);
  return out;
}

bool RasterImage::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

GrayImage RasterImage::channel(int c) const {
  GrayImage out(width_, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.at(x, y) = at(x, y, c);
  return out;
}

RepresentationStack::RepresentationStack(GrayImage contour_map, RasterImage bicolor_raster, GrayImage coverage_mask)
    : contour(std::move(contour_map)), bicolor(std::move(bicolor_raster)), coverage(std::move(coverage_mask)) {
  if (!bicolor.same_size(contour) || !coverage.same_size(contour)) {
    throw std::invalid_argument("representation layers must share dimensions");
  }
}

namespace {

// Source coordinate for a destination index on a corner-aligned grid.
double source_coord(int dst, int dst_len, int src_len) {
  if (dst_len == 1) return 0.5 * (src_len - 1);
  return static_cast<double>(dst) * (src_len - 1) / (dst_len - 1);
}

struct Tap {
  int i0;
  int i1;
  double w;  // weight of i1
};

std::vector<Tap> taps(int dst_len, int src_len) {
  std::vector<Tap> out(static_cast<std::size_t>(dst_len));
  for (int d = 0; d < dst_len; ++d) {
    const double s = source_coord(d, dst_len, src_len);
    const int i0 = std::clamp(static_cast<int>(std::floor(s)), 0, src_len - 1);
    const int i1 = std::min(i0 + 1, src_len - 1);
    out[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
  }
  return out;
}

double lerp(double a, double b, double w) {
  if (w == 0.0) return a;
  return std::clamp(a + (b - a) * w, std::min(a, b), std::max(a, b));
}

}  // namespace

RasterImage resample(const RasterImage& img, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1) throw std::invalid_argument("resample: target dimensions must be >= 1");
  if (new_width == img.width() && new_height == img.height()) return img;
  const auto tx = taps(new_width, img.width());
  const auto ty = taps(new_height, img.height());
  RasterImage out(new_width, new_height);
  for (int y = 0; y < new_height; ++y) {
    const Tap& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < new_width; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < RasterImage::kChannels; ++c) {
        const double top = lerp(img.at(vx.i0, vy.i0, c), img.at(vx.i1, vy.i0, c), vx.w);
        const double bottom = lerp(img.at(vx.i0, vy.i1, c), img.at(vx.i1, vy.i1, c), vx.w);
        out.at(x, y, c) = lerp(top, bottom, vy.w);
      }
    }
  }
  return out;
}

GrayImage resample(const GrayImage& img, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1) throw std::invalid_argument("resample: target dimensions must be >= 1");
  if (new_width == img.width() && new_height == img.height()) return img;
  const auto tx = taps(new_width, img.width());
  const auto ty = taps(new_height, img.height());
  GrayImage out(new_width, new_height);
  for (int y = 0; y < new_height; ++y) {
    const Tap& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < new_width; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      const double top = lerp(img.at(vx.i0, vy.i0), img.at(vx.i1, vy.i0), vx.w);
      const double bottom = lerp(img.at(vx.i0, vy.i1), img.at(vx.i1, vy.i1), vx.w);
      out.at(x, y) = lerp(top, bottom, vy.w);
    }
  }
  return out;
}

RasterImage pointwise_product(const RasterImage& r, const GrayImage& s) {
  if (!r.same_size(s)) throw std::invalid_argument("pointwise_product: dimension mismatch");
  RasterImage out(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x)
      for (int c = 0; c < RasterImage::kChannels; ++c) out.at(x, y, c) = r.at(x, y, c) * s.at(x, y);
  return out;
}

}  // namespace garment
