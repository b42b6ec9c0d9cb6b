#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace synthetic {

namespace {

constexpr double kMinToneAngle = 0.25;  // radians
// Largest channel step between garment tones; the default Canny thresholds fire from about 0.35.
constexpr double kMinContrast = 0.45;

double contrast(const Rgb& a, const Rgb& b) {
  return std::max({std::fabs(a.r - b.r), std::fabs(a.g - b.g), std::fabs(a.b - b.b)});
}

double u8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

bool inside_polygon(const std::vector<std::pair<double, double>>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

GrayImage silhouette(std::mt19937_64& rng, int size) {
  const double s = size / 512.0;
  GrayImage mask(size, size);
  const int shape = uniform_int(rng, 0, 2);
  if (shape == 0) {
    const double cx = uniform(rng, 226, 286) * s;
    const double cy = uniform(rng, 236, 276) * s;
    const double rx = uniform(rng, 120, 190) * s;
    const double ry = uniform(rng, 150, 200) * s;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double dx = (x - cx) / rx;
        const double dy = (y - cy) / ry;
        if (dx * dx + dy * dy < 1.0) mask.at(x, y) = 1.0;
      }
    return mask;
  }
  std::vector<std::pair<double, double>> poly;
  if (shape == 1) {
    const double x0 = uniform(rng, 70, 150);
    const double x1 = uniform(rng, 362, 442);
    const double y0 = uniform(rng, 60, 120);
    const double y1 = uniform(rng, 392, 452);
    const double flare = uniform(rng, 0, 40);
    poly = {{x0 + flare, y0}, {x1 - flare, y0}, {x1, y1}, {x0, y1}};
  } else {
    poly = {{200, 80}, {312, 80}, {400, 110}, {470, 220}, {420, 245}, {370, 170},
            {370, 440}, {142, 440}, {142, 170}, {92, 245}, {42, 220}, {112, 110}};
    for (auto& [x, y] : poly) {
      x += uniform(rng, -12, 12);
      y += uniform(rng, -12, 12);
    }
  }
  for (auto& [x, y] : poly) {
    x *= s;
    y *= s;
  }
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if (inside_polygon(poly, x + 0.5, y + 0.5)) mask.at(x, y) = 1.0;
  return mask;
}

}  // namespace

Rgb random_u8_color(std::mt19937_64& rng, double lo, double hi) {
  return {u8(uniform(rng, lo, hi)), u8(uniform(rng, lo, hi)), u8(uniform(rng, lo, hi))};
}

GrayImage full_mask(int w, int h) { return GrayImage(w, h, 1.0); }

Garment two_tone_garment(std::mt19937_64& rng, int size) {
  const Rgb white{1.0, 1.0, 1.0};
  Rgb a;
  Rgb b;
  do {
    a = random_u8_color(rng);
    b = random_u8_color(rng);
  } while (contrast(a, white) < kMinContrast || contrast(b, white) < kMinContrast || contrast(a, b) < kMinContrast);

  GrayImage mask = silhouette(rng, size);
  const int pattern = uniform_int(rng, 0, 4);
  const int period = uniform_int(rng, 36, 72);
  const int phase = uniform_int(rng, 0, period - 1);
  const int split = uniform_int(rng, size * 2 / 5, size * 3 / 5);
  RasterImage img(size, size, white);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      if (!mask.on(x, y)) continue;
      int t = 0;
      switch (pattern) {
        case 0: t = y; break;
        case 1: t = x; break;
        case 2: t = x + y; break;
        case 3: t = x - y + size; break;
        default: t = x < split ? 0 : period / 2; break;
      }
      img.set(x, y, ((t + phase) % period) < period / 2 ? a : b);
    }
  return {std::move(img), std::move(mask), a, b};
}

ShadedImage cluster_colored(std::mt19937_64& rng, int w, int h) {
  const int k = uniform_int(rng, 2, 5);
  std::vector<Rgb> tones;
  std::vector<std::pair<double, double>> seeds;
  // Tones differ in chromaticity so that no shaded tone can pass for another.
  auto angle = [](const Rgb& a, const Rgb& b) {
    const double dot = a.r * b.r + a.g * b.g + a.b * b.b;
    return std::acos(std::clamp(dot / std::sqrt((a.r * a.r + a.g * a.g + a.b * a.b) * (b.r * b.r + b.g * b.g + b.b * b.b)),
                                -1.0, 1.0));
  };
  while (static_cast<int>(tones.size()) < k) {
    const Rgb t = random_u8_color(rng, 0.2, 0.95);
    if (std::all_of(tones.begin(), tones.end(), [&](const Rgb& o) { return angle(t, o) >= kMinToneAngle; })) {
      tones.push_back(t);
      seeds.emplace_back(uniform(rng, 0, w), uniform(rng, 0, h));
    }
  }
  const double fx = uniform(rng, 0.02, 0.12);
  const double fy = uniform(rng, 0.02, 0.12);
  const double px = uniform(rng, 0, 6.3);
  const double py = uniform(rng, 0, 6.3);
  ShadedImage out{RasterImage(w, h), RasterImage(w, h), GrayImage(w, h)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        const double d = std::hypot(x - seeds[i].first, y - seeds[i].second);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      const double s = 0.85 + 0.15 * std::sin(fx * x + px) * std::cos(fy * y + py);
      const Rgb r = tones[best];
      out.reflectance.set(x, y, r);
      out.shading.at(x, y) = s;
      out.image.set(x, y, r * s);
    }
  return out;
}

RasterImage stripes(int w, int h, int period, bool horizontal, const Rgb& a, const Rgb& b) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, ((horizontal ? y : x) % period) < period / 2 ? a : b);
  return img;
}

RasterImage random_shapes(std::mt19937_64& rng, int w, int h) {
  RasterImage img(w, h, random_u8_color(rng, 0.0, 1.0));
  const int rects = uniform_int(rng, 1, 3);
  for (int i = 0; i < rects; ++i) {
    const int x0 = uniform_int(rng, 0, w - 4);
    const int y0 = uniform_int(rng, 0, h - 4);
    const int x1 = uniform_int(rng, x0 + 3, w);
    const int y1 = uniform_int(rng, y0 + 3, h);
    const Rgb c = random_u8_color(rng, 0.0, 1.0);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) img.set(x, y, c);
  }
  const int disks = uniform_int(rng, 0, 2);
  for (int i = 0; i < disks; ++i) {
    const double cx = uniform(rng, 0, w);
    const double cy = uniform(rng, 0, h);
    const double r = uniform(rng, 3, w / 3.0);
    const Rgb c = random_u8_color(rng, 0.0, 1.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (std::hypot(x - cx, y - cy) < r) img.set(x, y, c);
  }
  if (uniform_int(rng, 0, 1) == 1) {
    const int y0 = uniform_int(rng, 0, h / 2);
    for (int y = y0; y < std::min(h, y0 + h / 3); ++y)
      for (int x = 0; x < w; ++x) img.set(x, y, {u8(x / double(w - 1)), img.at(x, y, 1), img.at(x, y, 2)});
  }
  return img;
}

}  // namespace synthetic
