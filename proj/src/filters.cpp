#include "garment/filters.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "garment/parallel.hpp"

namespace garment {

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = img.width();
  const int h = img.height();
  GrayImage tmp(w, h);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * img.clamped(x + i, y);
      tmp.at(x, y) = acc;
    }
  });
  GrayImage out(w, h);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * tmp.clamped(x, y + i);
      out.at(x, y) = acc;
    }
  });
  return out;
}

RasterImage gaussian_blur(const RasterImage& img, double sigma) {
  RasterImage out(img.width(), img.height());
  for (int c = 0; c < RasterImage::kChannels; ++c) {
    const GrayImage blurred = gaussian_blur(img.channel(c), sigma);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.at(x, y, c) = blurred.at(x, y);
  }
  return out;
}

Gradient color_sobel(const RasterImage& img) {
  const int w = img.width();
  const int h = img.height();
  Gradient g{GrayImage(w, h), GrayImage(w, h), GrayImage(w, h)};
  auto px = [&](int x, int y, int c) {
    return img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1), c);
  };
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double best_mag = -1.0;
      double best_gx = 0.0;
      double best_gy = 0.0;
      for (int c = 0; c < RasterImage::kChannels; ++c) {
        const double gx = (px(x + 1, y - 1, c) + 2.0 * px(x + 1, y, c) + px(x + 1, y + 1, c)) -
                          (px(x - 1, y - 1, c) + 2.0 * px(x - 1, y, c) + px(x - 1, y + 1, c));
        const double gy = (px(x - 1, y + 1, c) + 2.0 * px(x, y + 1, c) + px(x + 1, y + 1, c)) -
                          (px(x - 1, y - 1, c) + 2.0 * px(x, y - 1, c) + px(x + 1, y - 1, c));
        const double mag = std::hypot(gx, gy) / 4.0;
        if (mag > best_mag) {
          best_mag = mag;
          best_gx = gx / 4.0;
          best_gy = gy / 4.0;
        }
      }
      g.gx.at(x, y) = best_gx;
      g.gy.at(x, y) = best_gy;
      g.magnitude.at(x, y) = best_mag;
    }
  });
  return g;
}

GrayImage hysteresis(const GrayImage& magnitude, const GrayImage& candidates, double low, double high) {
  const int w = magnitude.width();
  const int h = magnitude.height();
  GrayImage out(w, h);
  std::deque<Pixel> queue;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (candidates.on(x, y) && magnitude.at(x, y) >= high) {
        out.at(x, y) = 1.0;
        queue.push_back({x, y});
      }
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    for (const Pixel& d : kNeighbors8) {
      const int nx = p.x + d.x;
      const int ny = p.y + d.y;
      if (!out.contains(nx, ny) || out.on(nx, ny)) continue;
      if (candidates.on(nx, ny) && magnitude.at(nx, ny) >= low) {
        out.at(nx, ny) = 1.0;
        queue.push_back({nx, ny});
      }
    }
  }
  return out;
}

GrayImage canny(const RasterImage& img, const CannyParams& params) {
  if (!(params.high >= params.low && params.low > 0.0)) {
    throw std::invalid_argument("canny: thresholds must satisfy high >= low > 0");
  }
  const Gradient g = color_sobel(gaussian_blur(img, params.sigma));
  const int w = img.width();
  const int h = img.height();
  const double tan22 = std::tan(std::numbers::pi / 8.0);
  const double tan67 = std::tan(3.0 * std::numbers::pi / 8.0);
  auto mag_at = [&](int x, int y) { return g.magnitude.contains(x, y) ? g.magnitude.at(x, y) : 0.0; };

  GrayImage thin_edges(w, h);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double m = g.magnitude.at(x, y);
      if (m <= 0.0) continue;
      const double gx = g.gx.at(x, y);
      const double gy = g.gy.at(x, y);
      const double ax = std::abs(gx);
      const double ay = std::abs(gy);
      Pixel back;
      Pixel fwd;
      if (ay <= ax * tan22) {
        back = {-1, 0};
        fwd = {1, 0};
      } else if (ay >= ax * tan67) {
        back = {0, -1};
        fwd = {0, 1};
      } else if (gx * gy > 0.0) {
        back = {-1, -1};
        fwd = {1, 1};
      } else {
        back = {1, -1};
        fwd = {-1, 1};
      }
      if (m > mag_at(x + back.x, y + back.y) && m >= mag_at(x + fwd.x, y + fwd.y)) thin_edges.at(x, y) = 1.0;
    }
  });
  return hysteresis(g.magnitude, thin_edges, params.low, params.high);
}

int count_neighbors8(const GrayImage& mask, int x, int y) {
  int n = 0;
  for (const Pixel& d : kNeighbors8) {
    const int nx = x + d.x;
    const int ny = y + d.y;
    if (mask.contains(nx, ny) && mask.on(nx, ny)) ++n;
  }
  return n;
}

int crossing_number(const GrayImage& mask, int x, int y) {
  int transitions = 0;
  for (int i = 0; i < 8; ++i) {
    const Pixel a = kNeighbors8[static_cast<std::size_t>(i)];
    const Pixel b = kNeighbors8[static_cast<std::size_t>((i + 1) % 8)];
    const bool va = mask.contains(x + a.x, y + a.y) && mask.on(x + a.x, y + a.y);
    const bool vb = mask.contains(x + b.x, y + b.y) && mask.on(x + b.x, y + b.y);
    if (!va && vb) ++transitions;
  }
  return transitions;
}

namespace {

bool on_or_zero(const GrayImage& m, int x, int y) { return m.contains(x, y) && m.on(x, y); }

// Deleting p keeps (8, 4) topology: the on-pixels of its ring form one 8-connected group
// and the off-pixels 4-adjacent to p form one 4-connected group.
bool is_simple(const GrayImage& m, int x, int y) {
  std::array<bool, 8> n{};
  for (std::size_t i = 0; i < 8; ++i) n[i] = on_or_zero(m, x + kNeighbors8[i].x, y + kNeighbors8[i].y);
  std::array<std::size_t, 8> parent{0, 1, 2, 3, 4, 5, 6, 7};
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  for (std::size_t i = 0; i < 8; ++i) {
    if (!n[i]) continue;
    for (std::size_t j = i + 1; j < 8; ++j) {
      if (n[j] && std::abs(kNeighbors8[i].x - kNeighbors8[j].x) <= 1 &&
          std::abs(kNeighbors8[i].y - kNeighbors8[j].y) <= 1) {
        parent[find(j)] = find(i);
      }
    }
  }
  int fg = 0;
  for (std::size_t i = 0; i < 8; ++i)
    if (n[i] && find(i) == i) ++fg;
  if (fg != 1) return false;

  // Background runs around the ring; only runs touching an orthogonal neighbor count.
  int bg = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    if (n[i] || !n[(i + 7) % 8]) continue;
    bool orthogonal = false;
    for (std::size_t j = i; !n[j % 8]; ++j) orthogonal = orthogonal || j % 2 == 0;
    bg += orthogonal ? 1 : 0;
  }
  return bg == 1;
}

}  // namespace

GrayImage thin(const GrayImage& mask) { return thin(mask, GrayImage(mask.width(), mask.height())); }

GrayImage thin(const GrayImage& mask, const GrayImage& keep) {
  if (!keep.same_size(mask)) throw std::invalid_argument("thin: keep mask size differs");
  GrayImage m = mask;
  for (double& v : m.data()) v = v > 0.5 ? 1.0 : 0.0;
  // North, south, east, west borders in turn; deletions apply immediately.
  constexpr std::array<std::size_t, 4> kSides{0, 4, 2, 6};
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t side : kSides) {
      // Border pixels are taken from the state before the pass so one pass peels one layer.
      std::vector<Pixel> border;
      for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
          if (m.on(x, y) && !keep.on(x, y) && !on_or_zero(m, x + kNeighbors8[side].x, y + kNeighbors8[side].y)) {
            border.push_back({x, y});
          }
      for (const Pixel& p : border) {
        if (count_neighbors8(m, p.x, p.y) < 2 || !is_simple(m, p.x, p.y)) continue;
        m.at(p.x, p.y) = 0.0;
        changed = true;
      }
    }
  }
  return m;
}

GrayImage dilate3x3(const GrayImage& mask) {
  GrayImage out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      bool any = mask.on(x, y);
      for (const Pixel& d : kNeighbors8) any = any || on_or_zero(mask, x + d.x, y + d.y);
      out.at(x, y) = any ? 1.0 : 0.0;
    }
  return out;
}

GrayImage erode3x3(const GrayImage& mask) {
  // Out-of-canvas pixels count as set, so erosion never eats shapes touching the border.
  GrayImage out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      bool all = mask.on(x, y);
      for (const Pixel& d : kNeighbors8) {
        const int nx = x + d.x;
        const int ny = y + d.y;
        if (mask.contains(nx, ny)) all = all && mask.on(nx, ny);
      }
      out.at(x, y) = all ? 1.0 : 0.0;
    }
  return out;
}

GrayImage close3x3(const GrayImage& mask) { return erode3x3(dilate3x3(mask)); }

Components connected_components(const GrayImage& mask, bool eight_connected) {
  const int w = mask.width();
  const int h = mask.height();
  Components out;
  out.labels.assign(static_cast<std::size_t>(w) * h, -1);
  std::deque<Pixel> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.on(x, y) || out.labels[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      const int label = static_cast<int>(out.members.size());
      out.members.emplace_back();
      out.labels[static_cast<std::size_t>(y) * w + x] = label;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop_front();
        out.members.back().push_back(p);
        auto visit = [&](const Pixel& d) {
          const int nx = p.x + d.x;
          const int ny = p.y + d.y;
          if (!mask.contains(nx, ny) || !mask.on(nx, ny)) return;
          int& l = out.labels[static_cast<std::size_t>(ny) * w + nx];
          if (l >= 0) return;
          l = label;
          queue.push_back({nx, ny});
        };
        if (eight_connected) {
          for (const Pixel& d : kNeighbors8) visit(d);
        } else {
          for (const Pixel& d : kNeighbors4) visit(d);
        }
      }
      std::sort(out.members.back().begin(), out.members.back().end());
    }
  }
  return out;
}

std::vector<int> chessboard_distance(const GrayImage& sources) {
  const int w = sources.width();
  const int h = sources.height();
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<int> d(static_cast<std::size_t>(w) * h, inf);
  auto at = [&](int x, int y) -> int& { return d[static_cast<std::size_t>(y) * w + x]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (sources.on(x, y)) at(x, y) = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int v = at(x, y);
      if (x > 0) v = std::min(v, at(x - 1, y) + 1);
      if (y > 0) {
        v = std::min(v, at(x, y - 1) + 1);
        if (x > 0) v = std::min(v, at(x - 1, y - 1) + 1);
        if (x + 1 < w) v = std::min(v, at(x + 1, y - 1) + 1);
      }
      at(x, y) = v;
    }
  for (int y = h - 1; y >= 0; --y)
    for (int x = w - 1; x >= 0; --x) {
      int v = at(x, y);
      if (x + 1 < w) v = std::min(v, at(x + 1, y) + 1);
      if (y + 1 < h) {
        v = std::min(v, at(x, y + 1) + 1);
        if (x + 1 < w) v = std::min(v, at(x + 1, y + 1) + 1);
        if (x > 0) v = std::min(v, at(x - 1, y + 1) + 1);
      }
      at(x, y) = v;
    }
  return d;
}

}  // namespace garment
