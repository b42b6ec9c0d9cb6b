#include "garment/contour.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "garment/filters.hpp"

namespace garment {

OpenContourError::OpenContourError(int gap_tolerance_px)
    : std::runtime_error("open contour: no closed region found after 3x3 closing (gap tolerance " +
                         std::to_string(gap_tolerance_px) + " px)"),
      gap_tolerance_(gap_tolerance_px) {}

namespace {

GrayImage border_silhouette(const RasterImage& img, double thresh, double uniformity) {
  const int w = img.width();
  const int h = img.height();
  GrayImage out(w, h);
  std::vector<Rgb> border;
  for (int x = 0; x < w; ++x) {
    border.push_back(img.pixel(x, 0));
    if (h > 1) border.push_back(img.pixel(x, h - 1));
  }
  for (int y = 1; y + 1 < h; ++y) {
    border.push_back(img.pixel(0, y));
    if (w > 1) border.push_back(img.pixel(w - 1, y));
  }
  auto median = [&](double Rgb::*c) {
    std::vector<double> v;
    v.reserve(border.size());
    for (const Rgb& p : border) v.push_back(p.*c);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  const Rgb bg{median(&Rgb::r), median(&Rgb::g), median(&Rgb::b)};
  const auto matching = std::count_if(border.begin(), border.end(), [&](const Rgb& p) { return distance(p, bg) <= thresh; });
  if (static_cast<double>(matching) < uniformity * static_cast<double>(border.size())) return out;

  GrayImage fg(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) fg.at(x, y) = distance(img.pixel(x, y), bg) > thresh ? 1.0 : 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!fg.on(x, y)) continue;
      for (const Pixel& d : kNeighbors4) {
        const int nx = x + d.x;
        const int ny = y + d.y;
        if (fg.contains(nx, ny) && !fg.on(nx, ny)) {
          out.at(x, y) = 1.0;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace

GrayImage background_silhouette(const RasterImage& img, const ContourConfig& cfg) {
  return border_silhouette(img, cfg.silhouette_thresh, cfg.border_uniformity);
}

ContourMap extract_contour(const RasterImage& img, const ContourConfig& cfg) {
  const Gradient g = color_sobel(gaussian_blur(img, cfg.blur_sigma));
  std::vector<double> nonzero;
  for (double v : g.magnitude.data())
    if (v > 1e-9) nonzero.push_back(v);
  ContourMap out{GrayImage(img.width(), img.height()), ContourProvenance::extracted};
  if (nonzero.empty()) return out;

  std::sort(nonzero.begin(), nonzero.end());
  const auto rank = static_cast<std::size_t>(std::floor(cfg.high_percentile * static_cast<double>(nonzero.size() - 1)));
  const double high = nonzero[rank];
  const double low = cfg.low_ratio * high;
  const GrayImage all(img.width(), img.height(), 1.0);
  GrayImage band = hysteresis(g.magnitude, all, std::max(low, 1e-9), high);
  const GrayImage silhouette = border_silhouette(img, cfg.silhouette_thresh, cfg.border_uniformity);
  for (int y = 0; y < band.height(); ++y)
    for (int x = 0; x < band.width(); ++x)
      if (silhouette.on(x, y)) band.at(x, y) = 1.0;
  out.mask = thin(band);
  return out;
}

namespace {

// True when the on-neighbors of p other than `from` form one 8-connected group.
bool is_bump(const GrayImage& m, Pixel p, Pixel from) {
  std::vector<Pixel> nb;
  for (const Pixel& d : kNeighbors8) {
    const Pixel q{p.x + d.x, p.y + d.y};
    if (m.contains(q.x, q.y) && m.on(q.x, q.y) && !(q == from)) nb.push_back(q);
  }
  std::vector<bool> seen(nb.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Pixel a = nb[stack.back()];
    stack.pop_back();
    for (std::size_t j = 0; j < nb.size(); ++j) {
      if (seen[j] || std::abs(nb[j].x - a.x) > 1 || std::abs(nb[j].y - a.y) > 1) continue;
      seen[j] = true;
      ++reached;
      stack.push_back(j);
    }
  }
  return reached == nb.size();
}

// Removes branches that run from an endpoint to a junction with fewer than min_len pixels.
bool prune_spurs(GrayImage& m, int min_len) {
  bool changed = false;
  std::vector<Pixel> branch;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.on(x, y) || count_neighbors8(m, x, y) != 1) continue;
      branch.clear();
      Pixel prev{-1, -1};
      Pixel cur{x, y};
      bool reached_junction = false;
      while (true) {
        const int n = count_neighbors8(m, cur.x, cur.y);
        if (n >= 3) {
          reached_junction = true;
          // A pixel resting on a line without joining two of its strands is part of the spur.
          if (!branch.empty() && is_bump(m, cur, prev)) branch.push_back(cur);
          break;
        }
        branch.push_back(cur);
        if (static_cast<int>(branch.size()) >= min_len) break;
        Pixel next{-1, -1};
        for (const Pixel& d : kNeighbors8) {
          const Pixel q{cur.x + d.x, cur.y + d.y};
          if (!m.contains(q.x, q.y) || !m.on(q.x, q.y) || q == prev) continue;
          if (std::find(branch.begin(), branch.end(), q) != branch.end()) continue;
          next = q;
          break;
        }
        if (next.x < 0) break;  // reached another endpoint: isolated path, handled by component pruning
        prev = cur;
        cur = next;
      }
      if (reached_junction && static_cast<int>(branch.size()) < min_len) {
        for (const Pixel& p : branch) m.at(p.x, p.y) = 0.0;
        changed = true;
      }
    }
  }
  return changed;
}

bool prune_small_components(GrayImage& m, int min_len) {
  const Components comps = connected_components(m, true);
  bool changed = false;
  for (const auto& members : comps.members) {
    if (static_cast<int>(members.size()) >= min_len) continue;
    for (const Pixel& p : members) m.at(p.x, p.y) = 0.0;
    changed = true;
  }
  return changed;
}

}  // namespace

ContourMap simplify_contour(const ContourMap& cm, int min_branch_len) {
  ContourMap out = cm;
  for (double& v : out.mask.data()) v = v > 0.5 ? 1.0 : 0.0;
  if (min_branch_len <= 1) return out;
  bool changed = true;
  while (changed) {
    changed = prune_small_components(out.mask, min_branch_len);
    changed = prune_spurs(out.mask, min_branch_len) || changed;
  }
  return out;
}

GrayImage outer_boundary(const ContourMap& cm) {
  constexpr int kGapTolerance = 1;
  const GrayImage walls = close3x3(cm.mask);
  const int w = walls.width();
  const int h = walls.height();
  GrayImage exterior(w, h);
  std::deque<Pixel> queue;
  auto seed = [&](int x, int y) {
    if (!walls.on(x, y) && !exterior.on(x, y)) {
      exterior.at(x, y) = 1.0;
      queue.push_back({x, y});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    for (const Pixel& d : kNeighbors4) {
      const int nx = p.x + d.x;
      const int ny = p.y + d.y;
      if (walls.contains(nx, ny)) seed(nx, ny);
    }
  }

  GrayImage region(w, h);
  bool enclosed = false;
  for (int y = 1; y + 1 < h; ++y)
    for (int x = 1; x + 1 < w; ++x) {
      if (exterior.on(x, y)) continue;
      region.at(x, y) = 1.0;
      enclosed = enclosed || !walls.on(x, y);
    }
  if (!enclosed) throw OpenContourError(kGapTolerance);
  return region;
}

GrayImage outer_curve(const GrayImage& region) {
  GrayImage curve(region.width(), region.height());
  for (int y = 0; y < region.height(); ++y)
    for (int x = 0; x < region.width(); ++x) {
      if (!region.on(x, y)) continue;
      for (const Pixel& d : kNeighbors8) {
        const int nx = x + d.x;
        const int ny = y + d.y;
        if (!region.contains(nx, ny) || !region.on(nx, ny)) {
          curve.at(x, y) = 1.0;
          break;
        }
      }
    }
  return curve;
}

}  // namespace garment
