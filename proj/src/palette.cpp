#include "garment/palette.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace garment {

namespace {

using Color = std::array<double, 3>;

struct WeightedColor {
  Color c;
  std::size_t weight;
};

Color to_color(const Rgb& c) { return {c.r, c.g, c.b}; }
Rgb to_rgb(const Color& c) { return {c[0], c[1], c[2]}; }

double dist2(const Color& a, const Color& b) {
  const double d0 = a[0] - b[0];
  const double d1 = a[1] - b[1];
  const double d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

void require_mask(const RasterImage& img, const GrayImage& mask) {
  if (!img.same_size(mask)) throw std::invalid_argument("clustering: mask size differs from image");
  if (mask.count_on() == 0) throw std::invalid_argument("clustering: empty mask");
}

std::vector<WeightedColor> dedupe(std::vector<Color> colors) {
  std::sort(colors.begin(), colors.end());
  std::vector<WeightedColor> out;
  for (const Color& c : colors) {
    if (!out.empty() && out.back().c == c) {
      ++out.back().weight;
    } else {
      out.push_back({c, 1});
    }
  }
  return out;
}

/// Every stride-th masked pixel in raster order.
std::vector<Color> masked_colors(const RasterImage& img, const GrayImage& mask, std::size_t stride) {
  std::vector<Color> out;
  std::size_t i = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.on(x, y) && i++ % stride == 0) out.push_back(to_color(img.pixel(x, y)));
  return out;
}

std::size_t nearest(const Color& c, const std::vector<Color>& means) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < means.size(); ++i) {
    const double d = dist2(c, means[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

GrayImage label_by_nearest(const RasterImage& img, const GrayImage& mask, const std::vector<Color>& means) {
  GrayImage labels(img.width(), img.height(), -1.0);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.on(x, y)) labels.at(x, y) = static_cast<double>(nearest(to_color(img.pixel(x, y)), means));
  return labels;
}

/// Sorts clusters by descending count then lexicographic mean, drops empty ones and
/// rewrites the label map to match.
void canonicalize(ColorClusterStats& stats) {
  const std::size_t k = stats.clusters.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = stats.clusters[a];
    const auto& cb = stats.clusters[b];
    if (ca.count != cb.count) return ca.count > cb.count;
    return to_color(ca.mean) < to_color(cb.mean);
  });
  std::vector<int> remap(k, -1);
  std::vector<ColorCluster> sorted;
  for (std::size_t i = 0; i < k; ++i) {
    if (stats.clusters[order[i]].count == 0) continue;
    remap[order[i]] = static_cast<int>(sorted.size());
    sorted.push_back(stats.clusters[order[i]]);
  }
  for (double& v : stats.label_map.data())
    if (v >= 0) v = remap[static_cast<std::size_t>(v)];
  stats.clusters = std::move(sorted);
}

/// Condensed upper-triangular distance matrix for average-linkage merging.
class Condensed {
 public:
  explicit Condensed(std::size_t n) : n_(n), d_(n * (n - 1) / 2) {}
  float& operator()(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return d_[n_ * i - i * (i + 1) / 2 + (j - i - 1)];
  }

 private:
  std::size_t n_;
  std::vector<float> d_;
};

/// Average linkage via the nearest-neighbor chain; returns cluster id per input point.
std::vector<std::size_t> average_linkage_cut(const std::vector<WeightedColor>& pts, double thresh) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  if (n <= 1) return std::vector<std::size_t>(n, 0);

  Condensed d(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = static_cast<float>(std::sqrt(dist2(pts[i].c, pts[j].c)));

  std::vector<double> size(n);
  for (std::size_t i = 0; i < n; ++i) size[i] = static_cast<double>(pts[i].weight);
  std::vector<bool> active(n, true);
  std::vector<std::size_t> chain;
  std::size_t remaining = n;
  // Average linkage is reducible, so merges found out of order still form the same
  // monotone dendrogram; the cut keeps every merge at or below the threshold.
  while (remaining > 1) {
    if (chain.empty()) {
      chain.push_back(static_cast<std::size_t>(std::find(active.begin(), active.end(), true) - active.begin()));
    }
    const std::size_t a = chain.back();
    const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : n;
    std::size_t b = n;
    float best = std::numeric_limits<float>::infinity();
    if (prev != n) {
      b = prev;
      best = d(a, prev);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a) continue;
      const float dj = d(a, j);
      if (dj < best) {
        best = dj;
        b = j;
      }
    }
    if (b != prev) {
      chain.push_back(b);
      continue;
    }
    chain.pop_back();
    chain.pop_back();
    // Merge b into a.
    const std::size_t keep = std::min(a, b);
    const std::size_t gone = std::max(a, b);
    if (best <= thresh) parent[find(gone)] = find(keep);
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a || j == b) continue;
      const double v = (size[a] * d(a, j) + size[b] * d(b, j)) / (size[a] + size[b]);
      d(keep, j) = static_cast<float>(v);
    }
    size[keep] = size[a] + size[b];
    active[gone] = false;
    --remaining;
    std::erase(chain, gone);
  }
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = find(i);
  return out;
}

}  // namespace

ColorClusterStats cluster_stats(const RasterImage& img, const GrayImage& label_map, int k) {
  if (!img.same_size(label_map)) throw std::invalid_argument("cluster_stats: label map size differs from image");
  if (k < 1) throw std::invalid_argument("cluster_stats: k must be >= 1");
  ColorClusterStats stats;
  stats.label_map = label_map;
  stats.clusters.resize(static_cast<std::size_t>(k));
  std::vector<Color> sum(k, Color{});
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const int l = static_cast<int>(label_map.at(x, y));
      if (l < 0) continue;
      if (l >= k) throw std::invalid_argument("cluster_stats: label outside [0, k)");
      const Rgb c = img.pixel(x, y);
      for (int ch = 0; ch < 3; ++ch) sum[l][ch] += c[ch];
      ++stats.clusters[l].count;
    }
  for (int l = 0; l < k; ++l) {
    auto& cl = stats.clusters[l];
    if (cl.count > 0)
      for (int ch = 0; ch < 3; ++ch) cl.mean[ch] = sum[l][ch] / static_cast<double>(cl.count);
  }
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const int l = static_cast<int>(label_map.at(x, y));
      if (l < 0) continue;
      auto& cl = stats.clusters[l];
      const Rgb d = img.pixel(x, y) - cl.mean;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) cl.cov[i][j] += d[i] * d[j];
    }
  for (auto& cl : stats.clusters) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j)
        if (cl.count > 0) cl.cov[i][j] /= static_cast<double>(cl.count);
      cl.cov[i][i] += kCovarianceFloor;
    }
  }
  return stats;
}

ColorClusterStats hierarchical_clusters(const RasterImage& img, const GrayImage& mask, const PaletteConfig& cfg) {
  require_mask(img, mask);
  if (cfg.max_samples < 1) throw std::invalid_argument("hierarchical_clusters: max_samples must be >= 1");
  std::vector<WeightedColor> pts = dedupe(masked_colors(img, mask, 1));
  // Coarsen the sampling grid until the distinct colors fit the agglomeration budget.
  for (std::size_t stride = 2; pts.size() > cfg.max_samples; ++stride) pts = dedupe(masked_colors(img, mask, stride));

  const auto root = average_linkage_cut(pts, cfg.dist_thresh);
  std::map<std::size_t, std::pair<Color, double>> acc;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto& [s, w] = acc[root[i]];
    for (int ch = 0; ch < 3; ++ch) s[ch] += pts[i].c[ch] * static_cast<double>(pts[i].weight);
    w += static_cast<double>(pts[i].weight);
  }
  std::vector<Color> means;
  for (const auto& [r, sw] : acc) {
    means.push_back({sw.first[0] / sw.second, sw.first[1] / sw.second, sw.first[2] / sw.second});
  }
  ColorClusterStats stats = cluster_stats(img, label_by_nearest(img, mask, means), static_cast<int>(means.size()));
  canonicalize(stats);
  return stats;
}

ColorClusterStats kmeans_clusters(const RasterImage& img, const GrayImage& mask, int k, std::uint64_t seed) {
  require_mask(img, mask);
  if (k < 1) throw std::invalid_argument("kmeans_clusters: k must be >= 1");
  const std::vector<WeightedColor> pts = dedupe(masked_colors(img, mask, 1));
  bool reduced = false;
  if (static_cast<std::size_t>(k) > pts.size()) {
    k = static_cast<int>(pts.size());
    reduced = true;
  }
  const auto ks = static_cast<std::size_t>(k);

  std::mt19937_64 rng(seed);
  std::vector<Color> centers;
  {
    // k-means++: first center by weight, later ones by weight * D^2.
    std::vector<double> w(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) w[i] = static_cast<double>(pts[i].weight);
    std::discrete_distribution<std::size_t> first(w.begin(), w.end());
    centers.push_back(pts[first(rng)].c);
    std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
    while (centers.size() < ks) {
      double total = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        d2[i] = std::min(d2[i], dist2(pts[i].c, centers.back()));
        w[i] = d2[i] * static_cast<double>(pts[i].weight);
        total += w[i];
      }
      if (total <= 0.0) break;
      std::discrete_distribution<std::size_t> next(w.begin(), w.end());
      centers.push_back(pts[next(rng)].c);
    }
  }

  std::vector<std::size_t> assign(pts.size(), ks);
  std::vector<double> history;
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    double sse = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t a = nearest(pts[i].c, centers);
      changed = changed || a != assign[i];
      assign[i] = a;
      sse += dist2(pts[i].c, centers[a]) * static_cast<double>(pts[i].weight);
    }
    history.push_back(sse);
    if (!changed) break;
    std::vector<Color> sum(centers.size(), Color{});
    std::vector<double> wsum(centers.size(), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int ch = 0; ch < 3; ++ch) sum[assign[i]][ch] += pts[i].c[ch] * static_cast<double>(pts[i].weight);
      wsum[assign[i]] += static_cast<double>(pts[i].weight);
    }
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (wsum[c] > 0) centers[c] = {sum[c][0] / wsum[c], sum[c][1] / wsum[c], sum[c][2] / wsum[c]};
  }

  ColorClusterStats stats =
      cluster_stats(img, label_by_nearest(img, mask, centers), static_cast<int>(centers.size()));
  canonicalize(stats);
  stats.reduced_k = reduced || stats.clusters.size() < ks;
  stats.sse_history = std::move(history);
  return stats;
}

RasterImage recolor_clusters(const RasterImage& img, const ColorClusterStats& stats, const std::map<int, Rgb>& mapping) {
  if (!img.same_size(stats.label_map)) throw std::invalid_argument("recolor_clusters: stats do not match image size");
  for (const auto& [idx, color] : mapping) {
    if (idx < 0 || idx >= stats.k()) {
      throw std::invalid_argument("recolor_clusters: unknown cluster index " + std::to_string(idx));
    }
  }
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const auto it = mapping.find(stats.label(x, y));
      if (it == mapping.end()) continue;
      const Rgb shift = it->second - stats.clusters[static_cast<std::size_t>(it->first)].mean;
      out.set(x, y, clamp01(img.pixel(x, y) + shift));
    }
  return out;
}

BiColoredEdgeSet recolor_edges(const BiColoredEdgeSet& set, const Rgb& from, const Rgb& to, double tol,
                               std::size_t* replaced) {
  if (tol < 0.0) throw std::invalid_argument("recolor_edges: tolerance must be >= 0");
  BiColoredEdgeSet out = set;
  std::size_t n = 0;
  for (auto& e : out.edges) {
    for (auto* side : {&e.left, &e.right})
      for (Rgb& c : *side)
        if (distance(c, from) <= tol) {
          c = to;
          ++n;
        }
  }
  if (replaced != nullptr) *replaced = n;
  return out;
}

double within_cluster_sse(const RasterImage& img, const ColorClusterStats& stats) {
  double sse = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const int l = stats.label(x, y);
      if (l < 0) continue;
      sse += dist2(to_color(img.pixel(x, y)), to_color(stats.clusters[static_cast<std::size_t>(l)].mean));
    }
  return sse;
}

nlohmann::json to_json(const ColorClusterStats& stats) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : stats.clusters) {
    clusters.push_back({{"mean", {c.mean.r, c.mean.g, c.mean.b}}, {"cov", c.cov}, {"count", c.count}});
  }
  return {{"k", stats.k()}, {"clusters", std::move(clusters)}};
}

ColorClusterStats stats_from_json(const nlohmann::json& j) {
  ColorClusterStats stats;
  for (const auto& jc : j.at("clusters")) {
    ColorCluster c;
    const auto m = jc.at("mean").get<std::array<double, 3>>();
    c.mean = to_rgb(m);
    c.cov = jc.at("cov").get<Mat3>();
    c.count = jc.at("count").get<std::size_t>();
    stats.clusters.push_back(c);
  }
  if (j.at("k").get<int>() != stats.k()) throw std::invalid_argument("stats: k does not match cluster count");
  return stats;
}

}  // namespace garment
