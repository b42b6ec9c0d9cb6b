#include "garment/patchmatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "garment/parallel.hpp"

namespace garment {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based stream so every pixel draws the same numbers on any thread.
class PixelRng {
 public:
  PixelRng(std::uint64_t seed, std::uint64_t pixel) : state_(splitmix64(seed ^ splitmix64(pixel))) {}
  int uniform(int lo, int hi) {  // inclusive
    state_ = splitmix64(state_);
    return lo + static_cast<int>(state_ % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

NearestNeighborField empty_nnf(const RasterImage& target, const RasterImage& source, int p) {
  if (p < 1) throw std::invalid_argument("patchmatch: patch size must be >= 1");
  if (source.width() < p || source.height() < p) throw std::invalid_argument("patchmatch: source smaller than patch");
  if (target.width() < p || target.height() < p) throw std::invalid_argument("patchmatch: target smaller than patch");
  NearestNeighborField nnf;
  nnf.patch = p;
  nnf.width = target.width() - p + 1;
  nnf.height = target.height() - p + 1;
  const auto n = static_cast<std::size_t>(nnf.width) * nnf.height;
  nnf.sx.assign(n, 0);
  nnf.sy.assign(n, 0);
  nnf.dist.assign(n, 0.0);
  return nnf;
}

RasterImage tile_source(const RasterImage& source, int w, int h, bool jitter, std::uint64_t seed) {
  RasterImage out(w, h);
  const int sw = source.width();
  const int sh = source.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int ox = 0;
      int oy = 0;
      if (jitter) {
        const std::uint64_t tile = (static_cast<std::uint64_t>(y / sh) << 32) | static_cast<std::uint64_t>(x / sw);
        PixelRng rng(seed, tile);
        ox = rng.uniform(0, sw - 1);
        oy = rng.uniform(0, sh - 1);
      }
      out.set(x, y, source.pixel((x + ox) % sw, (y + oy) % sh));
    }
  return out;
}

NearestNeighborField upscale_nnf(const NearestNeighborField& coarse, const RasterImage& target,
                                 const RasterImage& source, double fx, double fy) {
  NearestNeighborField nnf = empty_nnf(target, source, coarse.patch);
  const int max_x = source.width() - coarse.patch;
  const int max_y = source.height() - coarse.patch;
  for (int y = 0; y < nnf.height; ++y)
    for (int x = 0; x < nnf.width; ++x) {
      const int cx = std::clamp(static_cast<int>(x / fx), 0, coarse.width - 1);
      const int cy = std::clamp(static_cast<int>(y / fy), 0, coarse.height - 1);
      const std::size_t ci = coarse.index(cx, cy);
      const std::size_t i = nnf.index(x, y);
      nnf.sx[i] = std::clamp(static_cast<int>(std::lround(coarse.sx[ci] * fx)) + (x - static_cast<int>(cx * fx)), 0, max_x);
      nnf.sy[i] = std::clamp(static_cast<int>(std::lround(coarse.sy[ci] * fy)) + (y - static_cast<int>(cy * fy)), 0, max_y);
    }
  refresh_distances(nnf, target, source);
  return nnf;
}

}  // namespace

double patch_ssd(const RasterImage& target, int tx, int ty, const RasterImage& source, int sx, int sy, int p,
                 double limit) {
  double s = 0.0;
  for (int dy = 0; dy < p; ++dy) {
    const double* a = &target.data()[(static_cast<std::size_t>(ty + dy) * target.width() + tx) * 3];
    const double* b = &source.data()[(static_cast<std::size_t>(sy + dy) * source.width() + sx) * 3];
    for (int k = 0; k < p * 3; ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    if (s > limit) return s;
  }
  return s;
}

NearestNeighborField random_nnf(const RasterImage& target, const RasterImage& source, int p, std::uint64_t seed) {
  NearestNeighborField nnf = empty_nnf(target, source, p);
  for (std::size_t i = 0; i < nnf.sx.size(); ++i) {
    PixelRng rng(seed, i);
    nnf.sx[i] = rng.uniform(0, source.width() - p);
    nnf.sy[i] = rng.uniform(0, source.height() - p);
  }
  refresh_distances(nnf, target, source);
  return nnf;
}

NearestNeighborField identity_nnf(const RasterImage& target, const RasterImage& source, int p) {
  NearestNeighborField nnf = empty_nnf(target, source, p);
  for (int y = 0; y < nnf.height; ++y)
    for (int x = 0; x < nnf.width; ++x) {
      nnf.sx[nnf.index(x, y)] = std::min(x, source.width() - p);
      nnf.sy[nnf.index(x, y)] = std::min(y, source.height() - p);
    }
  refresh_distances(nnf, target, source);
  return nnf;
}

void refresh_distances(NearestNeighborField& nnf, const RasterImage& target, const RasterImage& source) {
  parallel_for(0, nnf.height, [&](int y) {
    for (int x = 0; x < nnf.width; ++x) {
      const std::size_t i = nnf.index(x, y);
      nnf.dist[i] = patch_ssd(target, x, y, source, nnf.sx[i], nnf.sy[i], nnf.patch,
                              std::numeric_limits<double>::infinity());
    }
  });
}

void nnf_sweep(NearestNeighborField& nnf, const RasterImage& target, const RasterImage& source, std::uint64_t seed) {
  const int p = nnf.patch;
  const int max_x = source.width() - p;
  const int max_y = source.height() - p;

  auto try_candidate = [&](int x, int y, int cx, int cy, int& bx, int& by, double& bd) {
    cx = std::clamp(cx, 0, max_x);
    cy = std::clamp(cy, 0, max_y);
    if (cx == bx && cy == by) return;
    const double d = patch_ssd(target, x, y, source, cx, cy, p, bd);
    if (d < bd) {
      bd = d;
      bx = cx;
      by = cy;
    }
  };

  for (const int step : {8, 4, 2, 1}) {
    const NearestNeighborField frozen = nnf;
    parallel_for(0, nnf.height, [&](int y) {
      for (int x = 0; x < nnf.width; ++x) {
        const std::size_t i = nnf.index(x, y);
        int bx = frozen.sx[i];
        int by = frozen.sy[i];
        double bd = frozen.dist[i];
        const int dirs[4][2] = {{-step, 0}, {step, 0}, {0, -step}, {0, step}};
        for (const auto& d : dirs) {
          const int qx = x + d[0];
          const int qy = y + d[1];
          if (qx < 0 || qy < 0 || qx >= nnf.width || qy >= nnf.height) continue;
          const std::size_t q = frozen.index(qx, qy);
          try_candidate(x, y, frozen.sx[q] - d[0], frozen.sy[q] - d[1], bx, by, bd);
        }
        nnf.sx[i] = bx;
        nnf.sy[i] = by;
        nnf.dist[i] = bd;
      }
    });
  }

  parallel_for(0, nnf.height, [&](int y) {
    for (int x = 0; x < nnf.width; ++x) {
      const std::size_t i = nnf.index(x, y);
      PixelRng rng(seed, i);
      int bx = nnf.sx[i];
      int by = nnf.sy[i];
      double bd = nnf.dist[i];
      for (int r = std::max(source.width(), source.height()); r >= 1; r /= 2) {
        try_candidate(x, y, bx + rng.uniform(-r, r), by + rng.uniform(-r, r), bx, by, bd);
      }
      nnf.sx[i] = bx;
      nnf.sy[i] = by;
      nnf.dist[i] = bd;
    }
  });
}

double nnf_energy(const NearestNeighborField& nnf) {
  double e = 0.0;
  for (double d : nnf.dist) e += d;
  return e;
}

RasterImage vote(const NearestNeighborField& nnf, const RasterImage& source, int target_width, int target_height) {
  const int p = nnf.patch;
  if (target_width - p + 1 != nnf.width || target_height - p + 1 != nnf.height) {
    throw std::invalid_argument("vote: field does not match target size");
  }
  RasterImage out(target_width, target_height);
  parallel_for(0, target_height, [&](int y) {
    for (int x = 0; x < target_width; ++x) {
      double acc[3] = {0.0, 0.0, 0.0};
      int n = 0;
      for (int qy = std::max(0, y - p + 1); qy <= std::min(y, nnf.height - 1); ++qy)
        for (int qx = std::max(0, x - p + 1); qx <= std::min(x, nnf.width - 1); ++qx) {
          const std::size_t q = nnf.index(qx, qy);
          const int sx = nnf.sx[q] + (x - qx);
          const int sy = nnf.sy[q] + (y - qy);
          for (int c = 0; c < 3; ++c) acc[c] += source.at(sx, sy, c);
          ++n;
        }
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = acc[c] / n;
    }
  });
  return out;
}

RasterImage expand_texture(const RasterImage& patch, int out_w, int out_h, const PatchMatchConfig& cfg,
                           std::uint64_t seed) {
  ExpandTrace trace;
  return expand_texture(patch, out_w, out_h, cfg, seed, trace);
}

RasterImage expand_texture(const RasterImage& patch, int out_w, int out_h, const PatchMatchConfig& cfg,
                           std::uint64_t seed, ExpandTrace& trace) {
  const int p = cfg.patch_size;
  if (p < 1) throw std::invalid_argument("expand_texture: patch_size must be >= 1");
  if (patch.width() < p || patch.height() < p) {
    throw std::invalid_argument("expand_texture: patch is smaller than " + std::to_string(p) + "x" + std::to_string(p));
  }
  if (out_w < p || out_h < p) throw std::invalid_argument("expand_texture: output smaller than the patch size");
  if (cfg.em_iterations < 0 || cfg.scales < 1 || cfg.sweeps < 0 || cfg.final_sweeps < 0) {
    throw std::invalid_argument("expand_texture: invalid iteration counts");
  }
  trace = {};

  // Levels coarser than the finest, kept only while both images still hold a patch.
  int levels = 1;
  if (cfg.em_iterations > 0) {
    while (levels < cfg.scales) {
      const int f = 1 << levels;
      if (patch.width() / f < p || patch.height() / f < p || out_w / f < p || out_h / f < p) break;
      ++levels;
    }
  }

  RasterImage target(1, 1);
  NearestNeighborField nnf;
  std::uint64_t stream = splitmix64(seed);
  for (int level = levels - 1; level >= 0; --level) {
    const int f = 1 << level;
    const RasterImage source = level == 0 ? patch : resample(patch, patch.width() / f, patch.height() / f);
    const int tw = level == 0 ? out_w : out_w / f;
    const int th = level == 0 ? out_h : out_h / f;
    if (level == levels - 1) {
      target = tile_source(source, tw, th, !cfg.identity_init, stream);
      nnf = cfg.identity_init ? identity_nnf(target, source, p) : random_nnf(target, source, p, splitmix64(stream + 1));
    } else {
      const double fx = static_cast<double>(tw) / target.width();
      const double fy = static_cast<double>(th) / target.height();
      target = resample(target, tw, th);
      nnf = upscale_nnf(nnf, target, source, fx, fy);
    }
    for (int it = 0; it < cfg.em_iterations; ++it) {
      refresh_distances(nnf, target, source);
      std::vector<double> energies{nnf_energy(nnf)};
      for (int s = 0; s < cfg.sweeps; ++s) {
        stream = splitmix64(stream);
        nnf_sweep(nnf, target, source, stream);
        energies.push_back(nnf_energy(nnf));
      }
      trace.sweep_energies.push_back(std::move(energies));
      target = vote(nnf, source, tw, th);
    }
  }

  refresh_distances(nnf, target, patch);
  for (int s = 0; s < cfg.final_sweeps; ++s) {
    stream = splitmix64(stream);
    nnf_sweep(nnf, target, patch, stream);
  }
  trace.final_nnf = std::move(nnf);
  return target;
}

}  // namespace garment
