#pragma once

#include <cstdint>
#include <vector>

#include "garment/raster.hpp"

namespace garment {

/// For every p x p target patch (top-left (x, y)), the top-left of its source match and the SSD.
struct NearestNeighborField {
  int patch = 7;
  int width = 0;   ///< target patch positions along x: target width - patch + 1
  int height = 0;  ///< target patch positions along y
  std::vector<int> sx;
  std::vector<int> sy;
  std::vector<double> dist;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

struct PatchMatchConfig {
  int patch_size = 7;
  int em_iterations = 5;
  int scales = 3;
  /// Propagation + random-search passes per EM iteration.
  int sweeps = 2;
  /// Passes in the closing search on the final output.
  int final_sweeps = 4;
  /// Start from the source copied in place with an identity field instead of jittered tiles.
  bool identity_init = false;
};

/// SSD between the target patch at (tx, ty) and the source patch at (sx, sy). Stops early
/// and returns a value above `limit` once the partial sum exceeds it.
double patch_ssd(const RasterImage& target, int tx, int ty, const RasterImage& source, int sx, int sy, int p,
                 double limit);

NearestNeighborField random_nnf(const RasterImage& target, const RasterImage& source, int p, std::uint64_t seed);
/// Target position (x, y) maps to the source position clamped into range.
NearestNeighborField identity_nnf(const RasterImage& target, const RasterImage& source, int p);
/// Recomputes every cached distance against the given images.
void refresh_distances(NearestNeighborField& nnf, const RasterImage& target, const RasterImage& source);

/// One pass: jump-flood propagation (steps 8, 4, 2, 1 from a frozen copy) then random search
/// with radius halving from the source size. Per-pixel distances never increase.
void nnf_sweep(NearestNeighborField& nnf, const RasterImage& target, const RasterImage& source, std::uint64_t seed);

double nnf_energy(const NearestNeighborField& nnf);

/// Each target pixel becomes the uniform average of the source pixels that the covering
/// patches place on it.
RasterImage vote(const NearestNeighborField& nnf, const RasterImage& source, int target_width, int target_height);

struct ExpandTrace {
  /// NNF energies per EM iteration: the refreshed start value, then one entry per sweep.
  std::vector<std::vector<double>> sweep_energies;
  /// Field of the final output against the source after the closing search.
  NearestNeighborField final_nnf;
};

RasterImage expand_texture(const RasterImage& patch, int out_w, int out_h, const PatchMatchConfig& cfg,
                           std::uint64_t seed);
RasterImage expand_texture(const RasterImage& patch, int out_w, int out_h, const PatchMatchConfig& cfg,
                           std::uint64_t seed, ExpandTrace& trace);

}  // namespace garment
