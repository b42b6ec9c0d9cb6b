#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "garment/bicolor.hpp"
#include "garment/config.hpp"
#include "garment/contour.hpp"
#include "garment/raster.hpp"

namespace garment {

/// Contour and texture edges of one photo, as loaded into the editor.
struct Representation {
  ContourMap contour;
  BiColoredEdgeSet edges;
  /// Garment interior; absent when the contour does not close.
  std::optional<GrayImage> region;
};

/// Simplified contour plus corner-free, silhouette-free bi-colored edges.
Representation extract_representation(const RasterImage& img, const PipelineConfig& cfg);

struct AblationLayers {
  /// Sparse color squares (1x1 to 9x9) sampled from the photo, with their coverage.
  RasterImage color_points;
  GrayImage color_points_coverage;
  /// Centered crop of 50x50 to 70x70 px.
  RasterImage patch;
};

struct TrainingSample {
  std::string id;
  RasterImage source{1, 1};
  ContourMap contour;
  BiColoredEdgeSet bicolor;
  std::optional<GrayImage> shading_edges;
  std::optional<GrayImage> shading;
  std::optional<AblationLayers> ablation;
  std::string source_hash;
  bool no_mask = false;
  double pure_fraction = 0.0;
};

/// Input is resampled to the canonical canvas first.
TrainingSample build_sample(const RasterImage& img, const PipelineConfig& cfg, const std::string& id = "sample");

/// Throws std::invalid_argument naming the first broken invariant.
void validate_sample(const TrainingSample& s);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64(const std::string& s);

struct CorpusReport {
  nlohmann::json manifest;
  int built = 0;
  int skipped_unchanged = 0;
  int failed = 0;
};

/// Builds <out>/<id>/... for every PNG/JPEG in `in` (sorted by name) and writes
/// <out>/manifest.json. Samples whose stored source hash matches are not rebuilt.
CorpusReport build_corpus(const std::filesystem::path& in, const std::filesystem::path& out, const PipelineConfig& cfg);

}  // namespace garment
