#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "garment/bicolor.hpp"
#include "garment/contour.hpp"
#include "garment/image_io.hpp"
#include "garment/raster.hpp"
#include "garment/synthesizer.hpp"

namespace garment {

/// Malformed request or document; `path` names the offending field ("texture_layer.edges[2]").
class SchemaError : public std::invalid_argument {
 public:
  SchemaError(std::string path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// A referenced color or cluster does not exist.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws std::invalid_argument on malformed input.
Bytes base64_decode(const std::string& text);

enum class TextureMode { pure, sparse, dense };

/// Square block of one color, used by pure-color mode.
struct ColorPoint {
  int x = 0;
  int y = 0;
  Rgb color;
  int size = 1;
};

struct DesignDocument {
  int width = kCanonicalSize;
  int height = kCanonicalSize;
  TextureMode mode = TextureMode::sparse;
  ContourMap contour{GrayImage(kCanonicalSize, kCanonicalSize), ContourProvenance::user_drawn};
  BiColoredEdgeSet texture;
  GrayImage shading{kCanonicalSize, kCanonicalSize};
  std::vector<ColorPoint> color_points;
  std::optional<RasterImage> dense_patch;
  std::vector<Rgb> palette;
  std::uint64_t seed = 0;
  SynthMode synth_mode = SynthMode::harmonic;
};

/// Validates and parses; throws SchemaError with the failing field path.
DesignDocument parse_document(const nlohmann::json& j);
/// Layers are written as base64 PNG; palette as 8-bit triples.
nlohmann::json to_json(const DesignDocument& doc);

/// Texture edges and color points drawn into one constraint raster.
RepresentationStack representation_of(const DesignDocument& doc);

/// Distinct 8-bit colors of the texture layer and color points, in first-seen order.
std::vector<Rgb> document_palette(const DesignDocument& doc);

const char* to_string(TextureMode m);
const char* to_string(SynthMode m);
SynthMode synth_mode_from_string(const std::string& s);

Rgb color_from_u8(const nlohmann::json& j, const std::string& path);
nlohmann::json color_to_u8(const Rgb& c);

}  // namespace garment
