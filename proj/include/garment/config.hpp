#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "garment/bicolor.hpp"
#include "garment/contour.hpp"
#include "garment/palette.hpp"
#include "garment/patchmatch.hpp"
#include "garment/shading.hpp"
#include "garment/synthesizer.hpp"

namespace garment {

struct PipelineConfig {
  ContourConfig contour;
  BicolorConfig bicolor;
  PaletteConfig palette;
  ShadeConfig shade;
  PatchMatchConfig patchmatch;
  SynthConfig synth;
  /// Minimum share of garment pixels in the largest material for a shading pair.
  double min_pure_fraction = 0.5;
  /// Share of the corpus assigned to validation (400 of 4300).
  double val_fraction = 400.0 / 4300.0;
  /// Emit sparse color-point and texture-patch layers per sample.
  bool ablation = false;
  /// Add a generation timestamp to the manifest (breaks byte-stability between runs).
  bool manifest_timestamp = false;
  std::uint64_t seed = 0;
};

/// Reads `[defaults.<module>]` tables from a TOML file over the built-in defaults.
/// Unknown tables or keys raise std::invalid_argument naming the key.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& toml_text);

}  // namespace garment
