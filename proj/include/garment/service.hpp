#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "garment/config.hpp"
#include "garment/document.hpp"
#include "garment/raster.hpp"

namespace garment {

struct DesignOutput {
  RasterImage image;
  GrayImage shading;
  SynthResult synth;
};

/// synthesize -> render_shading -> enhance. Stage failures are rethrown with the stage
/// name prefixed; OpenContourError passes through unchanged.
DesignOutput full_pipeline(const DesignDocument& doc, const PipelineConfig& cfg);

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Stateless request handlers; every method is safe to call concurrently.
class Service {
 public:
  explicit Service(PipelineConfig cfg = {}) : cfg_(std::move(cfg)) {}

  Response synthesize(const nlohmann::json& request) const;
  Response extract(const nlohmann::json& request) const;
  Response expand_texture(const nlohmann::json& request) const;
  Response recolor(const nlohmann::json& request) const;
  Response health() const;

  /// Routes a raw request; malformed JSON bodies yield 400.
  Response handle(const std::string& method, const std::string& path, const std::string& body) const;

  /// Blocks serving /v1/* until the process is stopped.
  void serve(const std::string& host, int port) const;

  const PipelineConfig& config() const { return cfg_; }

 private:
  PipelineConfig cfg_;
};

}  // namespace garment
