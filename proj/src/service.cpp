#include "garment/service.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "garment/image_io.hpp"
#include "garment/palette.hpp"
#include "garment/patchmatch.hpp"
#include "garment/pipeline.hpp"
#include "garment/shading.hpp"
#include "garment/synthesizer.hpp"

namespace garment {

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const OpenContourError&) {
    throw;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + ": " + e.what());
  }
}

Response error(int status, const std::string& message, const std::string& path = "") {
  nlohmann::json body = {{"error", message}};
  if (!path.empty()) body["path"] = path;
  return {status, std::move(body)};
}

nlohmann::json png_field(const Bytes& png) { return {{"png", base64_encode(png)}}; }

RasterImage decode_field(const nlohmann::json& request, const std::string& key) {
  const auto it = request.find(key);
  if (it == request.end()) throw SchemaError(key, "missing required field");
  std::string text;
  if (it->is_string()) {
    text = it->get<std::string>();
  } else if (it->is_object() && it->contains("png") && (*it)["png"].is_string()) {
    text = (*it)["png"].get<std::string>();
  } else {
    throw SchemaError(key, "expected a base64 string or {\"png\": base64}");
  }
  Bytes bytes;
  try {
    bytes = base64_decode(text);
  } catch (const std::invalid_argument& e) {
    throw ImageDecodeError(key + ": " + e.what());
  }
  return decode_image(bytes);
}

int int_field(const nlohmann::json& j, const std::string& key, int lo, int hi, std::optional<int> fallback = {}) {
  const auto it = j.find(key);
  if (it == j.end()) {
    if (fallback) return *fallback;
    throw SchemaError(key, "missing required field");
  }
  if (!it->is_number_integer()) throw SchemaError(key, "expected an integer");
  const auto v = it->get<long long>();
  if (v < lo || v > hi) throw SchemaError(key, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

std::uint64_t seed_field(const nlohmann::json& j, std::uint64_t fallback) {
  const auto it = j.find("seed");
  if (it == j.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0) throw SchemaError("seed", "expected a non-negative integer");
  return it->get<std::uint64_t>();
}

double number_field(const nlohmann::json& j, const std::string& key, double fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number() || it->get<double>() < 0.0) throw SchemaError(key, "expected a non-negative number");
  return it->get<double>();
}

/// Edges of an unconstrained texture image (no garment outline to strip).
BiColoredEdgeSet texture_edges(const RasterImage& img, const BicolorConfig& b) {
  auto chains = detect_texture_edges(img, b.canny.low, b.canny.high, b.canny.sigma);
  chains = remove_corners(chains, b.corner_angle_deg, b.corner_window);
  return sample_bicolor(img, chains, b.sample_offset);
}

struct ColorMapping {
  std::optional<Rgb> from;
  std::optional<int> cluster;
  Rgb to;
};

std::vector<ColorMapping> parse_mapping(const nlohmann::json& request) {
  const auto it = request.find("mapping");
  if (it == request.end()) throw SchemaError("mapping", "missing required field");
  if (!it->is_array()) throw SchemaError("mapping", "expected an array");
  std::vector<ColorMapping> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string p = "mapping[" + std::to_string(i) + "]";
    const auto& m = (*it)[i];
    if (!m.is_object()) throw SchemaError(p, "expected an object");
    ColorMapping cm;
    if (!m.contains("to")) throw SchemaError(p + ".to", "missing required field");
    cm.to = color_from_u8(m["to"], p + ".to");
    if (m.contains("from")) cm.from = color_from_u8(m["from"], p + ".from");
    if (m.contains("cluster")) {
      if (!m["cluster"].is_number_integer()) throw SchemaError(p + ".cluster", "expected an integer");
      cm.cluster = m["cluster"].get<int>();
    }
    if (cm.from.has_value() == cm.cluster.has_value()) throw SchemaError(p, "give exactly one of 'from' or 'cluster'");
    out.push_back(cm);
  }
  return out;
}

/// Cluster index per mapping entry: explicit, or the nearest mean within tol of `from`.
std::map<int, Rgb> resolve_clusters(const ColorClusterStats& stats, const std::vector<ColorMapping>& mapping,
                                    double tol) {
  std::map<int, Rgb> out;
  for (const auto& m : mapping) {
    int idx = -1;
    if (m.cluster) {
      idx = *m.cluster;
    } else {
      double best = tol;
      for (int k = 0; k < stats.k(); ++k) {
        const double d = distance(stats.clusters[static_cast<std::size_t>(k)].mean, *m.from);
        if (d <= best) {
          best = d;
          idx = k;
        }
      }
      if (idx < 0) {
        throw NotFoundError("no color cluster within tolerance of [" + color_to_u8(*m.from).dump() + "]");
      }
    }
    if (idx < 0 || idx >= stats.k()) throw NotFoundError("unknown cluster index " + std::to_string(idx));
    out[idx] = m.to;
  }
  return out;
}

}  // namespace

DesignOutput full_pipeline(const DesignDocument& doc, const PipelineConfig& cfg) {
  const RepresentationStack rep = stage("representation", [&] { return representation_of(doc); });
  SynthConfig sc = cfg.synth;
  sc.mode = doc.synth_mode;
  SynthResult synth = stage("synthesize", [&] {
    if (doc.mode != TextureMode::dense) return synthesize(rep, sc);
    const GrayImage region = outer_boundary(doc.contour);
    int x0 = region.width(), y0 = region.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < region.height(); ++y)
      for (int x = 0; x < region.width(); ++x)
        if (region.on(x, y)) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
    const int p = cfg.patchmatch.patch_size;
    const RasterImage texture =
        expand_texture(*doc.dense_patch, std::max(p, x1 - x0 + 1), std::max(p, y1 - y0 + 1), cfg.patchmatch, doc.seed);
    return synthesize_dense(rep, texture, sc);
  });
  GrayImage shading = stage("shade", [&] { return render_shading(doc.contour, doc.shading, cfg.shade); });
  RasterImage image = stage("enhance", [&] { return enhance(synth.image, shading); });
  return {std::move(image), std::move(shading), std::move(synth)};
}

Response Service::health() const { return {200, {{"status", "ok"}}}; }

Response Service::synthesize(const nlohmann::json& request) const {
  try {
    const DesignDocument doc = parse_document(request);
    const DesignOutput out = full_pipeline(doc, cfg_);
    nlohmann::json body = {{"image", base64_encode(encode_png(out.image))},
                           {"shading", base64_encode(encode_png_shading(out.shading))},
                           {"warnings", out.synth.warnings},
                           {"solver", {{"iterations", out.synth.iterations}, {"max_residual", out.synth.max_residual}}}};
    return {200, std::move(body)};
  } catch (const SchemaError& e) {
    return error(400, e.what(), e.path());
  } catch (const OpenContourError& e) {
    return error(422, e.what(), "contour_layer");
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
}

Response Service::extract(const nlohmann::json& request) const {
  try {
    const RasterImage img = decode_field(request, "image");
    const Representation rep = extract_representation(img, cfg_);
    const BicolorRaster raster = rasterize_bicolor(rep.edges);
    nlohmann::json palette = nlohmann::json::array();
    DesignDocument probe;
    probe.texture = rep.edges;
    for (const Rgb& c : document_palette(probe)) palette.push_back(color_to_u8(c));
    nlohmann::json body = {{"canvas", {{"w", kCanonicalSize}, {"h", kCanonicalSize}}},
                           {"contour_layer", png_field(encode_png_mask(rep.contour.mask))},
                           {"texture_layer", to_json(rep.edges)},
                           {"bicolor", png_field(encode_png(raster.color))},
                           {"coverage", png_field(encode_png_mask(raster.coverage))},
                           {"closed", rep.region.has_value()},
                           {"palette", std::move(palette)}};
    return {200, std::move(body)};
  } catch (const SchemaError& e) {
    return error(400, e.what(), e.path());
  } catch (const ImageDecodeError& e) {
    return error(415, e.what(), "image");
  }
}

Response Service::expand_texture(const nlohmann::json& request) const {
  try {
    const RasterImage patch = decode_field(request, "patch");
    const int p = cfg_.patchmatch.patch_size;
    const int w = int_field(request, "w", p, 2048);
    const int h = int_field(request, "h", p, 2048);
    const std::uint64_t seed = seed_field(request, cfg_.seed);
    if (patch.width() < p || patch.height() < p) {
      throw SchemaError("patch", "smaller than the " + std::to_string(p) + "x" + std::to_string(p) + " patch size");
    }
    const RasterImage out = garment::expand_texture(patch, w, h, cfg_.patchmatch, seed);
    return {200, {{"image", base64_encode(encode_png(out))}, {"edges", to_json(texture_edges(out, cfg_.bicolor))}}};
  } catch (const SchemaError& e) {
    return error(400, e.what(), e.path());
  } catch (const ImageDecodeError& e) {
    return error(415, e.what(), "patch");
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
}

Response Service::recolor(const nlohmann::json& request) const {
  try {
    if (!request.is_object()) throw SchemaError("$", "expected an object");
    const auto mapping = parse_mapping(request);
    if (request.contains("document")) {
      DesignDocument doc = parse_document(request["document"]);
      if (doc.mode == TextureMode::dense) {
        const int k = int_field(request, "k", 1, 64, 2);
        const double tol = number_field(request, "tol", 0.1);
        const GrayImage all(doc.dense_patch->width(), doc.dense_patch->height(), 1.0);
        const ColorClusterStats stats = kmeans_clusters(*doc.dense_patch, all, k, doc.seed);
        doc.dense_patch = recolor_clusters(*doc.dense_patch, stats, resolve_clusters(stats, mapping, tol));
      } else {
        const double tol = number_field(request, "tol", 0.5 / 255.0);
        for (const auto& m : mapping) {
          if (!m.from) throw SchemaError("mapping", "document recoloring maps colors: use 'from'");
          std::size_t replaced = 0;
          doc.texture = recolor_edges(doc.texture, *m.from, m.to, tol, &replaced);
          for (auto& cp : doc.color_points)
            if (distance(cp.color, *m.from) <= tol) {
              cp.color = m.to;
              ++replaced;
            }
          if (replaced == 0) throw NotFoundError("color [" + color_to_u8(*m.from).dump() + "] is not used in the document");
        }
      }
      doc.palette = document_palette(doc);
      return {200, {{"document", to_json(doc)}}};
    }
    const RasterImage img = decode_field(request, "image");
    const int k = int_field(request, "k", 1, 64, 2);
    const double tol = number_field(request, "tol", 0.1);
    const GrayImage all(img.width(), img.height(), 1.0);
    const ColorClusterStats stats = kmeans_clusters(img, all, k, seed_field(request, cfg_.seed));
    const RasterImage out = recolor_clusters(img, stats, resolve_clusters(stats, mapping, tol));
    return {200, {{"image", base64_encode(encode_png(out))}, {"stats", to_json(stats)}}};
  } catch (const SchemaError& e) {
    return error(400, e.what(), e.path());
  } catch (const NotFoundError& e) {
    return error(404, e.what());
  } catch (const ImageDecodeError& e) {
    return error(415, e.what(), "image");
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) const {
  if (method == "GET" && path == "/v1/health") return health();
  using Handler = Response (Service::*)(const nlohmann::json&) const;
  static const std::map<std::string, Handler> routes = {
      {"/v1/synthesize", &Service::synthesize},
      {"/v1/extract", &Service::extract},
      {"/v1/expand-texture", &Service::expand_texture},
      {"/v1/recolor", &Service::recolor},
  };
  const auto it = routes.find(path);
  if (it == routes.end()) return error(404, "no such endpoint: " + path);
  if (method != "POST") return error(405, "use POST for " + path);
  auto json = nlohmann::json::parse(body, nullptr, false);
  if (json.is_discarded()) {
    // /v1/extract also takes the raw image file as the body.
    if (path != "/v1/extract") return error(400, "request body is not valid JSON", "$");
    json = {{"image", base64_encode({reinterpret_cast<const std::uint8_t*>(body.data()), body.size()})}};
  }
  try {
    return (this->*(it->second))(json);
  } catch (const std::exception& e) {
    spdlog::error("{} failed: {}", path, e.what());
    return error(500, e.what());
  }
}

void Service::serve(const std::string& host, int port) const {
  httplib::Server server;
  auto bind = [&](const std::string& method, const std::string& path) {
    auto fn = [this, method, path](const httplib::Request& req, httplib::Response& res) {
      const Response r = handle(method, path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    if (method == "GET") {
      server.Get(path, fn);
    } else {
      server.Post(path, fn);
    }
  };
  bind("GET", "/v1/health");
  for (const char* p : {"/v1/synthesize", "/v1/extract", "/v1/expand-texture", "/v1/recolor"}) bind("POST", p);
  server.set_payload_max_length(32u << 20);
  spdlog::info("listening on {}:{}", host, port);
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace garment
