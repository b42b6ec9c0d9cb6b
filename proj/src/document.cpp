#include "garment/document.hpp"

#include <algorithm>
#include <cmath>

#include <openssl/evp.h>

namespace garment {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(const std::string& text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text)
    if (c != '\n' && c != '\r' && c != ' ') clean.push_back(c);
  if (clean.size() % 4 != 0) throw std::invalid_argument("base64: length is not a multiple of 4");
  Bytes out(clean.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw std::invalid_argument("base64: invalid character");
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() >= 2 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

const char* to_string(TextureMode m) {
  switch (m) {
    case TextureMode::pure: return "pure";
    case TextureMode::sparse: return "sparse";
    case TextureMode::dense: return "dense";
  }
  return "sparse";
}

const char* to_string(SynthMode m) { return m == SynthMode::voronoi ? "voronoi" : "harmonic"; }

SynthMode synth_mode_from_string(const std::string& s) {
  if (s == "harmonic") return SynthMode::harmonic;
  if (s == "voronoi") return SynthMode::voronoi;
  throw std::invalid_argument("unknown synth mode '" + s + "' (expected harmonic or voronoi)");
}

Rgb color_from_u8(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(path, "expected [r,g,b]");
  Rgb c;
  for (int i = 0; i < 3; ++i) {
    const auto& v = j[static_cast<std::size_t>(i)];
    if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > 255) {
      throw SchemaError(path, "color components must be integers in 0..255");
    }
    c[i] = v.get<int>() / 255.0;
  }
  return c;
}

nlohmann::json color_to_u8(const Rgb& c) { return nlohmann::json::array({to_u8(c.r), to_u8(c.g), to_u8(c.b)}); }

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path.empty() ? "$" : path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path.empty() ? key : path + "." + key, "missing required field");
  return *it;
}

int require_int(const nlohmann::json& obj, const std::string& key, const std::string& path, int lo, int hi) {
  const auto& v = require(obj, key, path);
  const std::string p = path.empty() ? key : path + "." + key;
  if (!v.is_number_integer()) throw SchemaError(p, "expected an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > hi) throw SchemaError(p, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(x);
}

std::vector<Vec2> parse_polyline(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() < 2) throw SchemaError(path, "expected at least 2 [x,y] points");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw SchemaError(path + "[" + std::to_string(i) + "]", "expected [x,y]");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

/// {"png": base64} or {"strokes": [[[x,y],...], ...]} as a binary mask.
GrayImage parse_mask_layer(const nlohmann::json& j, const std::string& path, int w, int h) {
  if (!j.is_object()) throw SchemaError(path, "expected an object with 'png' or 'strokes'");
  GrayImage mask(w, h);
  if (const auto it = j.find("png"); it != j.end()) {
    if (!it->is_string()) throw SchemaError(path + ".png", "expected a base64 string");
    GrayImage decoded(1, 1);
    try {
      decoded = decode_gray(base64_decode(it->get<std::string>()));
    } catch (const std::exception& e) {
      throw SchemaError(path + ".png", e.what());
    }
    if (decoded.width() != w || decoded.height() != h) throw SchemaError(path + ".png", "size differs from canvas");
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) mask.at(x, y) = decoded.at(x, y) > 0.5 ? 1.0 : 0.0;
  }
  if (const auto it = j.find("strokes"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(path + ".strokes", "expected an array of polylines");
    for (std::size_t s = 0; s < it->size(); ++s) {
      const auto poly = parse_polyline((*it)[s], path + ".strokes[" + std::to_string(s) + "]");
      for (const Pixel& p : rasterize_polyline(poly))
        if (mask.contains(p.x, p.y)) mask.at(p.x, p.y) = 1.0;
    }
  }
  if (!j.contains("png") && !j.contains("strokes")) throw SchemaError(path, "expected 'png' or 'strokes'");
  return mask;
}

BiColoredEdgeSet parse_texture(const nlohmann::json& j, int w, int h) {
  const std::string path = "texture_layer";
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  BiColoredEdgeSet set;
  set.width = w;
  set.height = h;
  if (const auto it = j.find("canvas"); it != j.end()) {
    if (require_int(*it, "w", path + ".canvas", 1, 1 << 14) != w || require_int(*it, "h", path + ".canvas", 1, 1 << 14) != h) {
      throw SchemaError(path + ".canvas", "differs from the document canvas");
    }
  }
  if (const auto it = j.find("edges"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(path + ".edges", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string ep = path + ".edges[" + std::to_string(k) + "]";
      const auto& je = (*it)[k];
      nlohmann::json one = {{"canvas", {{"w", w}, {"h", h}}}, {"edges", nlohmann::json::array({je})}};
      try {
        auto parsed = edge_set_from_json(one);
        set.edges.push_back(std::move(parsed.edges.front()));
      } catch (const std::exception& e) {
        throw SchemaError(ep, e.what());
      }
    }
  }
  if (const auto it = j.find("strokes"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(path + ".strokes", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string sp = path + ".strokes[" + std::to_string(k) + "]";
      const auto& js = (*it)[k];
      const auto poly = parse_polyline(require(js, "points", sp), sp + ".points");
      BrushSpec brush;
      const auto& kind = require(js, "brush", sp);
      if (kind == "2-string") {
        brush.kind = BrushKind::two_string;
      } else if (kind == "4-string") {
        brush.kind = BrushKind::four_string;
      } else {
        throw SchemaError(sp + ".brush", "expected \"2-string\" or \"4-string\"");
      }
      const auto& colors = require(js, "colors", sp);
      if (!colors.is_array()) throw SchemaError(sp + ".colors", "expected an array of [r,g,b]");
      for (std::size_t c = 0; c < colors.size(); ++c) {
        brush.colors.push_back(color_from_u8(colors[c], sp + ".colors[" + std::to_string(c) + "]"));
      }
      if (const auto sit = js.find("spacing"); sit != js.end()) {
        if (!sit->is_number()) throw SchemaError(sp + ".spacing", "expected a number");
        brush.spacing = sit->get<double>();
      }
      try {
        auto stroke = brush_stroke(poly, brush, w, h);
        for (auto& e : stroke.edges) set.edges.push_back(std::move(e));
      } catch (const std::invalid_argument& e) {
        throw SchemaError(sp, e.what());
      }
    }
  }
  return set;
}

}  // namespace

DesignDocument parse_document(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("$", "document must be a JSON object");
  DesignDocument doc;
  const auto& canvas = require(j, "canvas", "");
  doc.width = require_int(canvas, "w", "canvas", 1, 4096);
  doc.height = require_int(canvas, "h", "canvas", 1, 4096);

  const auto& mode = require(j, "mode", "");
  if (mode == "pure") {
    doc.mode = TextureMode::pure;
  } else if (mode == "sparse") {
    doc.mode = TextureMode::sparse;
  } else if (mode == "dense") {
    doc.mode = TextureMode::dense;
  } else {
    throw SchemaError("mode", "expected \"pure\", \"sparse\" or \"dense\"");
  }

  doc.contour = ContourMap{parse_mask_layer(require(j, "contour_layer", ""), "contour_layer", doc.width, doc.height),
                           ContourProvenance::user_drawn};
  doc.texture = parse_texture(require(j, "texture_layer", ""), doc.width, doc.height);
  doc.shading = GrayImage(doc.width, doc.height);
  if (const auto it = j.find("shading_layer"); it != j.end() && !it->is_null()) {
    doc.shading = parse_mask_layer(*it, "shading_layer", doc.width, doc.height);
  }

  if (const auto it = j.find("color_points"); it != j.end()) {
    if (!it->is_array()) throw SchemaError("color_points", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "color_points[" + std::to_string(i) + "]";
      const auto& jp = (*it)[i];
      ColorPoint cp;
      cp.x = require_int(jp, "x", p, 0, doc.width - 1);
      cp.y = require_int(jp, "y", p, 0, doc.height - 1);
      cp.color = color_from_u8(require(jp, "color", p), p + ".color");
      cp.size = jp.contains("size") ? require_int(jp, "size", p, 1, 64) : 1;
      doc.color_points.push_back(cp);
    }
  }

  if (const auto it = j.find("dense_patch"); it != j.end() && !it->is_null()) {
    const auto& png = require(*it, "png", "dense_patch");
    if (!png.is_string()) throw SchemaError("dense_patch.png", "expected a base64 string");
    try {
      doc.dense_patch = decode_image(base64_decode(png.get<std::string>()));
    } catch (const std::exception& e) {
      throw SchemaError("dense_patch.png", e.what());
    }
  }
  if (doc.mode == TextureMode::dense && !doc.dense_patch) throw SchemaError("dense_patch", "required in dense mode");

  if (const auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      throw SchemaError("seed", "expected a non-negative integer");
    }
    doc.seed = it->get<std::uint64_t>();
  }
  if (const auto it = j.find("synth_mode"); it != j.end()) {
    try {
      doc.synth_mode = synth_mode_from_string(it->get<std::string>());
    } catch (const std::exception& e) {
      throw SchemaError("synth_mode", e.what());
    }
  }

  if (const auto it = j.find("palette"); it != j.end()) {
    if (!it->is_array()) throw SchemaError("palette", "expected an array of [r,g,b]");
    for (std::size_t i = 0; i < it->size(); ++i) {
      doc.palette.push_back(color_from_u8((*it)[i], "palette[" + std::to_string(i) + "]"));
    }
  } else {
    doc.palette = document_palette(doc);
  }
  return doc;
}

nlohmann::json to_json(const DesignDocument& doc) {
  nlohmann::json j;
  j["canvas"] = {{"w", doc.width}, {"h", doc.height}};
  j["mode"] = to_string(doc.mode);
  j["contour_layer"] = {{"png", base64_encode(encode_png_mask(doc.contour.mask))}};
  j["texture_layer"] = to_json(doc.texture);
  j["shading_layer"] = {{"png", base64_encode(encode_png_mask(doc.shading))}};
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : doc.color_points) {
    points.push_back({{"x", p.x}, {"y", p.y}, {"color", color_to_u8(p.color)}, {"size", p.size}});
  }
  j["color_points"] = std::move(points);
  if (doc.dense_patch) j["dense_patch"] = {{"png", base64_encode(encode_png(*doc.dense_patch))}};
  nlohmann::json palette = nlohmann::json::array();
  for (const auto& c : doc.palette) palette.push_back(color_to_u8(c));
  j["palette"] = std::move(palette);
  j["seed"] = doc.seed;
  j["synth_mode"] = to_string(doc.synth_mode);
  return j;
}

RepresentationStack representation_of(const DesignDocument& doc) {
  BicolorRaster raster = rasterize_bicolor(doc.texture);
  for (const auto& p : doc.color_points) {
    const int half = (p.size - 1) / 2;
    for (int y = p.y - half; y < p.y - half + p.size; ++y)
      for (int x = p.x - half; x < p.x - half + p.size; ++x) {
        if (!raster.color.contains(x, y)) continue;
        raster.color.set(x, y, p.color);
        raster.coverage.at(x, y) = 1.0;
      }
  }
  return RepresentationStack(doc.contour.mask, std::move(raster.color), std::move(raster.coverage));
}

std::vector<Rgb> document_palette(const DesignDocument& doc) {
  std::vector<Rgb> out;
  auto add = [&](const Rgb& c) {
    const Rgb q{to_u8(c.r) / 255.0, to_u8(c.g) / 255.0, to_u8(c.b) / 255.0};
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
  };
  for (const auto& c : palette_of(doc.texture)) add(c);
  for (const auto& p : doc.color_points) add(p.color);
  return out;
}

}  // namespace garment
