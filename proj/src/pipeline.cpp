#include "garment/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cctype>
#include <ctime>
#include <random>
#include <stdexcept>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "garment/image_io.hpp"
#include "garment/palette.hpp"
#include "garment/shading.hpp"

namespace garment {

namespace fs = std::filesystem;

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Representation extract_representation(const RasterImage& input, const PipelineConfig& cfg) {
  const RasterImage img = resample(input, kCanonicalSize, kCanonicalSize);
  Representation rep;
  rep.contour = simplify_contour(extract_contour(img, cfg.contour), cfg.contour.min_branch_len);
  try {
    rep.region = outer_boundary(rep.contour);
  } catch (const OpenContourError&) {
    rep.region.reset();
  }
  const auto& b = cfg.bicolor;
  auto chains = detect_texture_edges(img, b.canny.low, b.canny.high, b.canny.sigma);
  chains = remove_outermost(chains, rep.contour, b.outer_band);
  chains = remove_near(chains, background_silhouette(img, cfg.contour), b.outer_band);
  chains = remove_corners(chains, b.corner_angle_deg, b.corner_window);
  rep.edges = sample_bicolor(img, chains, b.sample_offset);
  if (rep.region) rep.edges = drop_unseparated(rep.edges, *rep.region, rep.contour.mask);
  return rep;
}

namespace {

AblationLayers make_ablation(const RasterImage& img, const std::optional<GrayImage>& region, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int w = img.width();
  const int h = img.height();
  std::vector<Pixel> inside;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!region || region->on(x, y)) inside.push_back({x, y});

  AblationLayers out{RasterImage(w, h), GrayImage(w, h), RasterImage(1, 1)};
  const int count = std::uniform_int_distribution<int>(50, 100)(rng);
  std::uniform_int_distribution<std::size_t> pick(0, inside.size() - 1);
  std::uniform_int_distribution<int> side(1, 9);
  for (int i = 0; i < count && !inside.empty(); ++i) {
    const Pixel c = inside[pick(rng)];
    const int s = side(rng);
    const Rgb color = img.pixel(c.x, c.y);
    for (int y = c.y - s / 2; y < c.y - s / 2 + s; ++y)
      for (int x = c.x - s / 2; x < c.x - s / 2 + s; ++x) {
        if (!img.contains(x, y)) continue;
        out.color_points.set(x, y, color);
        out.color_points_coverage.at(x, y) = 1.0;
      }
  }

  double cx = w / 2.0;
  double cy = h / 2.0;
  if (region && !inside.empty()) {
    cx = cy = 0.0;
    for (const Pixel& p : inside) {
      cx += p.x;
      cy += p.y;
    }
    cx /= static_cast<double>(inside.size());
    cy /= static_cast<double>(inside.size());
  }
  const int s = std::min({std::uniform_int_distribution<int>(50, 70)(rng), w, h});
  const int x0 = std::clamp(static_cast<int>(std::lround(cx)) - s / 2, 0, w - s);
  const int y0 = std::clamp(static_cast<int>(std::lround(cy)) - s / 2, 0, h - s);
  out.patch = RasterImage(s, s);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) out.patch.set(x, y, img.pixel(x0 + x, y0 + y));
  return out;
}

}  // namespace

TrainingSample build_sample(const RasterImage& input, const PipelineConfig& cfg, const std::string& id) {
  TrainingSample s;
  s.id = id;
  s.source = resample(input, kCanonicalSize, kCanonicalSize);
  s.source_hash = sha256_hex(encode_png(input));
  Representation rep = extract_representation(s.source, cfg);
  s.contour = std::move(rep.contour);
  s.bicolor = std::move(rep.edges);
  s.no_mask = !rep.region.has_value();
  if (rep.region && rep.region->count_on() > 0) {
    const GrayImage& region = *rep.region;
    const ColorClusterStats clusters = hierarchical_clusters(s.source, region, cfg.palette);
    const GrayImage largest = largest_material_region(region, clusters);
    s.pure_fraction = static_cast<double>(largest.count_on()) / static_cast<double>(region.count_on());
    if (s.pure_fraction >= cfg.min_pure_fraction) {
      s.shading_edges = shading_edges_for_training(s.source, region, clusters, cfg.bicolor.canny);
      s.shading = decompose(s.source, region, clusters).shading;
    }
  }
  if (cfg.ablation) s.ablation = make_ablation(s.source, rep.region, cfg.seed ^ fnv1a64(id));
  return s;
}

void validate_sample(const TrainingSample& s) {
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("sample " + s.id + ": " + what);
  };
  auto binary = [](const GrayImage& m) {
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return v == 0.0 || v == 1.0; });
  };
  check(s.source.width() == kCanonicalSize && s.source.height() == kCanonicalSize, "source not at canonical size");
  check(s.source.all_finite(), "source has non-finite values");
  check(s.contour.mask.width() == kCanonicalSize && s.contour.mask.height() == kCanonicalSize,
        "contour not at canonical size");
  check(binary(s.contour.mask), "contour not binary");
  check(s.bicolor.width == kCanonicalSize && s.bicolor.height == kCanonicalSize, "edge canvas not canonical");
  try {
    validate(s.bicolor);
  } catch (const std::invalid_argument& e) {
    check(false, e.what());
  }
  check(s.shading.has_value() == s.shading_edges.has_value(), "shading pair incomplete");
  if (s.shading) {
    check(!s.no_mask, "shading present without a garment mask");
    check(s.shading->width() == kCanonicalSize && s.shading->height() == kCanonicalSize, "shading not canonical");
    check(s.shading->all_finite(), "shading has non-finite values");
    check(std::all_of(s.shading->data().begin(), s.shading->data().end(), [](double v) { return v >= 0.0; }),
          "shading has negative values");
    check(binary(*s.shading_edges), "shading edges not binary");
  }
}

namespace {

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::string sanitize(const std::string& stem) {
  std::string id;
  for (unsigned char c : stem) id.push_back(std::isalnum(c) || c == '-' || c == '_' ? static_cast<char>(c) : '_');
  return id.empty() ? "_" : id;
}

nlohmann::json sample_meta(const TrainingSample& s, const std::string& file) {
  return {{"id", s.id},
          {"file", file},
          {"source_hash", s.source_hash},
          {"no_mask", s.no_mask},
          {"has_shading", s.shading.has_value()},
          {"pure_fraction", s.pure_fraction},
          {"edges", s.bicolor.edges.size()},
          {"edge_points", s.bicolor.sample_count()},
          {"ablation", s.ablation.has_value()}};
}

void write_sample(const TrainingSample& s, const fs::path& dir, const std::string& file) {
  fs::create_directories(dir);
  write_file(dir / "source.png", encode_png(s.source));
  write_file(dir / "contour.png", encode_png_mask(s.contour.mask));
  write_text(dir / "bicolor.json", to_json(s.bicolor).dump());
  const BicolorRaster raster = rasterize_bicolor(s.bicolor);
  write_file(dir / "bicolor.png", encode_png(raster.color));
  write_file(dir / "bicolor_coverage.png", encode_png_mask(raster.coverage));
  for (const char* stale : {"shading_edges.png", "shading.u16.png", "color_points.png", "color_points_coverage.png",
                            "patch.png"}) {
    fs::remove(dir / stale);
  }
  if (s.shading) {
    write_file(dir / "shading_edges.png", encode_png_mask(*s.shading_edges));
    write_file(dir / "shading.u16.png", encode_png_shading(*s.shading));
  }
  if (s.ablation) {
    write_file(dir / "color_points.png", encode_png(s.ablation->color_points));
    write_file(dir / "color_points_coverage.png", encode_png_mask(s.ablation->color_points_coverage));
    write_file(dir / "patch.png", encode_png(s.ablation->patch));
  }
  // meta.json goes last: its presence marks a complete sample for incremental reruns.
  write_text(dir / "meta.json", sample_meta(s, file).dump(2) + "\n");
}

}  // namespace

CorpusReport build_corpus(const fs::path& in, const fs::path& out, const PipelineConfig& cfg) {
  if (!fs::is_directory(in)) throw std::invalid_argument("build_corpus: not a directory: " + in.string());
  if (cfg.val_fraction < 0.0 || cfg.val_fraction > 1.0) throw std::invalid_argument("build_corpus: val_fraction outside [0,1]");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in))
    if (entry.is_regular_file() && is_image(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  fs::create_directories(out);

  CorpusReport report;
  std::vector<nlohmann::json> samples;
  nlohmann::json failures = nlohmann::json::array();
  for (const fs::path& file : files) {
    const std::string name = file.filename().string();
    const std::string id = sanitize(file.stem().string());
    const fs::path dir = out / id;
    try {
      const Bytes bytes = read_file(file);
      const std::string hash = sha256_hex(bytes);
      const fs::path meta_path = dir / "meta.json";
      if (fs::exists(meta_path)) {
        const Bytes meta_bytes = read_file(meta_path);
        const auto meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end(), nullptr, false);
        if (!meta.is_discarded() && meta.value("source_hash", "") == hash && meta.value("ablation", false) == cfg.ablation) {
          samples.push_back(meta);
          ++report.skipped_unchanged;
          continue;
        }
      }
      TrainingSample s = build_sample(decode_image(bytes), cfg, id);
      s.source_hash = hash;
      validate_sample(s);
      write_sample(s, dir, name);
      samples.push_back(sample_meta(s, name));
      ++report.built;
    } catch (const std::exception& e) {
      spdlog::warn("dataset: {} failed: {}", name, e.what());
      failures.push_back({{"file", name}, {"error", e.what()}});
      ++report.failed;
    }
  }

  // Validation membership follows a stable hash order of file names, not a random draw.
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fnv1a64(samples[a]["file"].get<std::string>()) < fnv1a64(samples[b]["file"].get<std::string>());
  });
  const auto val_count = static_cast<std::size_t>(std::lround(cfg.val_fraction * static_cast<double>(samples.size())));
  std::vector<std::string> split(samples.size(), "train");
  for (std::size_t i = 0; i < val_count && i < order.size(); ++i) split[order[i]] = "val";

  nlohmann::json list = nlohmann::json::array();
  int with_shading = 0;
  int no_mask = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    nlohmann::json entry = samples[i];
    entry["split"] = split[i];
    with_shading += entry.value("has_shading", false) ? 1 : 0;
    no_mask += entry.value("no_mask", false) ? 1 : 0;
    list.push_back(std::move(entry));
  }
  nlohmann::json manifest = {
      {"version", 1},
      {"canvas", {{"w", kCanonicalSize}, {"h", kCanonicalSize}}},
      {"counts",
       {{"images", files.size()},
        {"samples", samples.size()},
        {"train", samples.size() - std::min(val_count, samples.size())},
        {"val", std::min(val_count, samples.size())},
        {"with_shading", with_shading},
        {"no_mask", no_mask},
        {"failed", failures.size()}}},
      {"min_pure_fraction", cfg.min_pure_fraction},
      {"val_fraction", cfg.val_fraction},
      {"samples", std::move(list)},
      {"failures", std::move(failures)},
  };
  if (cfg.manifest_timestamp) manifest["generated_at"] = static_cast<std::int64_t>(std::time(nullptr));
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  report.manifest = std::move(manifest);
  return report;
}

}  // namespace garment
