// Command-line front end: every subcommand goes through the same handlers as the HTTP service.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "garment/config.hpp"
#include "garment/document.hpp"
#include "garment/image_io.hpp"
#include "garment/losses.hpp"
#include "garment/parallel.hpp"
#include "garment/pipeline.hpp"
#include "garment/service.hpp"
#include "garment/shading.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int exit_code(int status) {
  switch (status) {
    case 200: return 0;
    case 400: return 2;
    case 404: return 3;
    case 415: return 4;
    case 422: return 5;
    default: return 1;
  }
}

/// Reports a non-200 response on stderr and returns the process exit code.
int check(const garment::Response& r) {
  if (r.status != 200) std::cerr << json{{"status", r.status}, {"error", r.body}}.dump() << "\n";
  return exit_code(r.status);
}

json read_json(const fs::path& p) {
  const auto bytes = garment::read_file(p);
  return json::parse(bytes.begin(), bytes.end());
}

std::string file_b64(const fs::path& p) { return garment::base64_encode(garment::read_file(p)); }

void write_b64(const fs::path& p, const json& field) {
  garment::write_file(p, garment::base64_decode(field.get<std::string>()));
}

json hex_color(const std::string& s) {
  std::string h = s.starts_with('#') ? s.substr(1) : s;
  if (h.size() != 6) throw CLI::ValidationError("color", "expected #rrggbb, got " + s);
  json c = json::array();
  for (int i = 0; i < 3; ++i) c.push_back(std::stoi(h.substr(static_cast<std::size_t>(2 * i), 2), nullptr, 16));
  return c;
}

/// "#rrggbb=#rrggbb" maps a color; "N=#rrggbb" maps cluster N.
json parse_map(const std::vector<std::string>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--map", "expected FROM=TO, got " + e);
    const std::string from = e.substr(0, eq);
    json m = {{"to", hex_color(e.substr(eq + 1))}};
    if (from.starts_with('#')) {
      m["from"] = hex_color(from);
    } else {
      m["cluster"] = std::stoi(from);
    }
    out.push_back(std::move(m));
  }
  return out;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("bicolor");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("BICOLOR_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Garment design toolkit built on bi-colored edges"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string config_path;
  int threads = 0;
  app.add_option("--seed", seed, "Seed for every randomized step");
  app.add_option("--config", config_path, "TOML file with [defaults.<module>] tables")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

  std::string in, out, doc_path, mode, patch, size, ref, cand, mask, contour, edges, image, enhanced, edges_out, host;
  std::string shading_out;
  std::vector<std::string> mapping;
  int k = 0, port = 8080;
  double tol = -1.0;
  bool ablation = false;

  auto* extract = app.add_subcommand("extract", "Contour and bi-colored edges of a garment photo");
  extract->add_option("image", in, "Photo (PNG or JPEG)")->required()->check(CLI::ExistingFile);
  extract->add_option("-o,--out", out, "Output JSON")->required();

  auto* synth = app.add_subcommand("synth", "Render a design document");
  synth->add_option("--doc", doc_path, "Design document JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--out", out, "Output PNG")->required();
  synth->add_option("--mode", mode, "Color fill")->check(CLI::IsMember({"harmonic", "voronoi"}));
  synth->add_option("--shading-out", shading_out, "Also write the 16-bit shading PNG");

  auto* shade = app.add_subcommand("shade", "Shading map from a contour and shading edges");
  shade->add_option("--contour", contour, "Contour mask PNG")->required()->check(CLI::ExistingFile);
  shade->add_option("--edges", edges, "Shading edge mask PNG")->required()->check(CLI::ExistingFile);
  shade->add_option("-o,--out", out, "16-bit shading PNG")->required();
  shade->add_option("--image", image, "Image to darken with the shading")->check(CLI::ExistingFile);
  shade->add_option("--enhanced", enhanced, "Output for --image times shading");

  auto* expand = app.add_subcommand("expand", "Enlarge a texture patch");
  expand->add_option("--patch", patch, "Texture patch PNG")->required()->check(CLI::ExistingFile);
  expand->add_option("--size", size, "WxH")->required();
  expand->add_option("-o,--out", out, "Output PNG")->required();
  expand->add_option("--edges", edges_out, "Also write the texture's bi-colored edges as JSON");

  auto* recolor = app.add_subcommand("recolor", "Swap colors in a document or image");
  auto* rdoc = recolor->add_option("--doc", doc_path, "Design document JSON")->check(CLI::ExistingFile);
  auto* rimg = recolor->add_option("--image", image, "Image PNG")->check(CLI::ExistingFile);
  rdoc->excludes(rimg);
  recolor->add_option("--map", mapping, "#rrggbb=#rrggbb or CLUSTER=#rrggbb")->required();
  recolor->add_option("--k", k, "Clusters for images and dense patches");
  recolor->add_option("--tol", tol, "Color match tolerance in [0,1] RGB distance");
  recolor->add_option("-o,--out", out, "Output JSON (document) or PNG (image)")->required();

  auto* metrics = app.add_subcommand("metrics", "Evaluation metrics");
  metrics->require_subcommand(1);
  auto* kl = metrics->add_subcommand("kl", "Color KL between a reference and a candidate");
  kl->add_option("--ref", ref)->required()->check(CLI::ExistingFile);
  kl->add_option("--cand", cand)->required()->check(CLI::ExistingFile);
  kl->add_option("--mask", mask)->required()->check(CLI::ExistingFile);
  kl->add_option("--k", k, "k-means clusters (0 = hierarchical)");

  auto* dataset = app.add_subcommand("dataset", "Training corpus tools");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "Build or refresh a corpus");
  build->add_option("--in", in, "Directory of garment photos")->required()->check(CLI::ExistingDirectory);
  build->add_option("--out", out, "Corpus directory")->required();
  build->add_flag("--ablation", ablation, "Emit color-point and patch layers");

  auto* serve = app.add_subcommand("serve", "HTTP service under /v1/");
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--host", host)->default_val("127.0.0.1");

  CLI11_PARSE(app, argc, argv);

  try {
    garment::PipelineConfig cfg = config_path.empty() ? garment::PipelineConfig{} : garment::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (ablation) cfg.ablation = true;
    garment::set_thread_count(threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency()));
    const garment::Service service(cfg);

    if (*extract) {
      const auto r = service.extract({{"image", file_b64(in)}});
      if (r.status == 200) garment::write_text(out, r.body.dump(2) + "\n");
      return check(r);
    }
    if (*synth) {
      json doc = read_json(doc_path);
      if (!mode.empty()) doc["synth_mode"] = mode;
      if (seed) doc["seed"] = *seed;
      const auto r = service.synthesize(doc);
      if (r.status == 200) {
        write_b64(out, r.body["image"]);
        if (!shading_out.empty()) write_b64(shading_out, r.body["shading"]);
        for (const auto& w : r.body["warnings"]) spdlog::warn("{}", w.get<std::string>());
      }
      return check(r);
    }
    if (*shade) {
      const garment::ContourMap cm{garment::load_mask(contour), garment::ContourProvenance::user_drawn};
      const garment::GrayImage s = garment::render_shading(cm, garment::load_mask(edges), cfg.shade);
      garment::write_file(out, garment::encode_png_shading(s));
      if (!image.empty()) {
        if (enhanced.empty()) throw CLI::ValidationError("--enhanced", "required with --image");
        garment::write_file(enhanced, garment::encode_png(garment::enhance(garment::load_image(image), s)));
      }
      return 0;
    }
    if (*expand) {
      const auto x = size.find('x');
      if (x == std::string::npos) throw CLI::ValidationError("--size", "expected WxH");
      const json req = {{"patch", file_b64(patch)},
                        {"w", std::stoi(size.substr(0, x))},
                        {"h", std::stoi(size.substr(x + 1))},
                        {"seed", cfg.seed}};
      const auto r = service.expand_texture(req);
      if (r.status == 200) {
        write_b64(out, r.body["image"]);
        if (!edges_out.empty()) garment::write_text(edges_out, r.body["edges"].dump(2) + "\n");
      }
      return check(r);
    }
    if (*recolor) {
      json req = {{"mapping", parse_map(mapping)}, {"seed", cfg.seed}};
      if (k > 0) req["k"] = k;
      if (tol >= 0.0) req["tol"] = tol;
      if (!doc_path.empty()) {
        req["document"] = read_json(doc_path);
      } else if (!image.empty()) {
        req["image"] = file_b64(image);
      } else {
        throw CLI::ValidationError("recolor", "give --doc or --image");
      }
      const auto r = service.recolor(req);
      if (r.status == 200) {
        if (r.body.contains("document")) {
          garment::write_text(out, r.body["document"].dump(2) + "\n");
        } else {
          write_b64(out, r.body["image"]);
        }
      }
      return check(r);
    }
    if (*kl) {
      const double v = garment::kl_color_metric(garment::load_image(ref), garment::load_image(cand),
                                                garment::load_mask(mask), k, cfg.seed);
      std::cout << json{{"kl", v}, {"k", k}}.dump() << "\n";
      return 0;
    }
    if (*build) {
      const auto report = garment::build_corpus(in, out, cfg);
      std::cout << json{{"built", report.built}, {"skipped_unchanged", report.skipped_unchanged},
                        {"failed", report.failed}}
                       .dump()
                << "\n";
      return report.failed == 0 ? 0 : 1;
    }
    if (*serve) {
      service.serve(host, port);
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
