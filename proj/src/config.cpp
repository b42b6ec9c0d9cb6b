#include "garment/config.hpp"

#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <toml.hpp>

#include "garment/document.hpp"
#include "garment/image_io.hpp"

namespace garment {

namespace {

using Setter = std::function<void(const toml::node&, const std::string&)>;

double as_double(const toml::node& n, const std::string& key) {
  if (const auto v = n.value<double>()) return *v;
  throw std::invalid_argument("config: " + key + " must be a number");
}

int as_int(const toml::node& n, const std::string& key) {
  if (const auto v = n.value<std::int64_t>()) return static_cast<int>(*v);
  throw std::invalid_argument("config: " + key + " must be an integer");
}

bool as_bool(const toml::node& n, const std::string& key) {
  if (const auto v = n.value<bool>()) return *v;
  throw std::invalid_argument("config: " + key + " must be a boolean");
}

Rgb as_color(const toml::node& n, const std::string& key) {
  const auto* arr = n.as_array();
  if (arr == nullptr || arr->size() != 3) throw std::invalid_argument("config: " + key + " must be [r, g, b]");
  Rgb c;
  for (int i = 0; i < 3; ++i) c[i] = as_double(*arr->get(static_cast<std::size_t>(i)), key);
  return c;
}

std::map<std::string, Setter> setters(PipelineConfig& c) {
  auto num = [](double& dst) { return [&dst](const toml::node& n, const std::string& k) { dst = as_double(n, k); }; };
  auto integer = [](int& dst) { return [&dst](const toml::node& n, const std::string& k) { dst = as_int(n, k); }; };
  auto flag = [](bool& dst) { return [&dst](const toml::node& n, const std::string& k) { dst = as_bool(n, k); }; };
  return {
      {"contour.blur_sigma", num(c.contour.blur_sigma)},
      {"contour.high_percentile", num(c.contour.high_percentile)},
      {"contour.low_ratio", num(c.contour.low_ratio)},
      {"contour.min_branch_len", integer(c.contour.min_branch_len)},
      {"contour.silhouette_thresh", num(c.contour.silhouette_thresh)},
      {"contour.border_uniformity", num(c.contour.border_uniformity)},
      {"bicolor.canny_sigma", num(c.bicolor.canny.sigma)},
      {"bicolor.canny_low", num(c.bicolor.canny.low)},
      {"bicolor.canny_high", num(c.bicolor.canny.high)},
      {"bicolor.outer_band", integer(c.bicolor.outer_band)},
      {"bicolor.corner_angle_deg", num(c.bicolor.corner_angle_deg)},
      {"bicolor.corner_window", integer(c.bicolor.corner_window)},
      {"bicolor.sample_offset", num(c.bicolor.sample_offset)},
      {"palette.dist_thresh", num(c.palette.dist_thresh)},
      {"palette.max_samples",
       [&c](const toml::node& n, const std::string& k) { c.palette.max_samples = static_cast<std::size_t>(as_int(n, k)); }},
      {"shading.a", num(c.shade.a)},
      {"shading.sigma", num(c.shade.sigma)},
      {"shading.s_min", num(c.shade.s_min)},
      {"patchmatch.patch_size", integer(c.patchmatch.patch_size)},
      {"patchmatch.em_iterations", integer(c.patchmatch.em_iterations)},
      {"patchmatch.scales", integer(c.patchmatch.scales)},
      {"patchmatch.sweeps", integer(c.patchmatch.sweeps)},
      {"patchmatch.final_sweeps", integer(c.patchmatch.final_sweeps)},
      {"synth.mode",
       [&c](const toml::node& n, const std::string& k) {
         const auto v = n.value<std::string>();
         if (!v) throw std::invalid_argument("config: " + k + " must be a string");
         c.synth.mode = synth_mode_from_string(*v);
       }},
      {"synth.tol", num(c.synth.tol)},
      {"synth.max_iterations", integer(c.synth.max_iterations)},
      {"synth.dense_rim", integer(c.synth.dense_rim)},
      {"synth.default_color", [&c](const toml::node& n, const std::string& k) { c.synth.default_color = as_color(n, k); }},
      {"synth.background", [&c](const toml::node& n, const std::string& k) { c.synth.background = as_color(n, k); }},
      {"pipeline.min_pure_fraction", num(c.min_pure_fraction)},
      {"pipeline.val_fraction", num(c.val_fraction)},
      {"pipeline.ablation", flag(c.ablation)},
      {"pipeline.manifest_timestamp", flag(c.manifest_timestamp)},
      {"pipeline.seed",
       [&c](const toml::node& n, const std::string& k) { c.seed = static_cast<std::uint64_t>(as_int(n, k)); }},
  };
}

}  // namespace

PipelineConfig parse_config(const std::string& toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " at line " << e.source().begin.line;
    throw std::invalid_argument(msg.str());
  }
  PipelineConfig cfg;
  auto table = setters(cfg);
  for (const auto& [top, node] : root) {
    if (top.str() != "defaults") throw std::invalid_argument("config: unknown table [" + std::string(top.str()) + "]");
    const auto* defaults = node.as_table();
    if (defaults == nullptr) throw std::invalid_argument("config: [defaults] must be a table");
    for (const auto& [module, mnode] : *defaults) {
      const auto* mt = mnode.as_table();
      if (mt == nullptr) throw std::invalid_argument("config: defaults." + std::string(module.str()) + " must be a table");
      for (const auto& [key, value] : *mt) {
        const std::string full = std::string(module.str()) + "." + std::string(key.str());
        const auto it = table.find(full);
        if (it == table.end()) throw std::invalid_argument("config: unknown key defaults." + full);
        it->second(value, "defaults." + full);
      }
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

}  // namespace garment
