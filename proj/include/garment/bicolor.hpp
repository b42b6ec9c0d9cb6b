#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "garment/contour.hpp"
#include "garment/filters.hpp"
#include "garment/raster.hpp"

namespace garment {

/// Ordered 8-connected pixel path.
using PixelChain = std::vector<Pixel>;

/// A texture edge annotated at every point with the colors on both of its sides.
/// "Left" is the +normal side, where normal = tangent rotated +90 degrees in image
/// coordinates (y down): n = (-t.y, t.x).
struct BiColoredEdge {
  std::vector<Pixel> points;
  std::vector<Rgb> left;
  std::vector<Rgb> right;
  std::vector<Vec2> normals;
};

struct BiColoredEdgeSet {
  int width = 0;
  int height = 0;
  std::vector<BiColoredEdge> edges;
  /// Chains dropped for having fewer than two points.
  int skipped_short = 0;

  std::size_t sample_count() const;
};

struct BicolorConfig {
  CannyParams canny{};
  int outer_band = 3;
  double corner_angle_deg = 60.0;
  int corner_window = 5;
  double sample_offset = 2.0;
};

/// True for chains whose last point repeats or touches the first (length >= 4).
bool is_closed(std::span<const Pixel> points);

/// Unit normals from central differences over +-2 points (wrapping for closed chains).
std::vector<Vec2> chain_normals(std::span<const Pixel> points);

/// Links a binary edge map into chains. Junction pixels (3+ neighbors) belong to no chain;
/// chains are sorted by their top-most, left-most pixel.
std::vector<PixelChain> link_chains(const GrayImage& edge_map);

/// Canny on the color image followed by chain linking.
std::vector<PixelChain> detect_texture_edges(const RasterImage& img, double low, double high, double sigma = 1.4);

/// Drops chain pixels within `band` (Chebyshev) of the silhouette curve, splitting chains.
std::vector<PixelChain> remove_outermost(const std::vector<PixelChain>& chains, const ContourMap& cm, int band);

/// Removes chain points within `band` px (chessboard) of any on-pixel of `mask`, splitting chains there.
std::vector<PixelChain> remove_near(const std::vector<PixelChain>& chains, const GrayImage& mask, int band);

/// Splits chains where the direction turns by more than angle_thresh_deg across +-window points;
/// the turning points themselves are removed.
std::vector<PixelChain> remove_corners(const std::vector<PixelChain>& chains, double angle_thresh_deg, int window);

/// Samples the colors `offset` px along +normal (left) and -normal (right) for every chain point.
BiColoredEdgeSet sample_bicolor(const RasterImage& img, const std::vector<PixelChain>& chains, double offset);

/// Drops edge points whose two rail pixels land in the same 4-connected part of
/// region minus walls, splitting edges there. Rails on walls or outside the region count as separated.
BiColoredEdgeSet drop_unseparated(const BiColoredEdgeSet& set, const GrayImage& region, const GrayImage& walls);

struct BicolorRaster {
  RasterImage color;
  GrayImage coverage;
};

/// Double-line rendering: the left color 1 px along +normal, the right color 1 px along -normal.
BicolorRaster rasterize_bicolor(const BiColoredEdgeSet& set);

enum class BrushKind { two_string, four_string };

/// two_string: colors = {left, right}.
/// four_string: colors = {stripe, ground} or {left ground, stripe, right ground}; two edges
/// spacing px apart whose inner sides carry the stripe color.
struct BrushSpec {
  BrushKind kind = BrushKind::two_string;
  std::vector<Rgb> colors;
  double spacing = 6.0;
};

BiColoredEdgeSet brush_stroke(std::span<const Vec2> polyline, const BrushSpec& brush, int width, int height);

/// Rounds vertices and joins them with Bresenham segments; repeated pixels are collapsed.
PixelChain rasterize_polyline(std::span<const Vec2> polyline);

/// Throws std::invalid_argument naming the first violated invariant.
void validate(const BiColoredEdgeSet& set);

/// {canvas:{w,h}, edges:[{points, left, right}]}, colors as 8-bit integers.
nlohmann::json to_json(const BiColoredEdgeSet& set);
/// Normals are recomputed from the points.
BiColoredEdgeSet edge_set_from_json(const nlohmann::json& j);

/// Unique colors across all samples, in first-seen order.
std::vector<Rgb> palette_of(const BiColoredEdgeSet& set);

}  // namespace garment
