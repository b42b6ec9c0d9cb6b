#include "garment/bicolor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "garment/filters.hpp"
#include "garment/image_io.hpp"

namespace garment {

std::size_t BiColoredEdgeSet::sample_count() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.points.size();
  return n;
}

namespace {

bool adjacent8(const Pixel& a, const Pixel& b) {
  return std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1 && !(a == b);
}

Pixel min_point(const PixelChain& c) { return *std::min_element(c.begin(), c.end()); }

void sort_canonical(std::vector<PixelChain>& chains) {
  std::stable_sort(chains.begin(), chains.end(),
                   [](const PixelChain& a, const PixelChain& b) { return min_point(a) < min_point(b); });
}

/// Splits a chain into maximal runs of kept points; closed chains are rotated so that
/// the run wrapping past the end is not cut in two.
std::vector<PixelChain> split_chain(const PixelChain& chain, const std::vector<bool>& keep) {
  std::vector<PixelChain> out;
  const std::size_t n = chain.size();
  std::size_t start = 0;
  if (is_closed(chain)) {
    auto it = std::find(keep.begin(), keep.end(), false);
    if (it == keep.end()) return {chain};
    start = static_cast<std::size_t>(it - keep.begin());
  }
  PixelChain current;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (start + k) % n;
    if (keep[i]) {
      if (!current.empty() && current.back() == chain[i]) continue;
      current.push_back(chain[i]);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  std::erase_if(out, [](const PixelChain& c) { return c.size() < 2; });
  return out;
}

Vec2 normalized_perp(double tx, double ty) {
  const double len = std::hypot(tx, ty);
  if (len == 0.0) return {0.0, 1.0};
  return {-ty / len, tx / len};
}

}  // namespace

bool is_closed(std::span<const Pixel> points) {
  if (points.size() < 4) return false;
  return points.front() == points.back() || adjacent8(points.front(), points.back());
}

std::vector<Vec2> chain_normals(std::span<const Pixel> points) {
  const std::size_t n = points.size();
  std::vector<Vec2> normals(n);
  if (n < 2) return normals;
  const bool closed = is_closed(points);
  // A repeated closing point is not a distinct vertex of the cycle.
  const std::size_t cycle = (closed && points.front() == points.back()) ? n - 1 : n;
  constexpr int kSpan = 2;
  for (std::size_t i = 0; i < n; ++i) {
    for (int span = kSpan; span >= 1; --span) {
      Pixel a;
      Pixel b;
      if (closed) {
        const std::size_t ic = i % cycle;
        a = points[(ic + cycle - static_cast<std::size_t>(span) % cycle) % cycle];
        b = points[(ic + static_cast<std::size_t>(span)) % cycle];
      } else {
        const std::size_t lo = i >= static_cast<std::size_t>(span) ? i - span : 0;
        const std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(span));
        a = points[lo];
        b = points[hi];
      }
      const double tx = b.x - a.x;
      const double ty = b.y - a.y;
      if (tx != 0.0 || ty != 0.0) {
        normals[i] = normalized_perp(tx, ty);
        break;
      }
      normals[i] = {0.0, 1.0};
    }
  }
  return normals;
}

std::vector<PixelChain> link_chains(const GrayImage& edge_map) {
  GrayImage m = thin(edge_map);
  const int w = m.width();
  const int h = m.height();
  // Junctions end chains and are excluded from all of them.
  std::vector<Pixel> junctions;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m.on(x, y) && count_neighbors8(m, x, y) >= 3) junctions.push_back({x, y});
  for (const Pixel& p : junctions) m.at(p.x, p.y) = 0.0;

  GrayImage visited(w, h);
  std::vector<PixelChain> chains;

  auto next_of = [&](const Pixel& p) -> Pixel {
    Pixel best{-1, -1};
    // Orthogonal neighbors first so staircase pixels are walked rather than skipped.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < 8; ++i) {
        if ((i % 2 == 0) != (pass == 0)) continue;
        const Pixel q{p.x + kNeighbors8[i].x, p.y + kNeighbors8[i].y};
        if (!m.contains(q.x, q.y) || !m.on(q.x, q.y) || visited.on(q.x, q.y)) continue;
        return q;
      }
    }
    return best;
  };

  auto trace = [&](Pixel start) {
    PixelChain chain;
    Pixel cur = start;
    while (cur.x >= 0) {
      visited.at(cur.x, cur.y) = 1.0;
      chain.push_back(cur);
      cur = next_of(cur);
    }
    chains.push_back(std::move(chain));
  };

  // Open paths from their raster-first endpoint, then the remaining cycles.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m.on(x, y) && !visited.on(x, y) && count_neighbors8(m, x, y) <= 1) trace({x, y});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m.on(x, y) && !visited.on(x, y)) trace({x, y});

  std::erase_if(chains, [](const PixelChain& c) { return c.size() < 2; });
  sort_canonical(chains);
  return chains;
}

std::vector<PixelChain> detect_texture_edges(const RasterImage& img, double low, double high, double sigma) {
  return link_chains(canny(img, CannyParams{sigma, low, high}));
}

std::vector<PixelChain> remove_near(const std::vector<PixelChain>& chains, const GrayImage& mask, int band) {
  if (chains.empty()) return chains;
  const std::vector<int> dist = chessboard_distance(mask);
  std::vector<PixelChain> out;
  for (const PixelChain& chain : chains) {
    std::vector<bool> keep(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const Pixel p = chain[i];
      keep[i] = !mask.contains(p.x, p.y) || dist[static_cast<std::size_t>(p.y) * mask.width() + p.x] > band;
    }
    for (auto& piece : split_chain(chain, keep)) out.push_back(std::move(piece));
  }
  sort_canonical(out);
  return out;
}

std::vector<PixelChain> remove_outermost(const std::vector<PixelChain>& chains, const ContourMap& cm, int band) {
  if (chains.empty()) return chains;
  GrayImage curve(cm.mask.width(), cm.mask.height());
  try {
    curve = outer_curve(outer_boundary(cm));
  } catch (const OpenContourError&) {
    curve = cm.mask;
  }
  return remove_near(chains, curve, band);
}

std::vector<PixelChain> remove_corners(const std::vector<PixelChain>& chains, double angle_thresh_deg, int window) {
  if (window < 2) throw std::invalid_argument("remove_corners: window must be >= 2");
  const double cos_thresh = std::cos(angle_thresh_deg * std::numbers::pi / 180.0);
  std::vector<PixelChain> out;
  for (const PixelChain& chain : chains) {
    const std::size_t n = chain.size();
    const bool closed = is_closed(chain);
    const std::size_t cycle = (closed && chain.front() == chain.back()) ? n - 1 : n;
    std::vector<bool> keep(n, true);
    for (std::size_t i = 0; i < n; ++i) {
      Pixel before;
      Pixel after;
      const auto w = static_cast<std::size_t>(window);
      if (closed && cycle > 2 * w) {
        const std::size_t ic = i % cycle;
        before = chain[(ic + cycle - w) % cycle];
        after = chain[(ic + w) % cycle];
      } else {
        if (i < w || i + w >= n) continue;
        before = chain[i - w];
        after = chain[i + w];
      }
      const Pixel p = chain[i];
      const double ax = p.x - before.x;
      const double ay = p.y - before.y;
      const double bx = after.x - p.x;
      const double by = after.y - p.y;
      const double la = std::hypot(ax, ay);
      const double lb = std::hypot(bx, by);
      if (la == 0.0 || lb == 0.0) continue;
      const double cos_turn = (ax * bx + ay * by) / (la * lb);
      if (cos_turn < cos_thresh) keep[i] = false;
    }
    if (closed && cycle < n && !keep[n - 1]) keep[0] = false;
    if (closed && cycle < n && !keep[0]) keep[n - 1] = false;
    for (auto& piece : split_chain(chain, keep)) out.push_back(std::move(piece));
  }
  sort_canonical(out);
  return out;
}

BiColoredEdgeSet sample_bicolor(const RasterImage& img, const std::vector<PixelChain>& chains, double offset) {
  if (offset < 1.0) throw std::invalid_argument("sample_bicolor: offset must be >= 1");
  BiColoredEdgeSet set;
  set.width = img.width();
  set.height = img.height();
  const double max_x = img.width() - 1;
  const double max_y = img.height() - 1;
  auto inside = [&](double x, double y) { return x >= 0.0 && y >= 0.0 && x <= max_x && y <= max_y; };

  std::vector<PixelChain> pending;
  for (const PixelChain& c : chains) {
    if (c.size() < 2) {
      ++set.skipped_short;
      continue;
    }
    for (const Pixel& p : c) {
      if (!img.contains(p.x, p.y)) throw std::invalid_argument("sample_bicolor: chain point outside the image");
    }
    pending.push_back(c);
  }

  // Dropping points with off-canvas samples changes the normals near the cut, so the
  // surviving pieces are re-sampled until every sample lands on the canvas.
  while (!pending.empty()) {
    std::vector<PixelChain> retry;
    for (const PixelChain& chain : pending) {
      const auto normals = chain_normals(chain);
      std::vector<bool> keep(chain.size(), true);
      bool all_inside = true;
      for (std::size_t i = 0; i < chain.size(); ++i) {
        const Vec2 n = normals[i];
        const Pixel p = chain[i];
        keep[i] = inside(p.x + offset * n.x, p.y + offset * n.y) && inside(p.x - offset * n.x, p.y - offset * n.y);
        all_inside = all_inside && keep[i];
      }
      if (!all_inside) {
        for (auto& piece : split_chain(chain, keep)) retry.push_back(std::move(piece));
        continue;
      }
      BiColoredEdge edge;
      edge.points = chain;
      edge.normals = normals;
      edge.left.reserve(chain.size());
      edge.right.reserve(chain.size());
      for (std::size_t i = 0; i < chain.size(); ++i) {
        const Vec2 n = normals[i];
        const Pixel p = chain[i];
        edge.left.push_back(img.bilinear(p.x + offset * n.x, p.y + offset * n.y));
        edge.right.push_back(img.bilinear(p.x - offset * n.x, p.y - offset * n.y));
      }
      set.edges.push_back(std::move(edge));
    }
    pending = std::move(retry);
  }
  std::stable_sort(set.edges.begin(), set.edges.end(), [](const BiColoredEdge& a, const BiColoredEdge& b) {
    return min_point(a.points) < min_point(b.points);
  });
  return set;
}

namespace {

void bresenham(Pixel a, Pixel b, const std::function<void(Pixel)>& plot) {
  int dx = std::abs(b.x - a.x);
  int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  Pixel p = a;
  while (true) {
    plot(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      p.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      p.y += sy;
    }
  }
}

Pixel round_pixel(double x, double y) {
  return {static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))};
}

}  // namespace

BiColoredEdgeSet drop_unseparated(const BiColoredEdgeSet& set, const GrayImage& region, const GrayImage& walls) {
  if (!region.same_size(walls) || region.width() != set.width || region.height() != set.height)
    throw std::invalid_argument("drop_unseparated: size mismatch");
  const int w = region.width();
  GrayImage open(w, region.height());
  for (int y = 0; y < region.height(); ++y)
    for (int x = 0; x < w; ++x) open.at(x, y) = region.on(x, y) && !walls.on(x, y) ? 1.0 : 0.0;
  const Components comps = connected_components(open, false);
  auto label = [&](Pixel p) {
    return open.contains(p.x, p.y) ? comps.labels[static_cast<std::size_t>(p.y) * w + p.x] : -1;
  };

  BiColoredEdgeSet out{set.width, set.height, {}, set.skipped_short};
  for (const BiColoredEdge& e : set.edges) {
    const auto& normals = e.normals.size() == e.points.size() ? e.normals : chain_normals(e.points);
    BiColoredEdge piece;
    auto flush = [&] {
      if (piece.points.size() >= 2) {
        out.edges.push_back(std::move(piece));
      } else if (!piece.points.empty()) {
        ++out.skipped_short;
      }
      piece = {};
    };
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      const Pixel p = e.points[i];
      const Vec2 n = normals[i];
      const int l = label(round_pixel(p.x + n.x, p.y + n.y));
      const int r = label(round_pixel(p.x - n.x, p.y - n.y));
      if (l >= 0 && l == r) {
        flush();
        continue;
      }
      piece.points.push_back(p);
      piece.left.push_back(e.left[i]);
      piece.right.push_back(e.right[i]);
      piece.normals.push_back(n);
    }
    flush();
  }
  return out;
}

BicolorRaster rasterize_bicolor(const BiColoredEdgeSet& set) {
  if (set.width < 1 || set.height < 1) throw std::invalid_argument("rasterize_bicolor: empty canvas");
  BicolorRaster out{RasterImage(set.width, set.height), GrayImage(set.width, set.height)};
  auto write = [&](Pixel p, const Rgb& c) {
    if (!out.color.contains(p.x, p.y)) return;
    out.color.set(p.x, p.y, c);
    out.coverage.at(p.x, p.y) = 1.0;
  };
  for (const BiColoredEdge& e : set.edges) {
    const auto& normals = e.normals.size() == e.points.size() ? e.normals : chain_normals(e.points);
    Pixel prev_left{};
    Pixel prev_right{};
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      const Pixel p = e.points[i];
      const Vec2 n = normals[i];
      const Pixel l = round_pixel(p.x + n.x, p.y + n.y);
      const Pixel r = round_pixel(p.x - n.x, p.y - n.y);
      // Gaps between consecutive offset pixels are bridged so each rail stays 8-connected.
      if (i > 0 && !adjacent8(prev_left, l) && !(prev_left == l)) {
        bresenham(prev_left, l, [&](Pixel q) { write(q, e.left[i - 1]); });
      }
      if (i > 0 && !adjacent8(prev_right, r) && !(prev_right == r)) {
        bresenham(prev_right, r, [&](Pixel q) { write(q, e.right[i - 1]); });
      }
      write(l, e.left[i]);
      write(r, e.right[i]);
      prev_left = l;
      prev_right = r;
    }
  }
  return out;
}

PixelChain rasterize_polyline(std::span<const Vec2> polyline) {
  PixelChain chain;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Pixel a = round_pixel(polyline[i].x, polyline[i].y);
    const Pixel b = round_pixel(polyline[i + 1].x, polyline[i + 1].y);
    bresenham(a, b, [&](Pixel q) {
      if (chain.empty() || !(chain.back() == q)) chain.push_back(q);
    });
  }
  if (polyline.size() == 1) chain.push_back(round_pixel(polyline[0].x, polyline[0].y));
  return chain;
}

namespace {

std::vector<Vec2> offset_polyline(std::span<const Vec2> poly, double d) {
  const std::size_t n = poly.size();
  const bool closed = n >= 3 && poly.front().x == poly.back().x && poly.front().y == poly.back().y;
  auto seg_normal = [&](std::size_t i) {  // normal of segment i -> i+1
    const double tx = poly[i + 1].x - poly[i].x;
    const double ty = poly[i + 1].y - poly[i].y;
    return normalized_perp(tx, ty);
  };
  std::vector<Vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 acc{0.0, 0.0};
    if (i > 0) {
      const Vec2 a = seg_normal(i - 1);
      acc.x += a.x;
      acc.y += a.y;
    } else if (closed) {
      const Vec2 a = seg_normal(n - 2);
      acc.x += a.x;
      acc.y += a.y;
    }
    if (i + 1 < n) {
      const Vec2 b = seg_normal(i);
      acc.x += b.x;
      acc.y += b.y;
    } else if (closed) {
      const Vec2 b = seg_normal(0);
      acc.x += b.x;
      acc.y += b.y;
    }
    const double len = std::hypot(acc.x, acc.y);
    const Vec2 nrm = len > 0.0 ? Vec2{acc.x / len, acc.y / len} : Vec2{0.0, 1.0};
    out[i] = {poly[i].x + d * nrm.x, poly[i].y + d * nrm.y};
  }
  return out;
}

void append_constant_edge(BiColoredEdgeSet& set, std::span<const Vec2> poly, const Rgb& left, const Rgb& right) {
  const PixelChain raw = rasterize_polyline(poly);
  std::vector<bool> keep(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    keep[i] = raw[i].x >= 0 && raw[i].y >= 0 && raw[i].x < set.width && raw[i].y < set.height;
  std::vector<PixelChain> pieces;
  if (std::all_of(keep.begin(), keep.end(), [](bool k) { return k; })) {
    if (raw.size() >= 2) pieces.push_back(raw);
  } else {
    pieces = split_chain(raw, keep);
  }
  for (auto& chain : pieces) {
    BiColoredEdge e;
    e.normals = chain_normals(chain);
    e.left.assign(chain.size(), left);
    e.right.assign(chain.size(), right);
    e.points = std::move(chain);
    set.edges.push_back(std::move(e));
  }
}

}  // namespace

BiColoredEdgeSet brush_stroke(std::span<const Vec2> polyline, const BrushSpec& brush, int width, int height) {
  if (polyline.size() < 2) throw std::invalid_argument("brush_stroke: polyline needs at least 2 points");
  if (width < 1 || height < 1) throw std::invalid_argument("brush_stroke: empty canvas");
  BiColoredEdgeSet set;
  set.width = width;
  set.height = height;
  if (brush.kind == BrushKind::two_string) {
    if (brush.colors.size() != 2) throw std::invalid_argument("brush_stroke: 2-string brush takes exactly 2 colors");
    append_constant_edge(set, polyline, brush.colors[0], brush.colors[1]);
    return set;
  }
  if (brush.colors.size() != 2 && brush.colors.size() != 3) {
    throw std::invalid_argument("brush_stroke: 4-string brush takes 2 or 3 colors");
  }
  if (!(brush.spacing > 0.0)) throw std::invalid_argument("brush_stroke: spacing must be positive");
  const Rgb stripe = brush.colors.size() == 2 ? brush.colors[0] : brush.colors[1];
  const Rgb left_ground = brush.colors.size() == 2 ? brush.colors[1] : brush.colors[0];
  const Rgb right_ground = brush.colors.size() == 2 ? brush.colors[1] : brush.colors[2];
  const auto outer_left = offset_polyline(polyline, brush.spacing / 2.0);
  const auto outer_right = offset_polyline(polyline, -brush.spacing / 2.0);
  append_constant_edge(set, outer_left, left_ground, stripe);
  append_constant_edge(set, outer_right, stripe, right_ground);
  return set;
}

void validate(const BiColoredEdgeSet& set) {
  if (set.width < 1 || set.height < 1) throw std::invalid_argument("edge set: canvas must be non-empty");
  for (std::size_t k = 0; k < set.edges.size(); ++k) {
    const auto& e = set.edges[k];
    const std::string where = "edge " + std::to_string(k) + ": ";
    if (e.points.size() < 2) throw std::invalid_argument(where + "fewer than 2 points");
    if (e.left.size() != e.points.size() || e.right.size() != e.points.size() || e.normals.size() != e.points.size()) {
      throw std::invalid_argument(where + "per-point array lengths differ");
    }
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      const Pixel p = e.points[i];
      if (p.x < 0 || p.y < 0 || p.x >= set.width || p.y >= set.height) {
        throw std::invalid_argument(where + "point outside canvas");
      }
      if (i > 0 && !adjacent8(e.points[i - 1], p)) throw std::invalid_argument(where + "consecutive points not 8-adjacent");
      const Vec2 n = e.normals[i];
      if (std::abs(std::hypot(n.x, n.y) - 1.0) > 1e-6) throw std::invalid_argument(where + "normal not unit length");
      for (int c = 0; c < 3; ++c) {
        if (!std::isfinite(e.left[i][c]) || !std::isfinite(e.right[i][c])) {
          throw std::invalid_argument(where + "non-finite color");
        }
      }
    }
  }
}

namespace {

nlohmann::json color_json(const Rgb& c) { return nlohmann::json::array({to_u8(c.r), to_u8(c.g), to_u8(c.b)}); }

Rgb color_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("color must be [r,g,b]");
  Rgb c;
  for (int i = 0; i < 3; ++i) {
    const int v = j[static_cast<std::size_t>(i)].get<int>();
    if (v < 0 || v > 255) throw std::invalid_argument("color component outside 0..255");
    c[i] = v / 255.0;
  }
  return c;
}

}  // namespace

nlohmann::json to_json(const BiColoredEdgeSet& set) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : set.edges) {
    nlohmann::json pts = nlohmann::json::array();
    nlohmann::json left = nlohmann::json::array();
    nlohmann::json right = nlohmann::json::array();
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      pts.push_back({e.points[i].x, e.points[i].y});
      left.push_back(color_json(e.left[i]));
      right.push_back(color_json(e.right[i]));
    }
    edges.push_back({{"points", std::move(pts)}, {"left", std::move(left)}, {"right", std::move(right)}});
  }
  return {{"canvas", {{"w", set.width}, {"h", set.height}}}, {"edges", std::move(edges)}};
}

BiColoredEdgeSet edge_set_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("edge set must be an object");
  BiColoredEdgeSet set;
  const auto& canvas = j.at("canvas");
  set.width = canvas.at("w").get<int>();
  set.height = canvas.at("h").get<int>();
  for (const auto& je : j.at("edges")) {
    BiColoredEdge e;
    for (const auto& p : je.at("points")) {
      if (!p.is_array() || p.size() != 2) throw std::invalid_argument("point must be [x,y]");
      e.points.push_back({p[0].get<int>(), p[1].get<int>()});
    }
    for (const auto& c : je.at("left")) e.left.push_back(color_from_json(c));
    for (const auto& c : je.at("right")) e.right.push_back(color_from_json(c));
    e.normals = chain_normals(e.points);
    set.edges.push_back(std::move(e));
  }
  validate(set);
  return set;
}

std::vector<Rgb> palette_of(const BiColoredEdgeSet& set) {
  std::vector<Rgb> out;
  auto add = [&](const Rgb& c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  for (const auto& e : set.edges)
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      add(e.left[i]);
      add(e.right[i]);
    }
  return out;
}

}  // namespace garment
