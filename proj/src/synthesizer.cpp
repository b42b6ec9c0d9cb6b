#include "garment/synthesizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "garment/filters.hpp"
#include "garment/parallel.hpp"

namespace garment {

namespace {

/// Grid-structured SPD operator: (A x)_c = diag_c x_c - sum of couplings to the 4 neighbors.
/// Coarser levels aggregate 2x2 blocks (Galerkin with piecewise-constant prolongation),
/// which keeps the 4-neighbor structure so red-black ordering stays valid on every level.
struct Level {
  int w = 0;
  int h = 0;
  std::vector<char> active;
  std::vector<double> diag;
  std::vector<double> east;   // coupling with (x+1, y)
  std::vector<double> south;  // coupling with (x, y+1)
  std::size_t active_count = 0;

  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w + x; }
};

using Vec = std::vector<double>;

double neighbor_sum(const Level& L, const Vec& x, int cx, int cy) {
  const std::size_t c = L.idx(cx, cy);
  double s = 0.0;
  if (cx + 1 < L.w) s += L.east[c] * x[c + 1];
  if (cx > 0) s += L.east[c - 1] * x[c - 1];
  if (cy + 1 < L.h) s += L.south[c] * x[c + L.w];
  if (cy > 0) s += L.south[c - L.w] * x[c - L.w];
  return s;
}

void apply(const Level& L, const Vec& x, Vec& out) {
  parallel_for(0, L.h, [&](int y) {
    for (int xx = 0; xx < L.w; ++xx) {
      const std::size_t c = L.idx(xx, y);
      out[c] = L.active[c] ? L.diag[c] * x[c] - neighbor_sum(L, x, xx, y) : 0.0;
    }
  });
}

/// Row partial sums are combined in row order, so the result does not depend on threads.
double dot(const Level& L, const Vec& a, const Vec& b) {
  std::vector<double> rows(static_cast<std::size_t>(L.h), 0.0);
  parallel_for(0, L.h, [&](int y) {
    double s = 0.0;
    for (std::size_t c = L.idx(0, y), e = c + L.w; c < e; ++c) s += a[c] * b[c];
    rows[y] = s;
  });
  double s = 0.0;
  for (double r : rows) s += r;
  return s;
}

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void gs_color(const Level& L, const Vec& b, Vec& x, int color) {
  parallel_for(0, L.h, [&](int y) {
    for (int xx = (y + color) % 2; xx < L.w; xx += 2) {
      const std::size_t c = L.idx(xx, y);
      if (L.active[c]) x[c] = (b[c] + neighbor_sum(L, x, xx, y)) / L.diag[c];
    }
  });
}

Level coarsen(const Level& F) {
  Level C;
  C.w = (F.w + 1) / 2;
  C.h = (F.h + 1) / 2;
  const auto n = static_cast<std::size_t>(C.w) * C.h;
  C.active.assign(n, 0);
  C.diag.assign(n, 0.0);
  C.east.assign(n, 0.0);
  C.south.assign(n, 0.0);
  for (int y = 0; y < F.h; ++y)
    for (int x = 0; x < F.w; ++x) {
      const std::size_t f = F.idx(x, y);
      if (!F.active[f]) continue;
      const std::size_t c = C.idx(x / 2, y / 2);
      C.active[c] = 1;
      C.diag[c] += F.diag[f];
      if (x + 1 < F.w && F.east[f] != 0.0) {
        if ((x + 1) / 2 == x / 2) {
          C.diag[c] -= 2.0 * F.east[f];
        } else {
          C.east[c] += F.east[f];
        }
      }
      if (y + 1 < F.h && F.south[f] != 0.0) {
        if ((y + 1) / 2 == y / 2) {
          C.diag[c] -= 2.0 * F.south[f];
        } else {
          C.south[c] += F.south[f];
        }
      }
    }
  for (char a : C.active) C.active_count += a != 0;
  return C;
}

class Multigrid {
 public:
  explicit Multigrid(Level fine) {
    levels_.push_back(std::move(fine));
    while (levels_.back().active_count > kCoarsest && levels_.back().w > 2 && levels_.back().h > 2) {
      levels_.push_back(coarsen(levels_.back()));
    }
    const Level& last = levels_.back();
    for (std::size_t c = 0; c < last.active.size(); ++c)
      if (last.active[c]) coarse_ids_.push_back(c);
    const auto n = static_cast<Eigen::Index>(coarse_ids_.size());
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::Index> pos(last.active.size(), -1);
    for (Eigen::Index i = 0; i < n; ++i) pos[coarse_ids_[static_cast<std::size_t>(i)]] = i;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t c = coarse_ids_[static_cast<std::size_t>(i)];
      dense(i, i) = last.diag[c];
      const int x = static_cast<int>(c % last.w);
      const int y = static_cast<int>(c / last.w);
      if (x + 1 < last.w && last.active[c + 1]) {
        dense(i, pos[c + 1]) = -last.east[c];
        dense(pos[c + 1], i) = -last.east[c];
      }
      if (y + 1 < last.h && last.active[c + last.w]) {
        dense(i, pos[c + last.w]) = -last.south[c];
        dense(pos[c + last.w], i) = -last.south[c];
      }
    }
    coarse_.compute(dense);
    if (coarse_.info() != Eigen::Success) throw std::runtime_error("synthesizer: singular coarse system");
  }

  const Level& fine() const { return levels_.front(); }

  /// z = M^-1 r with one symmetric V-cycle.
  void precondition(const Vec& r, Vec& z) const { vcycle(0, r, z); }

 private:
  static constexpr std::size_t kCoarsest = 400;

  void vcycle(std::size_t l, const Vec& b, Vec& x) const {
    const Level& L = levels_[l];
    std::fill(x.begin(), x.end(), 0.0);
    if (l + 1 == levels_.size()) {
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(coarse_ids_.size()));
      for (std::size_t i = 0; i < coarse_ids_.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = b[coarse_ids_[i]];
      const Eigen::VectorXd sol = coarse_.solve(rhs);
      for (std::size_t i = 0; i < coarse_ids_.size(); ++i) x[coarse_ids_[i]] = sol[static_cast<Eigen::Index>(i)];
      return;
    }
    gs_color(L, b, x, 0);
    gs_color(L, b, x, 1);
    Vec ax(x.size());
    apply(L, x, ax);
    const Level& C = levels_[l + 1];
    Vec rc(static_cast<std::size_t>(C.w) * C.h, 0.0);
    for (int y = 0; y < L.h; ++y)
      for (int xx = 0; xx < L.w; ++xx) {
        const std::size_t f = L.idx(xx, y);
        if (L.active[f]) rc[C.idx(xx / 2, y / 2)] += b[f] - ax[f];
      }
    Vec ec(rc.size());
    vcycle(l + 1, rc, ec);
    for (int y = 0; y < L.h; ++y)
      for (int xx = 0; xx < L.w; ++xx) {
        const std::size_t f = L.idx(xx, y);
        if (L.active[f]) x[f] += ec[C.idx(xx / 2, y / 2)];
      }
    gs_color(L, b, x, 1);
    gs_color(L, b, x, 0);
  }

  std::vector<Level> levels_;
  std::vector<std::size_t> coarse_ids_;
  Eigen::LLT<Eigen::MatrixXd> coarse_;
};

struct SolveStats {
  double max_residual = 0.0;
  int iterations = 0;
};

/// Preconditioned conjugate gradients, stopping on the true max residual.
SolveStats pcg(const Multigrid& mg, const Vec& b, Vec& x, double tol, int max_iterations) {
  const Level& L = mg.fine();
  const std::size_t n = b.size();
  Vec r(n), z(n), p(n), ap(n);
  apply(L, x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = L.active[i] ? b[i] - ap[i] : 0.0;
  SolveStats st;
  st.max_residual = max_abs(r);
  if (st.max_residual <= tol) return st;
  mg.precondition(r, z);
  p = z;
  double rz = dot(L, r, z);
  while (st.iterations < max_iterations) {
    apply(L, p, ap);
    const double pap = dot(L, p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    ++st.iterations;
    if (max_abs(r) <= 0.5 * tol) {
      // The recursive residual drifts; confirm against b - A x before stopping.
      apply(L, x, ap);
      for (std::size_t i = 0; i < n; ++i) r[i] = L.active[i] ? b[i] - ap[i] : 0.0;
      st.max_residual = max_abs(r);
      if (st.max_residual <= tol) return st;
    }
    mg.precondition(r, z);
    const double rz_next = dot(L, r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  apply(L, x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = L.active[i] ? b[i] - ap[i] : 0.0;
  st.max_residual = max_abs(r);
  return st;
}

struct Problem {
  int w;
  int h;
  GrayImage open;        // region minus insulating walls
  GrayImage fixed;       // constraint pixels inside the region
  GrayImage unknown;     // open pixels to be solved
  RasterImage values;    // constraint colors, later the solution
};

/// Multi-source BFS: each unknown takes the color of the constraint that reaches it first.
void nearest_fill(Problem& pb) {
  GrayImage done = pb.fixed;
  std::deque<Pixel> queue;
  for (int y = 0; y < pb.h; ++y)
    for (int x = 0; x < pb.w; ++x)
      if (pb.fixed.on(x, y)) queue.push_back({x, y});
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    for (const Pixel& d : kNeighbors4) {
      const int nx = p.x + d.x;
      const int ny = p.y + d.y;
      if (!pb.unknown.contains(nx, ny) || !pb.unknown.on(nx, ny) || done.on(nx, ny)) continue;
      done.at(nx, ny) = 1.0;
      pb.values.set(nx, ny, pb.values.pixel(p.x, p.y));
      queue.push_back({nx, ny});
    }
  }
}

SolveStats harmonic_solve(Problem& pb, const SynthConfig& cfg) {
  Level L;
  L.w = pb.w;
  L.h = pb.h;
  const auto n = static_cast<std::size_t>(L.w) * L.h;
  L.active.assign(n, 0);
  L.diag.assign(n, 0.0);
  L.east.assign(n, 0.0);
  L.south.assign(n, 0.0);
  for (int y = 0; y < L.h; ++y)
    for (int x = 0; x < L.w; ++x) {
      if (!pb.unknown.on(x, y)) continue;
      const std::size_t c = L.idx(x, y);
      L.active[c] = 1;
      ++L.active_count;
      for (const Pixel& d : kNeighbors4) {
        const int nx = x + d.x;
        const int ny = y + d.y;
        if (pb.open.contains(nx, ny) && pb.open.on(nx, ny)) L.diag[c] += 1.0;
      }
      if (x + 1 < L.w && pb.unknown.on(x + 1, y)) L.east[c] = 1.0;
      if (y + 1 < L.h && pb.unknown.on(x, y + 1)) L.south[c] = 1.0;
    }
  SolveStats total;
  if (L.active_count == 0) return total;

  // Nearest-constraint colors are a cheap start that already satisfies the maximum principle.
  nearest_fill(pb);
  const Multigrid mg(L);
  for (int ch = 0; ch < 3; ++ch) {
    Vec b(n, 0.0);
    Vec x(n, 0.0);
    for (int y = 0; y < L.h; ++y)
      for (int xx = 0; xx < L.w; ++xx) {
        const std::size_t c = L.idx(xx, y);
        if (!L.active[c]) continue;
        x[c] = pb.values.at(xx, y, ch);
        for (const Pixel& d : kNeighbors4) {
          const int nx = xx + d.x;
          const int ny = y + d.y;
          if (pb.fixed.contains(nx, ny) && pb.fixed.on(nx, ny) && pb.open.on(nx, ny)) {
            b[c] += pb.values.at(nx, ny, ch);
          }
        }
      }
    const SolveStats st = pcg(mg, b, x, cfg.tol, cfg.max_iterations);
    total.max_residual = std::max(total.max_residual, st.max_residual);
    total.iterations = std::max(total.iterations, st.iterations);
    for (int y = 0; y < L.h; ++y)
      for (int xx = 0; xx < L.w; ++xx)
        if (L.active[L.idx(xx, y)]) pb.values.at(xx, y, ch) = x[L.idx(xx, y)];
  }
  return total;
}

struct Nearest {
  RasterImage color;
  GrayImage distance;
};

// Breadth-first chessboard propagation of constraint colors through the region, walls included.
Nearest nearest_constraint(const GrayImage& region, const GrayImage& fixed, const GrayImage& painted,
                           const RasterImage& fixed_colors, const RasterImage& painted_colors) {
  const int w = region.width();
  const int h = region.height();
  Nearest out{RasterImage(w, h), GrayImage(w, h, std::numeric_limits<double>::infinity())};
  std::deque<Pixel> queue;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!fixed.on(x, y) && !painted.on(x, y)) continue;
      out.color.set(x, y, fixed.on(x, y) ? fixed_colors.pixel(x, y) : painted_colors.pixel(x, y));
      out.distance.at(x, y) = 0.0;
      queue.push_back({x, y});
    }
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    for (const Pixel& d : kNeighbors8) {
      const int nx = p.x + d.x;
      const int ny = p.y + d.y;
      if (!region.contains(nx, ny) || !region.on(nx, ny) || std::isfinite(out.distance.at(nx, ny))) continue;
      out.distance.at(nx, ny) = out.distance.at(p.x, p.y) + 1.0;
      out.color.set(nx, ny, out.color.pixel(p.x, p.y));
      queue.push_back({nx, ny});
    }
  }
  return out;
}

void require_same(const GrayImage& a, const GrayImage& b, const char* what) {
  if (!a.same_size(b)) throw std::invalid_argument(std::string("synthesizer: ") + what + " size mismatch");
}

}  // namespace

SynthResult fill_region(const GrayImage& region, const GrayImage& walls, const GrayImage& constraint_mask,
                        const RasterImage& constraint_colors, const SynthConfig& cfg) {
  require_same(region, walls, "walls");
  require_same(region, constraint_mask, "constraint mask");
  if (!constraint_colors.same_size(region)) throw std::invalid_argument("synthesizer: constraint colors size mismatch");
  if (!(cfg.tol > 0.0) || cfg.max_iterations < 0) throw std::invalid_argument("synthesizer: invalid tolerance");
  const int w = region.width();
  const int h = region.height();

  Problem pb{w, h, GrayImage(w, h), GrayImage(w, h), GrayImage(w, h), RasterImage(w, h)};
  // A stroke drawn over a contour line keeps its color there but does not bridge the line.
  GrayImage painted_wall(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!region.on(x, y)) continue;
      if (constraint_mask.on(x, y) && walls.on(x, y)) {
        painted_wall.at(x, y) = 1.0;
      } else if (constraint_mask.on(x, y)) {
        pb.fixed.at(x, y) = 1.0;
        pb.open.at(x, y) = 1.0;
        pb.values.set(x, y, constraint_colors.pixel(x, y));
      } else if (!walls.on(x, y)) {
        pb.open.at(x, y) = 1.0;
      }
    }

  SynthResult res{RasterImage(w, h, cfg.background), region, 0.0, 0, {}};
  const Components comps = connected_components(pb.open, false);
  std::vector<std::vector<Pixel>> unconstrained;
  bool any_constraint = false;
  for (const auto& members : comps.members) {
    std::vector<Rgb> colors;
    for (const Pixel& p : members)
      if (pb.fixed.on(p.x, p.y)) colors.push_back(pb.values.pixel(p.x, p.y));
    if (colors.empty()) {
      unconstrained.push_back(members);
      continue;
    }
    any_constraint = true;
    const bool uniform = std::all_of(colors.begin(), colors.end(), [&](const Rgb& c) { return c == colors.front(); });
    for (const Pixel& p : members) {
      if (pb.fixed.on(p.x, p.y)) continue;
      if (uniform) {
        pb.values.set(p.x, p.y, colors.front());
      } else {
        pb.unknown.at(p.x, p.y) = 1.0;
      }
    }
  }

  if (cfg.mode == SynthMode::voronoi) {
    nearest_fill(pb);
  } else {
    const SolveStats st = harmonic_solve(pb, cfg);
    res.max_residual = st.max_residual;
    res.iterations = st.iterations;
    if (st.max_residual > cfg.tol) res.warnings.push_back("solver stopped above tolerance");
  }

  // A sealed region whose only strokes landed on its bounding contour takes those colors.
  std::vector<std::vector<Pixel>> sealed;
  for (auto& members : unconstrained) {
    GrayImage sub(w, h);
    GrayImage seeds(w, h);
    bool seeded = false;
    for (const Pixel& p : members) {
      sub.at(p.x, p.y) = 1.0;
      for (const Pixel& d : kNeighbors4) {
        const int nx = p.x + d.x;
        const int ny = p.y + d.y;
        if (!painted_wall.contains(nx, ny) || !painted_wall.on(nx, ny)) continue;
        sub.at(nx, ny) = 1.0;
        seeds.at(nx, ny) = 1.0;
        seeded = true;
      }
    }
    if (!seeded) {
      sealed.push_back(std::move(members));
      continue;
    }
    const SynthResult part = fill_region(sub, GrayImage(w, h), seeds, constraint_colors, cfg);
    for (const Pixel& p : members) pb.values.set(p.x, p.y, part.image.pixel(p.x, p.y));
    res.max_residual = std::max(res.max_residual, part.max_residual);
    res.iterations = std::max(res.iterations, part.iterations);
    any_constraint = true;
  }
  unconstrained = std::move(sealed);

  if (!unconstrained.empty()) {
    if (any_constraint) {
      // Regions sealed off from every stroke take the color of the closest stroke within the garment.
      const Nearest nearest = nearest_constraint(region, pb.fixed, painted_wall, pb.values, constraint_colors);
      const GrayImage& dist = nearest.distance;
      for (const auto& members : unconstrained) {
        const Pixel* best = &members.front();
        for (const Pixel& p : members)
          if (dist.at(p.x, p.y) < dist.at(best->x, best->y)) best = &p;
        const bool reached = std::isfinite(dist.at(best->x, best->y));
        const Rgb c = reached ? nearest.color.pixel(best->x, best->y) : cfg.default_color;
        for (const Pixel& p : members) pb.values.set(p.x, p.y, c);
      }
      res.warnings.push_back("region without color constraints filled from the nearest stroke");
    } else {
      for (const auto& members : unconstrained)
        for (const Pixel& p : members) pb.values.set(p.x, p.y, cfg.default_color);
      res.warnings.push_back("region without color constraints filled with the default color");
    }
  }

  GrayImage filled = pb.open;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (pb.open.on(x, y)) res.image.set(x, y, pb.values.pixel(x, y));
      if (painted_wall.on(x, y)) {
        res.image.set(x, y, constraint_colors.pixel(x, y));
        filled.at(x, y) = 1.0;
      }
    }

  // Remaining contour pixels take the mean of their already-colored neighbors, peeling inward.
  std::vector<Pixel> pending;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (region.on(x, y) && !filled.on(x, y)) pending.push_back({x, y});
  while (!pending.empty()) {
    std::vector<std::pair<Pixel, Rgb>> ready;
    std::vector<Pixel> rest;
    for (const Pixel& p : pending) {
      Rgb sum;
      int n = 0;
      for (const Pixel& d : kNeighbors8) {
        const int nx = p.x + d.x;
        const int ny = p.y + d.y;
        if (!filled.contains(nx, ny) || !filled.on(nx, ny)) continue;
        sum = sum + res.image.pixel(nx, ny);
        ++n;
      }
      if (n > 0) {
        ready.push_back({p, sum * (1.0 / n)});
      } else {
        rest.push_back(p);
      }
    }
    if (ready.empty()) {
      for (const Pixel& p : rest) res.image.set(p.x, p.y, cfg.default_color);
      break;
    }
    for (const auto& [p, c] : ready) {
      res.image.set(p.x, p.y, c);
      filled.at(p.x, p.y) = 1.0;
    }
    pending = std::move(rest);
  }
  return res;
}

SynthResult synthesize(const RepresentationStack& rep, const SynthConfig& cfg) {
  const GrayImage region = outer_boundary(ContourMap{rep.contour, ContourProvenance::user_drawn});
  return fill_region(region, rep.contour, rep.coverage, rep.bicolor, cfg);
}

SynthResult synthesize_dense(const RepresentationStack& rep, const RasterImage& texture, const SynthConfig& cfg) {
  if (texture.width() < 1 || texture.height() < 1) throw std::invalid_argument("synthesize_dense: empty texture");
  if (cfg.dense_rim < 0) throw std::invalid_argument("synthesize_dense: rim must be >= 0");
  const GrayImage region = outer_boundary(ContourMap{rep.contour, ContourProvenance::user_drawn});
  const int w = region.width();
  const int h = region.height();
  int x0 = w;
  int y0 = h;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (region.on(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
      }
  GrayImage exterior(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) exterior.at(x, y) = region.on(x, y) ? 0.0 : 1.0;
  const std::vector<int> depth = chessboard_distance(exterior);

  GrayImage fixed = rep.coverage;
  RasterImage colors = rep.bicolor;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!region.on(x, y) || rep.coverage.on(x, y) || rep.contour.on(x, y)) continue;
      if (depth[static_cast<std::size_t>(y) * w + x] <= cfg.dense_rim) continue;
      fixed.at(x, y) = 1.0;
      colors.set(x, y, texture.pixel((x - x0) % texture.width(), (y - y0) % texture.height()));
    }
  SynthConfig harmonic = cfg;
  harmonic.mode = SynthMode::harmonic;
  return fill_region(region, rep.contour, fixed, colors, harmonic);
}

}  // namespace garment
