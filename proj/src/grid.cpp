#include "kfbi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kfbi/error.hpp"

namespace kfbi {

CartesianGrid CartesianGrid::build(const Box& box, int cells_x, int cells_y) {
  if (!(box.x_hi > box.x_lo) || !(box.y_hi > box.y_lo))
    fail(ErrorKind::invalid_parameter, "box must satisfy x_hi > x_lo and y_hi > y_lo");
  if (cells_x < 2 || cells_y < 2)
    fail(ErrorKind::invalid_parameter, "grid needs at least 2 cells per direction");
  const double hx = (box.x_hi - box.x_lo) / cells_x;
  const double hy = (box.y_hi - box.y_lo) / cells_y;
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    fail(ErrorKind::anisotropic_spacing, "grid spacing differs between x (" + std::to_string(hx) +
                                             ") and y (" + std::to_string(hy) + ")");
  CartesianGrid g;
  g.box_ = box;
  g.nx_ = cells_x;
  g.ny_ = cells_y;
  g.h_ = hx;
  g.cx_ = 0.5 * (box.x_lo + box.x_hi);
  g.cy_ = 0.5 * (box.y_lo + box.y_hi);
  return g;
}

NodeClassification classify_nodes(const CartesianGrid& grid, const ParametricBoundary& boundary,
                                  ExecPolicy exec, const WarningSink& warn) {
  const Box& box = grid.box();
  const double h = grid.spacing();
  constexpr int samples = 4096;
  double clearance = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const Vec2 p = boundary.position(static_cast<double>(k) / samples);
    if (p.x < box.x_lo || p.x > box.x_hi || p.y < box.y_lo || p.y > box.y_hi)
      fail(ErrorKind::boundary_escapes_box, "boundary leaves the bounding box");
    clearance = std::min({clearance, p.x - box.x_lo, box.x_hi - p.x, p.y - box.y_lo, box.y_hi - p.y});
  }
  if (warn && clearance < 2.0 * h)
    warn("boundary is within " + std::to_string(clearance / h) + "h of the bounding box");

  const int nx = grid.nodes_x(), ny = grid.nodes_y();
  NodeClassification cls;
  cls.side.assign(grid.node_count(), Side::exterior);
  cls.irregular.assign(grid.node_count(), 0);

#pragma omp parallel for if (is_parallel(exec)) schedule(static)
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) cls.side[grid.index(i, j)] = boundary.side_of(grid.node(i, j));

#pragma omp parallel for if (is_parallel(exec)) schedule(static)
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Side s = cls.side[grid.index(i, j)];
      bool irregular = false;
      if (i > 0) irregular |= cls.side[grid.index(i - 1, j)] != s;
      if (i + 1 < nx) irregular |= cls.side[grid.index(i + 1, j)] != s;
      if (j > 0) irregular |= cls.side[grid.index(i, j - 1)] != s;
      if (j + 1 < ny) irregular |= cls.side[grid.index(i, j + 1)] != s;
      cls.irregular[grid.index(i, j)] = irregular ? 1 : 0;
    }
  }

  for (std::size_t k = 0; k < cls.side.size(); ++k) {
    if (cls.side[k] == Side::interior) ++cls.interior_count;
    if (cls.irregular[k]) cls.irregular_nodes.push_back(k);
  }
  return cls;
}

namespace {

// Counts polyline crossings of Gamma per grid edge; any edge crossed twice
// means the grid does not resolve the curve there.
// Only edges with two interior endpoints count: an exterior-exterior edge
// crossed twice (grazing a convex part of the curve) needs no correction.
void check_resolution(const CartesianGrid& grid, const NodeClassification& cls,
                      const ParametricBoundary& boundary) {
  const double h = grid.spacing();
  const int nx = grid.nodes_x(), ny = grid.nodes_y();
  const auto samples = static_cast<std::size_t>(
      std::max(4096.0, std::ceil(8.0 * boundary.perimeter() / h)));
  std::vector<unsigned short> cx(grid.node_count(), 0), cy(grid.node_count(), 0);
  const double x0 = grid.x(0), y0 = grid.y(0);

  Vec2 p = boundary.position(0.0);
  for (std::size_t k = 1; k <= samples; ++k) {
    const Vec2 q = boundary.position(static_cast<double>(k) / static_cast<double>(samples));
    // Horizontal grid lines y = y_j crossed by segment pq.
    {
      const int jlo = std::max(0, static_cast<int>(std::floor((std::min(p.y, q.y) - y0) / h)));
      const int jhi = std::min(ny - 1, static_cast<int>(std::ceil((std::max(p.y, q.y) - y0) / h)));
      for (int j = jlo; j <= jhi; ++j) {
        const double yl = grid.y(j);
        if ((p.y > yl) == (q.y > yl)) continue;
        const double x = p.x + (q.x - p.x) * (yl - p.y) / (q.y - p.y);
        const int i = std::clamp(static_cast<int>(std::floor((x - x0) / h)), 0, nx - 2);
        const bool both_in = cls.interior(grid.index(i, j)) && cls.interior(grid.index(i + 1, j));
        if (++cx[grid.index(i, j)] >= 2 && both_in)
          fail(ErrorKind::resolution, "grid edge crossed more than once by the boundary near (" +
                                          std::to_string(x) + ", " + std::to_string(yl) + ")");
      }
    }
    {
      const int ilo = std::max(0, static_cast<int>(std::floor((std::min(p.x, q.x) - x0) / h)));
      const int ihi = std::min(nx - 1, static_cast<int>(std::ceil((std::max(p.x, q.x) - x0) / h)));
      for (int i = ilo; i <= ihi; ++i) {
        const double xl = grid.x(i);
        if ((p.x > xl) == (q.x > xl)) continue;
        const double y = p.y + (q.y - p.y) * (xl - p.x) / (q.x - p.x);
        const int j = std::clamp(static_cast<int>(std::floor((y - y0) / h)), 0, ny - 2);
        const bool both_in = cls.interior(grid.index(i, j)) && cls.interior(grid.index(i, j + 1));
        if (++cy[grid.index(i, j)] >= 2 && both_in)
          fail(ErrorKind::resolution, "grid edge crossed more than once by the boundary near (" +
                                          std::to_string(xl) + ", " + std::to_string(y) + ")");
      }
    }
    p = q;
  }
}

Intersection locate(const CartesianGrid& grid, const ParametricBoundary& boundary, EdgeAxis axis,
                    int i, int j, Side low_side) {
  const Vec2 a = grid.node(i, j);
  const Vec2 b = axis == EdgeAxis::x ? grid.node(i + 1, j) : grid.node(i, j + 1);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 64 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double lv = boundary.level(a + mid * (b - a));
    if (!std::isfinite(lv)) fail(ErrorKind::root_not_found, "level function not finite on edge");
    if ((lv <= 0.0 ? Side::interior : Side::exterior) == low_side)
      lo = mid;
    else
      hi = mid;
  }
  if (boundary.side_of(a + lo * (b - a)) == boundary.side_of(a + hi * (b - a)))
    fail(ErrorKind::root_not_found, "no bracketed root on a sign-changing edge");
  const double lambda = std::clamp(0.5 * (lo + hi), 1e-12, 1.0 - 1e-12);
  Intersection x;
  x.axis = axis;
  x.i = i;
  x.j = j;
  x.point = a + lambda * (b - a);
  x.arc = boundary.arc_length(boundary.parameter_of_point(x.point));
  return x;
}

}  // namespace

IntersectionSet find_intersections(const CartesianGrid& grid, const NodeClassification& cls,
                                   const ParametricBoundary& boundary) {
  check_resolution(grid, cls, boundary);
  const int nx = grid.nodes_x(), ny = grid.nodes_y();
  IntersectionSet set;
  for (int i = 0; i + 1 < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const Side s = cls.side[grid.index(i, j)];
      if (s != cls.side[grid.index(i + 1, j)])
        set.items.push_back(locate(grid, boundary, EdgeAxis::x, i, j, s));
    }
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j + 1 < ny; ++j) {
      const Side s = cls.side[grid.index(i, j)];
      if (s != cls.side[grid.index(i, j + 1)])
        set.items.push_back(locate(grid, boundary, EdgeAxis::y, i, j, s));
    }

  const std::size_t n = grid.node_count();
  std::vector<std::size_t> count(n + 1, 0);
  auto far_end = [&grid](const Intersection& x) {
    return x.axis == EdgeAxis::x ? grid.index(x.i + 1, x.j) : grid.index(x.i, x.j + 1);
  };
  for (const Intersection& x : set.items) {
    ++count[grid.index(x.i, x.j) + 1];
    ++count[far_end(x) + 1];
  }
  for (std::size_t k = 0; k < n; ++k) count[k + 1] += count[k];
  set.offsets = count;
  set.ids.resize(count[n]);
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (std::size_t id = 0; id < set.items.size(); ++id) {
    const Intersection& x = set.items[id];
    set.ids[fill[grid.index(x.i, x.j)]++] = id;
    set.ids[fill[far_end(x)]++] = id;
  }
  return set;
}

}  // namespace kfbi
