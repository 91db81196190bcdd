#include "kfbi/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kfbi/error.hpp"

namespace kfbi {

namespace {

constexpr double max_condition = 1e8;

void fill_stencil(StencilSelection& sel, const CartesianGrid& grid, const NodeClassification& cls,
                  int ic, int jc, int sx, int sy) {
  const int di[6] = {0, 1, -1, 0, 0, sx};
  const int dj[6] = {0, 0, 0, 1, -1, sy};
  const double h = grid.spacing();
  for (int r = 0; r < 6; ++r) {
    const int i = ic + di[r], j = jc + dj[r];
    if (i < 0 || j < 0 || i > grid.cells_x() || j > grid.cells_y())
      fail(ErrorKind::near_box, "interpolation stencil leaves the grid");
    sel.i[r] = i;
    sel.j[r] = j;
    sel.nodes[r] = grid.index(i, j);
    sel.side[r] = cls.side[sel.nodes[r]];
    const double xi = (grid.x(i) - sel.point.x) / h;
    const double eta = (grid.y(j) - sel.point.y) / h;
    sel.matrix.row(r) << 1.0, xi, eta, 0.5 * xi * xi, xi * eta, 0.5 * eta * eta;
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(sel.matrix);
  const auto& s = svd.singularValues();
  sel.condition = s(5) > 0.0 ? s(0) / s(5) : std::numeric_limits<double>::infinity();
}

}  // namespace

StencilSelection select_stencil(const CartesianGrid& grid, const NodeClassification& cls, Vec2 z,
                                std::size_t control) {
  const Box& box = grid.box();
  const double h = grid.spacing();
  const double clearance = std::min({z.x - box.x_lo, box.x_hi - z.x, z.y - box.y_lo, box.y_hi - z.y});
  if (!(clearance >= 2.0 * h))
    fail(ErrorKind::near_box, "point (" + std::to_string(z.x) + ", " + std::to_string(z.y) +
                                  ") is closer than 2h to the bounding box");
  StencilSelection sel;
  sel.control = control;
  sel.point = z;
  const double fx = (z.x - grid.x(0)) / h, fy = (z.y - grid.y(0)) / h;
  const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
  const bool right = fx - i0 >= 0.5, up = fy - j0 >= 0.5;
  const int ic = right ? i0 + 1 : i0, jc = up ? j0 + 1 : j0;
  const int sx = right ? -1 : 1, sy = up ? -1 : 1;
  fill_stencil(sel, grid, cls, ic, jc, sx, sy);
  if (sel.condition >= max_condition) {
    fill_stencil(sel, grid, cls, ic + sx, jc + sy, -sx, -sy);
    sel.reselected = true;
    if (sel.condition >= max_condition)
      fail(ErrorKind::singular_stencil, "no well-conditioned stencil for control point " +
                                            std::to_string(control));
  }
  return sel;
}

OneSidedValue one_sided_value(const GridField& field, const CartesianGrid& grid,
                              const StencilSelection& sel, const JumpData& jumps, Side target) {
  const double h = grid.spacing();
  Eigen::Matrix<double, 6, 1> rhs;
  for (int r = 0; r < 6; ++r) {
    double v = field[sel.nodes[r]];
    if (sel.side[r] != target) {
      const double xi = grid.x(sel.i[r]) - sel.point.x;
      const double eta = grid.y(sel.j[r]) - sel.point.y;
      const double shift = jumps.v + jumps.vx * xi + jumps.vy * eta + 0.5 * jumps.vxx * xi * xi +
                           jumps.vxy * xi * eta + 0.5 * jumps.vyy * eta * eta;
      // [v] is interior minus exterior.
      v += target == Side::interior ? shift : -shift;
    }
    rhs(r) = v;
  }
  const Eigen::Matrix<double, 6, 1> c = sel.matrix.partialPivLu().solve(rhs);
  if (!c.allFinite())
    fail(ErrorKind::singular_stencil, "singular stencil at control point " + std::to_string(sel.control));
  OneSidedValue out;
  out.value = c(0);
  out.dx = c(1) / h;
  out.dy = c(2) / h;
  out.dxx = c(3) / (h * h);
  out.dxy = c(4) / (h * h);
  out.dyy = c(5) / (h * h);
  return out;
}

double one_sided_normal_derivative(const GridField& field, const CartesianGrid& grid,
                                   const StencilSelection& sel, const JumpData& jumps, Vec2 normal,
                                   Side target) {
  const OneSidedValue v = one_sided_value(field, grid, sel, jumps, target);
  return normal.x * v.dx + normal.y * v.dy;
}

std::vector<OneSidedValue> one_sided_values(const GridField& field, const CartesianGrid& grid,
                                            std::span<const StencilSelection> sels,
                                            std::span<const JumpData> jumps, Side target,
                                            ExecPolicy exec) {
  if (jumps.size() != sels.size()) fail(ErrorKind::missing_jump, "jump data missing for some stencils");
  std::vector<OneSidedValue> out(sels.size());
  parallel_for(static_cast<long>(sels.size()), exec,
               [&](long k) { out[k] = one_sided_value(field, grid, sels[k], jumps[k], target); });
  return out;
}

}  // namespace kfbi
