#include "kfbi/reference.hpp"

#include <cmath>
#include <numbers>

namespace kfbi::reference {

GridField correct_rhs(GridField base, const CartesianGrid& grid, const NodeClassification& cls,
                      const IntersectionSet& xs, std::span<const JumpData> jumps) {
  for (std::size_t id = 0; id < xs.items.size(); ++id) {
    const Intersection& x = xs.items[id];
    const std::size_t a = grid.index(x.i, x.j);
    const std::size_t b = x.axis == EdgeAxis::x ? grid.index(x.i + 1, x.j) : grid.index(x.i, x.j + 1);
    base[a] += correction_term(grid, cls, x, jumps[id], a);
    base[b] += correction_term(grid, cls, x, jumps[id], b);
  }
  return base;
}

GridField solve_interface_system(const GridField& rhs, const CartesianGrid& grid, double kappa) {
  const int I = grid.cells_x(), J = grid.cells_y();
  const double h2 = grid.spacing() * grid.spacing();
  SineTransform dst(J - 1);
  GridField work = rhs;
  for (int i = 1; i < I; ++i) dst.forward(work.column(i).subspan(1, J - 1));

  std::vector<double> col(I - 1);
  for (int k = 1; k < J; ++k) {
    const double s = std::sin(k * std::numbers::pi / (2.0 * J));
    const double lambda = -4.0 / h2 * s * s;
    TridiagonalSystem sys;
    sys.lower.assign(I - 1, 1.0 / h2);
    sys.upper.assign(I - 1, 1.0 / h2);
    sys.diag.assign(I - 1, -2.0 / h2 + lambda - kappa);
    sys.rhs.resize(I - 1);
    for (int i = 1; i < I; ++i) sys.rhs[i - 1] = work(i, k);
    const std::vector<double> x = thomas_solve(sys);
    for (int i = 1; i < I; ++i) work(i, k) = x[i - 1];
  }

  for (int i = 1; i < I; ++i) dst.inverse(work.column(i).subspan(1, J - 1));
  for (int i = 0; i <= I; ++i) {
    work(i, 0) = 0.0;
    work(i, J) = 0.0;
  }
  for (int j = 0; j <= J; ++j) {
    work(0, j) = 0.0;
    work(I, j) = 0.0;
  }
  return work;
}

std::vector<double> dst1(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t j = 1; j <= n; ++j)
      out[k - 1] += x[j - 1] * std::sin(std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(n + 1));
  return out;
}

}  // namespace kfbi::reference
