#include "kfbi/correction.hpp"

#include <algorithm>

#include "kfbi/error.hpp"

namespace kfbi {

GridField base_rhs(const InterfaceSpec& spec, const CartesianGrid& grid,
                   const NodeClassification& cls) {
  GridField f(grid, 0.0);
  if (!spec.source) return f;
  for (int i = 0; i < grid.nodes_x(); ++i)
    for (int j = 0; j < grid.nodes_y(); ++j)
      if (cls.interior(grid.index(i, j))) f(i, j) = spec.source->at_node(grid, i, j);
  return f;
}

std::vector<JumpData> intersection_jumps(const InterfaceSpec& spec, const IntersectionSet& xs,
                                         std::span<const BoundaryFrame> frames, ExecPolicy exec) {
  if (frames.size() != xs.items.size())
    fail(ErrorKind::missing_jump, "frame count does not match intersection count");
  std::vector<JumpData> out(xs.items.size());
  parallel_for(static_cast<long>(xs.items.size()), exec,
               [&](long k) { out[k] = jumps_at(spec, frames[k], xs.items[k].arc); });
  return out;
}

double correction_term(const CartesianGrid& grid, const NodeClassification& cls,
                       const Intersection& x, const JumpData& jump, std::size_t node) {
  const double h = grid.spacing();
  const std::size_t low = grid.index(x.i, x.j);
  const bool along_x = x.axis == EdgeAxis::x;
  const int fi = node == low ? (along_x ? x.i + 1 : x.i) : x.i;
  const int fj = node == low ? (along_x ? x.j : x.j + 1) : x.j;
  const double d = along_x ? grid.x(fi) - x.point.x : grid.y(fj) - x.point.y;
  const double first = along_x ? jump.vx : jump.vy;
  const double second = along_x ? jump.vxx : jump.vyy;
  const double taylor = jump.v + first * d + 0.5 * second * d * d;
  return cls.interior(node) ? -taylor / (h * h) : taylor / (h * h);
}

void correct_rhs_columns(GridField& rhs, const CartesianGrid& grid, const NodeClassification& cls,
                         const IntersectionSet& xs, std::span<const JumpData> jumps, int col_begin,
                         int col_end, ExecPolicy exec) {
  if (jumps.size() != xs.items.size())
    fail(ErrorKind::missing_jump, "jump data missing for some intersections");
  const std::size_t lo = grid.index(col_begin, 0), hi = grid.index(col_end, 0);
  const auto first = std::lower_bound(cls.irregular_nodes.begin(), cls.irregular_nodes.end(), lo);
  const auto last = std::lower_bound(cls.irregular_nodes.begin(), cls.irregular_nodes.end(), hi);
  const std::size_t* nodes = cls.irregular_nodes.data();
  const auto b = static_cast<long>(first - cls.irregular_nodes.begin());
  const auto e = static_cast<long>(last - cls.irregular_nodes.begin());
#pragma omp parallel for if (is_parallel(exec)) schedule(static)
  for (long r = b; r < e; ++r) {
    const std::size_t node = nodes[r];
    double sum = 0.0;
    for (std::size_t id : xs.incident(node))
      sum += correction_term(grid, cls, xs.items[id], jumps[id], node);
    rhs[node] += sum;
  }
}

CorrectedRhs correct_rhs(GridField base, const CartesianGrid& grid, const NodeClassification& cls,
                         const IntersectionSet& xs, std::span<const JumpData> jumps,
                         ExecPolicy exec, bool keep_log) {
  CorrectedRhs out;
  out.field = std::move(base);
  correct_rhs_columns(out.field, grid, cls, xs, jumps, 0, grid.nodes_x(), exec);
  if (keep_log) {
    for (std::size_t node : cls.irregular_nodes)
      for (std::size_t id : xs.incident(node))
        out.log.push_back({node, id, correction_term(grid, cls, xs.items[id], jumps[id], node)});
  }
  return out;
}

}  // namespace kfbi
