#pragma once

#include <span>
#include <vector>

#include "kfbi/exec.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/jumps.hpp"

namespace kfbi {

struct CorrectionEntry {
  std::size_t node = 0;
  std::size_t intersection = 0;
  double value = 0.0;
};

struct CorrectedRhs {
  GridField field;
  std::vector<CorrectionEntry> log;  // empty unless requested
};

/// Zero extension of the source: f at interior nodes, 0 elsewhere. All-zero
/// when the spec has no source.
GridField base_rhs(const InterfaceSpec& spec, const CartesianGrid& grid,
                   const NodeClassification& cls);

/// Jumps of the interface solution at every intersection, in IntersectionSet
/// order. `frames[k]` is the boundary frame at intersections.items[k].
std::vector<JumpData> intersection_jumps(const InterfaceSpec& spec, const IntersectionSet& xs,
                                         std::span<const BoundaryFrame> frames,
                                         ExecPolicy exec = ExecPolicy::parallel);

/// Adds the Taylor jump corrections of the five-point scheme at irregular
/// nodes. For an edge from node p to its neighbour q across Gamma, with d
/// the signed axis offset from the intersection to q,
///   P(d) = [v] + [v_a] d + 1/2 [v_aa] d^2,
/// p's equation receives -P(d)/h^2 if p is interior and +P(d)/h^2 if p is
/// exterior. Each node only reads its own edges, so nodes are independent.
CorrectedRhs correct_rhs(GridField base, const CartesianGrid& grid, const NodeClassification& cls,
                         const IntersectionSet& xs, std::span<const JumpData> jumps,
                         ExecPolicy exec = ExecPolicy::parallel, bool keep_log = false);

/// As correct_rhs, restricted to node columns [col_begin, col_end).
void correct_rhs_columns(GridField& rhs, const CartesianGrid& grid, const NodeClassification& cls,
                         const IntersectionSet& xs, std::span<const JumpData> jumps, int col_begin,
                         int col_end, ExecPolicy exec = ExecPolicy::parallel);

/// Correction contributed to `node` by the intersection `id`.
double correction_term(const CartesianGrid& grid, const NodeClassification& cls,
                       const Intersection& x, const JumpData& jump, std::size_t node);

}  // namespace kfbi
