#pragma once

#include <span>
#include <vector>

#include "kfbi/correction.hpp"
#include "kfbi/fast_poisson.hpp"

// Straightforward serial versions of the parallel kernels, kept for tests
// and benchmarks.
namespace kfbi::reference {

/// Loops over intersections and scatters each correction to both edge
/// endpoints.
GridField correct_rhs(GridField base, const CartesianGrid& grid, const NodeClassification& cls,
                      const IntersectionSet& xs, std::span<const JumpData> jumps);

/// Column-by-column transform, one freshly assembled tridiagonal solve per
/// mode, inverse transform.
GridField solve_interface_system(const GridField& rhs, const CartesianGrid& grid, double kappa);

/// O(n^2) DST-I sum.
std::vector<double> dst1(std::span<const double> x);

}  // namespace kfbi::reference
