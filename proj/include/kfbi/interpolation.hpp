#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kfbi/exec.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/jumps.hpp"

namespace kfbi {

/// Six grid nodes around a boundary point z: the five-point cross at the
/// node nearest to z plus the diagonal node toward z.
struct StencilSelection {
  std::size_t control = 0;
  Vec2 point;
  std::array<int, 6> i{}, j{};
  std::array<std::size_t, 6> nodes{};
  std::array<Side, 6> side{};
  /// Rows [1, xi, eta, xi^2/2, xi eta, eta^2/2] with offsets from z in units of h.
  Eigen::Matrix<double, 6, 6> matrix;
  double condition = 0.0;
  bool reselected = false;
};

StencilSelection select_stencil(const CartesianGrid& grid, const NodeClassification& cls, Vec2 z,
                                std::size_t control = 0);

/// Quadratic reconstruction at z from one side of the interface.
struct OneSidedValue {
  double value = 0.0;
  double dx = 0.0, dy = 0.0;
  double dxx = 0.0, dxy = 0.0, dyy = 0.0;
};

/// Values at stencil nodes on the other side of `target` are shifted by the
/// jump Taylor polynomial so all six equations see the `target`-side
/// continuation of the field.
OneSidedValue one_sided_value(const GridField& field, const CartesianGrid& grid,
                              const StencilSelection& sel, const JumpData& jumps,
                              Side target = Side::interior);

double one_sided_normal_derivative(const GridField& field, const CartesianGrid& grid,
                                   const StencilSelection& sel, const JumpData& jumps, Vec2 normal,
                                   Side target = Side::interior);

/// one_sided_value at every selection; jumps[k] belongs to sels[k].
std::vector<OneSidedValue> one_sided_values(const GridField& field, const CartesianGrid& grid,
                                            std::span<const StencilSelection> sels,
                                            std::span<const JumpData> jumps,
                                            Side target = Side::interior,
                                            ExecPolicy exec = ExecPolicy::parallel);

}  // namespace kfbi
