#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kfbi/exec.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/vec2.hpp"

namespace kfbi {

struct Box {
  double x_lo = -1.0, x_hi = 1.0;
  double y_lo = -1.0, y_hi = 1.0;
};

/// Uniform node-centred grid on a box with equal spacing in x and y.
/// Nodes are stored column-major: index(i, j) = i * (J + 1) + j, so a grid
/// column (fixed i) is contiguous along y.
class CartesianGrid {
public:
  static CartesianGrid build(const Box& box, int cells_x, int cells_y);

  const Box& box() const { return box_; }
  int cells_x() const { return nx_; }
  int cells_y() const { return ny_; }
  int nodes_x() const { return nx_ + 1; }
  int nodes_y() const { return ny_ + 1; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(nx_ + 1) * static_cast<std::size_t>(ny_ + 1);
  }
  double spacing() const { return h_; }

  double x(int i) const { return cx_ + (i - 0.5 * nx_) * h_; }
  double y(int j) const { return cy_ + (j - 0.5 * ny_) * h_; }
  Vec2 node(int i, int j) const { return {x(i), y(j)}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny_ + 1) +
           static_cast<std::size_t>(j);
  }
  bool on_box_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx_ || j == ny_; }

private:
  Box box_;
  int nx_ = 0, ny_ = 0;
  double h_ = 0.0, cx_ = 0.0, cy_ = 0.0;
};

/// Scalar field on every grid node.
class GridField {
public:
  GridField() = default;
  explicit GridField(const CartesianGrid& g, double fill = 0.0)
      : nx_(g.nodes_x()), ny_(g.nodes_y()), values_(g.node_count(), fill) {}

  int nodes_x() const { return nx_; }
  int nodes_y() const { return ny_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[idx(i, j)]; }
  double operator()(int i, int j) const { return values_[idx(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> column(int i) {
    return {values_.data() + idx(i, 0), static_cast<std::size_t>(ny_)};
  }
  std::span<const double> column(int i) const {
    return {values_.data() + idx(i, 0), static_cast<std::size_t>(ny_)};
  }
  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }

  bool operator==(const GridField&) const = default;

private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny_) + static_cast<std::size_t>(j);
  }
  int nx_ = 0, ny_ = 0;
  std::vector<double> values_;
};

struct NodeClassification {
  std::vector<Side> side;
  std::vector<std::uint8_t> irregular;
  std::vector<std::size_t> irregular_nodes;  // ascending node indices
  std::size_t interior_count = 0;

  bool interior(std::size_t k) const { return side[k] == Side::interior; }
};

/// Receives non-fatal diagnostics (e.g. small clearance between the curve
/// and the box). Defaults to a no-op.
using WarningSink = std::function<void(const std::string&)>;

NodeClassification classify_nodes(const CartesianGrid& grid, const ParametricBoundary& boundary,
                                  ExecPolicy exec = ExecPolicy::parallel,
                                  const WarningSink& warn = {});

enum class EdgeAxis : unsigned char { x, y };

/// Crossing of the curve with the grid edge from node (i, j) to (i+1, j)
/// (axis x) or to (i, j+1) (axis y).
struct Intersection {
  EdgeAxis axis = EdgeAxis::x;
  Vec2 point;
  double arc = 0.0;
  int i = 0, j = 0;
};

struct IntersectionSet {
  std::vector<Intersection> items;
  // Per-node incidence (CSR): intersections on edges touching node k are
  // ids[offsets[k] .. offsets[k+1]).
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;

  std::span<const std::size_t> incident(std::size_t node) const {
    return {ids.data() + offsets[node], offsets[node + 1] - offsets[node]};
  }
};

IntersectionSet find_intersections(const CartesianGrid& grid, const NodeClassification& cls,
                                   const ParametricBoundary& boundary);

}  // namespace kfbi
