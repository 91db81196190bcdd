#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kfbi/vec2.hpp"

namespace kfbi {

enum class CurveKind { circle, ellipse, star };

enum class Side : unsigned char { interior, exterior };

/// Shape parameters in box length units. Only the fields relevant to the
/// chosen kind are read.
struct CurveParams {
  double radius = 1.0;     // circle radius, star base radius
  double semi_a = 1.0;     // ellipse x semi-axis
  double semi_b = 1.0;     // ellipse y semi-axis
  double amplitude = 0.0;  // star c
  int folds = 4;           // star m
  double rotation = 0.0;   // radians, counter-clockwise about the center
};

struct BoundaryFrame {
  Vec2 point;
  Vec2 tangent;    // unit, counter-clockwise orientation
  Vec2 normal;     // unit, outward
  double curvature = 0.0;
};

/// Closed counter-clockwise curve gamma(t), t in [0,1), with a tabulated
/// arc-length map. Immutable after construction.
class ParametricBoundary {
public:
  static ParametricBoundary build(CurveKind kind, const CurveParams& params,
                                  Vec2 center = {});

  CurveKind kind() const { return kind_; }
  const CurveParams& params() const { return params_; }
  Vec2 center() const { return center_; }
  double perimeter() const { return perimeter_; }

  Vec2 position(double t) const;
  Vec2 derivative(double t) const;
  Vec2 second_derivative(double t) const;
  double speed(double t) const { return norm(derivative(t)); }

  /// Arc length from t=0 to t (t wraps modulo 1).
  double arc_length(double t) const;
  /// Inverse of arc_length; s wraps modulo the perimeter.
  double parameter_at(double s) const;

  BoundaryFrame frame_at_parameter(double t) const;
  BoundaryFrame frame_at(double s) const { return frame_at_parameter(parameter_at(s)); }

  /// Non-positive inside (and on) the curve, positive outside.
  double level(Vec2 p) const;
  Side side_of(Vec2 p) const { return level(p) <= 0.0 ? Side::interior : Side::exterior; }

  /// Parameter of a point lying on the curve (exact inverse of position).
  double parameter_of_point(Vec2 p) const;

  std::span<const double> arc_table() const { return arc_table_; }

private:
  ParametricBoundary() = default;
  Vec2 to_local(Vec2 p) const;
  Vec2 from_local(Vec2 q) const;
  double subinterval_length(double t0, double t1) const;

  CurveKind kind_ = CurveKind::circle;
  CurveParams params_;
  Vec2 center_;
  double perimeter_ = 0.0;
  std::vector<double> arc_table_;  // arc_table_[k] = s(k/N), size N+1
};

struct ControlPoint {
  Vec2 position;
  double arc = 0.0;
  Vec2 normal;
  Vec2 tangent;
  double curvature = 0.0;
};

/// Control points at equal arc-length increments L/M, starting at s = 0.
class ControlPointSet {
public:
  ControlPointSet() = default;
  ControlPointSet(std::vector<ControlPoint> points, double perimeter)
      : points_(std::move(points)), perimeter_(perimeter) {}

  std::size_t size() const { return points_.size(); }
  const ControlPoint& operator[](std::size_t m) const { return points_[m]; }
  std::span<const ControlPoint> points() const { return points_; }
  double perimeter() const { return perimeter_; }
  double spacing() const { return perimeter_ / static_cast<double>(points_.size()); }

private:
  std::vector<ControlPoint> points_;
  double perimeter_ = 0.0;
};

ControlPointSet discretize_boundary(const ParametricBoundary& b, double spacing_target);
ControlPointSet discretize_boundary_count(const ParametricBoundary& b, std::size_t count);

}  // namespace kfbi
