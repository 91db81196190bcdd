#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"

namespace kfbi {

/// Periodic cubic spline on the uniform knots s_m = m * period / M.
class PeriodicSpline {
public:
  PeriodicSpline() = default;
  PeriodicSpline(double period, std::vector<double> values);

  struct Eval {
    double value, first, second;
  };

  Eval eval(double s) const;
  double value(double s) const { return eval(s).value; }
  double first(double s) const { return eval(s).first; }
  double second(double s) const { return eval(s).second; }

  std::size_t size() const { return values_.size(); }
  double period() const { return period_; }
  std::span<const double> values() const { return values_; }

private:
  double period_ = 1.0;
  double step_ = 1.0;
  std::vector<double> values_;
  std::vector<double> second_;  // spline second derivatives at knots
};

/// Boundary density g(s) on the control points with its periodic spline.
class DensityField {
public:
  DensityField() = default;
  const PeriodicSpline& spline() const { return spline_; }
  std::span<const double> values() const { return spline_.values(); }
  PeriodicSpline::Eval eval(double s) const { return spline_.eval(s); }

  friend DensityField fit_density(const ControlPointSet& points, std::span<const double> values);

private:
  PeriodicSpline spline_;
};

DensityField fit_density(const ControlPointSet& points, std::span<const double> values);

/// Right-hand side f of the volume potential. Either an analytic function or
/// node samples; sampled sources are evaluated on the curve by a local
/// quadratic least-squares fit over nearby interior nodes.
class SourceTerm {
public:
  static SourceTerm analytic(std::function<double(Vec2)> f);
  static SourceTerm sampled(const CartesianGrid& grid, const NodeClassification& cls,
                            GridField samples);

  double at_node(const CartesianGrid& grid, int i, int j) const;
  double at_boundary(Vec2 p) const;

private:
  std::function<double(Vec2)> fn_;
  std::shared_ptr<const struct SampledSource> sampled_;
};

struct JumpData {
  double v = 0.0;
  double vx = 0.0, vy = 0.0;
  double vxx = 0.0, vxy = 0.0, vyy = 0.0;
};

enum class InterfaceCase { none, double_layer, single_layer, volume, combined };

/// Interface problem  Lap v - kappa v = F off Gamma, [v] = Phi, [d_n v] = Psi,
/// v = 0 on the box, with F the zero extension of `source`. Null members are
/// zero. Jumps are interior minus exterior.
struct InterfaceSpec {
  const DensityField* value_jump = nullptr;  // Phi
  const DensityField* flux_jump = nullptr;   // Psi
  const SourceTerm* source = nullptr;
  double kappa = 0.0;

  InterfaceCase kind() const;
};

/// The six jumps at arc position s with frame `f` (frame must belong to s).
JumpData jumps_at(const InterfaceSpec& spec, const BoundaryFrame& f, double s);

/// Same, when [F] at the point is already known.
JumpData jumps_from(double phi, double dphi, double ddphi, double psi, double dpsi,
                    double source_jump, double kappa, const BoundaryFrame& f);

}  // namespace kfbi
