#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kfbi/correction.hpp"
#include "kfbi/exec.hpp"
#include "kfbi/fast_poisson.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/interpolation.hpp"
#include "kfbi/jumps.hpp"

namespace kfbi {

/// Everything about the boundary/grid pair that does not depend on the
/// densities: classification, intersections with their frames, control
/// points and their interpolation stencils.
struct KfbiGeometry {
  ParametricBoundary boundary;
  CartesianGrid grid;
  NodeClassification cls;
  IntersectionSet xs;
  std::vector<BoundaryFrame> frames;  // per intersection
  ControlPointSet controls;
  std::vector<BoundaryFrame> control_frames;
  std::vector<StencilSelection> stencils;

  /// control_spacing <= 0 selects the default 2h.
  static KfbiGeometry build(const ParametricBoundary& boundary, const CartesianGrid& grid,
                            double control_spacing = 0.0, ExecPolicy exec = ExecPolicy::parallel,
                            const WarningSink& warn = {});
};

struct InterfaceResult {
  GridField field;                      // empty unless requested
  std::vector<OneSidedValue> boundary;  // interior-side reconstruction per control point
};

/// Solves interface problems on a fixed geometry and extracts one-sided
/// boundary data at the control points.
class InterfaceEvaluator {
public:
  virtual ~InterfaceEvaluator() = default;
  virtual const KfbiGeometry& geometry() const = 0;
  virtual double kappa() const = 0;
  virtual int workers() const { return 1; }
  virtual InterfaceResult evaluate(const InterfaceSpec& spec, bool need_field) = 0;
  std::size_t solves() const { return solves_; }

protected:
  std::size_t solves_ = 0;
};

/// Jumps of `spec` at every control point.
std::vector<JumpData> control_jumps(const KfbiGeometry& geo, const InterfaceSpec& spec,
                                    ExecPolicy exec = ExecPolicy::parallel);

class SerialEvaluator final : public InterfaceEvaluator {
public:
  SerialEvaluator(const KfbiGeometry& geo, double kappa, ExecPolicy exec = ExecPolicy::parallel);

  const KfbiGeometry& geometry() const override { return geo_; }
  double kappa() const override { return plan_.kappa(); }
  InterfaceResult evaluate(const InterfaceSpec& spec, bool need_field) override;

private:
  const KfbiGeometry& geo_;
  SpectralPlan plan_;
  ExecPolicy exec_;
};

enum class Scheme { gmres, richardson };
enum class BoundaryCondition { dirichlet, neumann };

std::string to_string(Scheme s);
std::string to_string(BoundaryCondition bc);

struct SolverOptions {
  Scheme scheme = Scheme::gmres;
  double tol = 1e-8;
  int restart = 30;
  int max_restarts = 50;
  double gamma = 0.8;
  int max_iters = 2000;
};

struct IterationStats {
  Scheme scheme = Scheme::gmres;
  int outer = 0;  // restart cycles (GMRES) or iterations (Richardson)
  int inner = 0;  // total Arnoldi steps (GMRES) or iterations (Richardson)
  std::size_t applications = 0;
  std::size_t interface_solves = 0;
  std::vector<double> residuals;  // relative residual history, starting at 1
  bool converged = false;
};

using LinearOperator = std::function<std::vector<double>(std::span<const double>)>;

struct IterativeResult {
  std::vector<double> x;
  IterationStats stats;
};

/// Scaled discrete l2 norm sqrt(sum v^2 / M), summed in index order.
double scaled_norm(std::span<const double> v);

IterativeResult richardson_solve(const LinearOperator& K, std::span<const double> rhs, double gamma,
                                 double tol, int max_iters = 2000);
IterativeResult gmres_solve(const LinearOperator& K, std::span<const double> rhs, int restart,
                            double tol, int max_restarts = 50);

enum class PotentialMode { value, normal_derivative };

/// Boundary values of the volume potential Yf (or its normal derivative).
std::vector<double> eval_volume_potential(InterfaceEvaluator& ev, const SourceTerm& f,
                                          PotentialMode mode);
/// phi -> u+ of the interface problem with [v] = phi.
std::vector<double> apply_KD(InterfaceEvaluator& ev, std::span<const double> phi);
/// psi -> d_n u+ of the interface problem with [d_n v] = psi.
std::vector<double> apply_KN(InterfaceEvaluator& ev, std::span<const double> psi);

struct BvpSpec {
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  /// g_D or g_N at a control point.
  std::function<double(const ControlPoint&)> boundary_data;
  const SourceTerm* source = nullptr;  // f, may be null (f = 0)
  SolverOptions options;
};

struct Solution {
  /// Interface solution on every node; physically meaningful at interior nodes.
  GridField u;
  std::vector<double> boundary_values;  // u+ (Dirichlet) or d_n u+ (Neumann)
  std::vector<double> density;
  std::vector<double> rhs;              // the data g-hat of the boundary equation
  IterationStats stats;
};

Solution solve_dirichlet(InterfaceEvaluator& ev, const BvpSpec& spec);
Solution solve_neumann(InterfaceEvaluator& ev, const BvpSpec& spec);
Solution solve_bvp(InterfaceEvaluator& ev, const BvpSpec& spec);

}  // namespace kfbi
