#pragma once

#include <memory>
#include <span>
#include <vector>

#include "kfbi/exec.hpp"
#include "kfbi/grid.hpp"

namespace kfbi {

/// DST-I of length n:  X_k = sum_{j=1}^{n} x_j sin(pi j k / (n+1)).
/// The inverse carries the 2/(n+1) factor, so inverse(forward(x)) == x.
class SineTransform {
public:
  explicit SineTransform(int n);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  int size() const { return n_; }
  void forward(std::span<double> data) const;
  void inverse(std::span<double> data) const;

private:
  void execute(std::span<double> data, double scale) const;
  int n_;
  void* plan_ = nullptr;
};

struct TridiagonalSystem {
  std::vector<double> lower;  // lower[0] unused
  std::vector<double> diag;
  std::vector<double> upper;  // upper[n-1] unused
  std::vector<double> rhs;

  std::size_t size() const { return diag.size(); }
};

/// Thomas algorithm without pivoting. Throws zero_pivot on a vanishing pivot.
std::vector<double> thomas_solve(const TridiagonalSystem& sys);

/// In-place Thomas on a strided right-hand side: x[k * stride] for k < n.
void thomas_solve_inplace(std::span<const double> lower, std::span<const double> diag,
                          std::span<const double> upper, double* x, std::size_t n,
                          std::size_t stride = 1);

/// Precomputed data for the five-point modified-Helmholtz solve on a grid
/// with homogeneous Dirichlet box data: sine transform along y, one
/// tridiagonal system along x per sine mode.
class SpectralPlan {
public:
  SpectralPlan(const CartesianGrid& grid, double kappa);

  const CartesianGrid& grid() const { return grid_; }
  double kappa() const { return kappa_; }
  int modes() const { return grid_.cells_y() - 1; }
  int unknowns_x() const { return grid_.cells_x() - 1; }
  /// lambda_k = -(4/h^2) sin^2(k pi / (2J)), k = 1..J-1 (index k-1).
  std::span<const double> eigenvalues() const { return eigen_; }
  /// Tridiagonal along x for mode k (1-based), size I-1.
  TridiagonalSystem mode_system(int k) const;
  const SineTransform& transform() const { return *transform_; }

  /// Thomas pivots of every mode: pivot(i, k) for unknown i (0-based) and
  /// mode k (1-based) stored at [i * modes + (k-1)].
  std::span<const double> pivots() const { return pivots_; }
  std::span<const double> upper_factors() const { return cprime_; }

private:
  CartesianGrid grid_;
  double kappa_;
  std::vector<double> eigen_;
  std::vector<double> pivots_;
  std::vector<double> cprime_;
  std::shared_ptr<SineTransform> transform_;
};

/// Solves (L_h - kappa) v = rhs at interior box nodes with v = 0 on the box.
/// Entries of rhs on the box boundary are ignored.
GridField solve_interface_system(const GridField& rhs, const SpectralPlan& plan,
                                 ExecPolicy exec = ExecPolicy::parallel);

/// Five-point residual (L_h v - kappa v - f) at interior box nodes, max-norm.
double five_point_residual(const GridField& v, const GridField& f, const CartesianGrid& grid,
                           double kappa);

}  // namespace kfbi
