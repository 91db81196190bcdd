#include "kfbi/fast_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "kfbi/error.hpp"

namespace kfbi {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SineTransform::SineTransform(int n) : n_(n) {
  if (n < 1) fail(ErrorKind::size, "sine transform needs at least one interior point");
  std::vector<double> scratch(static_cast<std::size_t>(n), 0.0);
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_r2r_1d(n, scratch.data(), scratch.data(), FFTW_RODFT00,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_) fail(ErrorKind::size, "could not plan a sine transform of length " + std::to_string(n));
}

SineTransform::~SineTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void SineTransform::execute(std::span<double> data, double scale) const {
  if (data.size() != static_cast<std::size_t>(n_))
    fail(ErrorKind::size, "sine transform length mismatch");
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), data.data(), data.data());
  for (double& v : data) v *= scale;
}

// FFTW's RODFT00 is twice the unnormalised DST-I.
void SineTransform::forward(std::span<double> data) const { execute(data, 0.5); }
void SineTransform::inverse(std::span<double> data) const { execute(data, 1.0 / (n_ + 1)); }

void thomas_solve_inplace(std::span<const double> lower, std::span<const double> diag,
                          std::span<const double> upper, double* x, std::size_t n,
                          std::size_t stride) {
  if (n == 0) return;
  if (diag.size() < n || lower.size() < n || upper.size() < n)
    fail(ErrorKind::size, "tridiagonal arrays shorter than the system");
  std::vector<double> cprime(n);
  double denom = diag[0];
  if (denom == 0.0 || !std::isfinite(denom)) fail(ErrorKind::zero_pivot, "zero pivot at row 0");
  cprime[0] = n > 1 ? upper[0] / denom : 0.0;
  x[0] = x[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * cprime[i - 1];
    if (denom == 0.0 || !std::isfinite(denom))
      fail(ErrorKind::zero_pivot, "zero pivot at row " + std::to_string(i));
    cprime[i] = i + 1 < n ? upper[i] / denom : 0.0;
    x[i * stride] = (x[i * stride] - lower[i] * x[(i - 1) * stride]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i * stride] -= cprime[i] * x[(i + 1) * stride];
}

std::vector<double> thomas_solve(const TridiagonalSystem& sys) {
  const std::size_t n = sys.size();
  if (sys.lower.size() != n || sys.upper.size() != n || sys.rhs.size() != n)
    fail(ErrorKind::size, "inconsistent tridiagonal system lengths");
  std::vector<double> x = sys.rhs;
  thomas_solve_inplace(sys.lower, sys.diag, sys.upper, x.data(), n);
  return x;
}

SpectralPlan::SpectralPlan(const CartesianGrid& grid, double kappa) : grid_(grid), kappa_(kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    fail(ErrorKind::invalid_parameter, "kappa must be finite and non-negative");
  const int J = grid.cells_y();
  const double h = grid.spacing();
  eigen_.resize(static_cast<std::size_t>(J - 1));
  for (int k = 1; k < J; ++k) {
    const double s = std::sin(k * std::numbers::pi / (2.0 * J));
    eigen_[k - 1] = -(4.0 / (h * h)) * s * s;
  }
  transform_ = std::make_shared<SineTransform>(J - 1);

  const auto n = static_cast<std::size_t>(unknowns_x());
  const auto nm = static_cast<std::size_t>(modes());
  pivots_.resize(n * nm);
  cprime_.resize(n * nm);
  const double off = 1.0 / (h * h);
  for (std::size_t k = 0; k < nm; ++k) {
    const double d = -2.0 / (h * h) + eigen_[k] - kappa_;
    if (std::abs(d) < 2.0 * off) fail(ErrorKind::singular_system, "mode system not diagonally dominant");
    double denom = d;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) denom = d - off * cprime_[(i - 1) * nm + k];
      pivots_[i * nm + k] = denom;
      cprime_[i * nm + k] = i + 1 < n ? off / denom : 0.0;
    }
  }
}

TridiagonalSystem SpectralPlan::mode_system(int k) const {
  const auto n = static_cast<std::size_t>(unknowns_x());
  const double h = grid_.spacing();
  const double off = 1.0 / (h * h);
  TridiagonalSystem sys;
  sys.lower.assign(n, off);
  sys.upper.assign(n, off);
  sys.diag.assign(n, -2.0 / (h * h) + eigen_[static_cast<std::size_t>(k - 1)] - kappa_);
  sys.rhs.assign(n, 0.0);
  return sys;
}

GridField solve_interface_system(const GridField& rhs, const SpectralPlan& plan, ExecPolicy exec) {
  const CartesianGrid& g = plan.grid();
  const int I = g.cells_x(), J = g.cells_y();
  const bool par = is_parallel(exec);
  GridField v = rhs;
  const SineTransform& fst = plan.transform();

#pragma omp parallel for if (par) schedule(static)
  for (int i = 1; i < I; ++i) fst.forward(v.column(i).subspan(1, static_cast<std::size_t>(J - 1)));

  // Batched Thomas along x; each block of modes is swept over all x rows.
  const auto nm = static_cast<std::size_t>(plan.modes());
  const auto n = static_cast<std::size_t>(plan.unknowns_x());
  const double h = g.spacing();
  const double off = 1.0 / (h * h);
  const std::span<const double> piv = plan.pivots(), cp = plan.upper_factors();
  const auto stride = static_cast<std::size_t>(g.nodes_y());
  double* base = v.data().data();
  constexpr std::size_t block = 64;
  const auto blocks = static_cast<long>((nm + block - 1) / block);
#pragma omp parallel for if (par) schedule(static)
  for (long b = 0; b < blocks; ++b) {
    const std::size_t k0 = static_cast<std::size_t>(b) * block;
    const std::size_t k1 = std::min(nm, k0 + block);
    // Row u (0-based unknown) is grid column u+1; mode k (0-based) is y-index k+1.
    auto at = [&](std::size_t u, std::size_t k) -> double& { return base[(u + 1) * stride + k + 1]; };
    for (std::size_t k = k0; k < k1; ++k) at(0, k) = at(0, k) / piv[k];
    for (std::size_t u = 1; u < n; ++u)
      for (std::size_t k = k0; k < k1; ++k) at(u, k) = (at(u, k) - off * at(u - 1, k)) / piv[u * nm + k];
    for (std::size_t u = n - 1; u-- > 0;)
      for (std::size_t k = k0; k < k1; ++k) at(u, k) -= cp[u * nm + k] * at(u + 1, k);
  }

#pragma omp parallel for if (par) schedule(static)
  for (int i = 1; i < I; ++i) fst.inverse(v.column(i).subspan(1, static_cast<std::size_t>(J - 1)));

  for (int j = 0; j <= J; ++j) {
    v(0, j) = 0.0;
    v(I, j) = 0.0;
  }
  for (int i = 0; i <= I; ++i) {
    v(i, 0) = 0.0;
    v(i, J) = 0.0;
  }
  return v;
}

double five_point_residual(const GridField& v, const GridField& f, const CartesianGrid& grid,
                           double kappa) {
  const double h2 = grid.spacing() * grid.spacing();
  double worst = 0.0;
  for (int i = 1; i < grid.cells_x(); ++i)
    for (int j = 1; j < grid.cells_y(); ++j) {
      const double lap = (v(i + 1, j) + v(i - 1, j) + v(i, j + 1) + v(i, j - 1) - 4.0 * v(i, j)) / h2;
      worst = std::max(worst, std::abs(lap - kappa * v(i, j) - f(i, j)));
    }
  return worst;
}

}  // namespace kfbi
