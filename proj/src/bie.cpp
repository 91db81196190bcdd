#include "kfbi/bie.hpp"

#include <cmath>
#include <string>

#include "kfbi/error.hpp"

namespace kfbi {

KfbiGeometry KfbiGeometry::build(const ParametricBoundary& boundary, const CartesianGrid& grid,
                                 double control_spacing, ExecPolicy exec, const WarningSink& warn) {
  KfbiGeometry g{boundary, grid, {}, {}, {}, {}, {}, {}};
  g.cls = classify_nodes(grid, boundary, exec, warn);
  g.xs = find_intersections(grid, g.cls, boundary);
  g.frames.resize(g.xs.items.size());
  parallel_for(static_cast<long>(g.frames.size()), exec,
               [&](long k) { g.frames[k] = boundary.frame_at(g.xs.items[k].arc); });
  g.controls = discretize_boundary(boundary, control_spacing > 0.0 ? control_spacing : 2.0 * grid.spacing());
  const std::size_t M = g.controls.size();
  g.control_frames.resize(M);
  g.stencils.resize(M);
  parallel_for(static_cast<long>(M), exec, [&](long m) {
    const ControlPoint& c = g.controls[m];
    g.control_frames[m] = {c.position, c.tangent, c.normal, c.curvature};
    g.stencils[m] = select_stencil(grid, g.cls, c.position, static_cast<std::size_t>(m));
  });
  return g;
}

std::vector<JumpData> control_jumps(const KfbiGeometry& geo, const InterfaceSpec& spec, ExecPolicy exec) {
  std::vector<JumpData> out(geo.controls.size());
  parallel_for(static_cast<long>(out.size()), exec,
               [&](long m) { out[m] = jumps_at(spec, geo.control_frames[m], geo.controls[m].arc); });
  return out;
}

SerialEvaluator::SerialEvaluator(const KfbiGeometry& geo, double kappa, ExecPolicy exec)
    : geo_(geo), plan_(geo.grid, kappa), exec_(exec) {}

InterfaceResult SerialEvaluator::evaluate(const InterfaceSpec& spec_in, bool need_field) {
  ++solves_;
  InterfaceSpec spec = spec_in;
  spec.kappa = kappa();
  const std::vector<JumpData> jumps = intersection_jumps(spec, geo_.xs, geo_.frames, exec_);
  CorrectedRhs rhs = correct_rhs(base_rhs(spec, geo_.grid, geo_.cls), geo_.grid, geo_.cls, geo_.xs,
                                 jumps, exec_);
  InterfaceResult out;
  GridField v = solve_interface_system(rhs.field, plan_, exec_);
  const std::vector<JumpData> cj = control_jumps(geo_, spec, exec_);
  out.boundary = one_sided_values(v, geo_.grid, geo_.stencils, cj, Side::interior, exec_);
  if (need_field) out.field = std::move(v);
  return out;
}

std::string to_string(Scheme s) { return s == Scheme::gmres ? "gmres" : "richardson"; }
std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

std::vector<double> apply_checked(const LinearOperator& K, std::span<const double> x) {
  std::vector<double> y = K(x);
  if (y.size() != x.size()) fail(ErrorKind::size, "operator changed the vector length");
  return y;
}

}  // namespace

double scaled_norm(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::sqrt(dot(v, v) / static_cast<double>(v.size()));
}

IterativeResult richardson_solve(const LinearOperator& K, std::span<const double> rhs, double gamma,
                                 double tol, int max_iters) {
  if (!(gamma > 0.0 && gamma <= 1.0)) fail(ErrorKind::invalid_parameter, "gamma must lie in (0, 1]");
  if (!(tol > 0.0)) fail(ErrorKind::invalid_parameter, "tolerance must be positive");
  IterativeResult out;
  out.stats.scheme = Scheme::richardson;
  const std::size_t n = rhs.size();
  out.x.assign(n, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  const double r0 = scaled_norm(r);
  out.stats.residuals.push_back(r0 > 0.0 ? 1.0 : 0.0);
  if (r0 == 0.0) {
    out.stats.converged = true;
    return out;
  }
  for (int it = 1; it <= max_iters; ++it) {
    for (std::size_t k = 0; k < n; ++k) out.x[k] += gamma * r[k];
    const std::vector<double> kx = apply_checked(K, out.x);
    ++out.stats.applications;
    for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - kx[k];
    const double rel = scaled_norm(r) / r0;
    out.stats.residuals.push_back(rel);
    out.stats.outer = out.stats.inner = it;
    if (rel < tol) {
      out.stats.converged = true;
      return out;
    }
  }
  fail(ErrorKind::no_convergence, "Richardson iteration did not converge in " +
                                      std::to_string(max_iters) + " iterations (residual " +
                                      std::to_string(out.stats.residuals.back()) + ")");
}

IterativeResult gmres_solve(const LinearOperator& K, std::span<const double> rhs, int restart,
                            double tol, int max_restarts) {
  if (restart < 1) fail(ErrorKind::invalid_parameter, "GMRES restart dimension must be positive");
  if (!(tol > 0.0)) fail(ErrorKind::invalid_parameter, "tolerance must be positive");
  IterativeResult out;
  out.stats.scheme = Scheme::gmres;
  const std::size_t n = rhs.size();
  out.x.assign(n, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  const double beta0 = std::sqrt(dot(r, r));
  out.stats.residuals.push_back(beta0 > 0.0 ? 1.0 : 0.0);
  if (beta0 == 0.0) {
    out.stats.converged = true;
    return out;
  }
  const auto m = static_cast<std::size_t>(restart);
  double beta = beta0;
  for (int cycle = 0; cycle < max_restarts; ++cycle) {
    ++out.stats.outer;
    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) V[0][k] = r[k] / beta;
    g[0] = beta;
    std::size_t dim = 0;
    bool done = false;
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> w = apply_checked(K, V[j]);
      ++out.stats.applications;
      ++out.stats.inner;
      const double wnorm = std::sqrt(dot(w, w));
      for (std::size_t i = 0; i <= j; ++i) {
        H[i][j] = dot(w, V[i]);
        for (std::size_t k = 0; k < n; ++k) w[k] -= H[i][j] * V[i][k];
      }
      const double hnext = std::sqrt(dot(w, w));
      H[j + 1][j] = hnext;
      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      const double denom = std::hypot(H[j][j], H[j + 1][j]);
      if (denom == 0.0) fail(ErrorKind::singular_system, "GMRES Hessenberg matrix is singular");
      cs[j] = H[j][j] / denom;
      sn[j] = H[j + 1][j] / denom;
      H[j][j] = denom;
      H[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      dim = j + 1;
      const double rel = std::abs(g[j + 1]) / beta0;
      out.stats.residuals.push_back(rel);
      const bool lucky = hnext <= 1e-14 * wnorm;
      if (rel < tol || lucky) {
        done = true;
        break;
      }
      for (std::size_t k = 0; k < n; ++k) V[j + 1][k] = w[k] / hnext;
    }
    std::vector<double> y(dim, 0.0);
    for (std::size_t i = dim; i-- > 0;) {
      double s = g[i];
      for (std::size_t l = i + 1; l < dim; ++l) s -= H[i][l] * y[l];
      y[i] = s / H[i][i];
    }
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t k = 0; k < n; ++k) out.x[k] += y[i] * V[i][k];
    if (done) {
      out.stats.converged = true;
      return out;
    }
    const std::vector<double> kx = apply_checked(K, out.x);
    ++out.stats.applications;
    for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - kx[k];
    beta = std::sqrt(dot(r, r));
    if (beta / beta0 < tol) {
      out.stats.converged = true;
      return out;
    }
  }
  fail(ErrorKind::no_convergence, "GMRES did not converge in " + std::to_string(max_restarts) +
                                      " restart cycles (residual " +
                                      std::to_string(beta / beta0) + ")");
}

namespace {

std::vector<double> extract(const InterfaceResult& res, const KfbiGeometry& geo, PotentialMode mode) {
  std::vector<double> out(res.boundary.size());
  for (std::size_t m = 0; m < out.size(); ++m) {
    const OneSidedValue& v = res.boundary[m];
    const Vec2 n = geo.controls[m].normal;
    out[m] = mode == PotentialMode::value ? v.value : n.x * v.dx + n.y * v.dy;
  }
  return out;
}

void check_density(const InterfaceEvaluator& ev, std::span<const double> d) {
  if (d.size() != ev.geometry().controls.size())
    fail(ErrorKind::length_mismatch, "density length differs from the control point count");
}

}  // namespace

std::vector<double> eval_volume_potential(InterfaceEvaluator& ev, const SourceTerm& f, PotentialMode mode) {
  InterfaceSpec spec;
  spec.source = &f;
  return extract(ev.evaluate(spec, false), ev.geometry(), mode);
}

std::vector<double> apply_KD(InterfaceEvaluator& ev, std::span<const double> phi) {
  check_density(ev, phi);
  const DensityField d = fit_density(ev.geometry().controls, phi);
  InterfaceSpec spec;
  spec.value_jump = &d;
  return extract(ev.evaluate(spec, false), ev.geometry(), PotentialMode::value);
}

std::vector<double> apply_KN(InterfaceEvaluator& ev, std::span<const double> psi) {
  check_density(ev, psi);
  const DensityField d = fit_density(ev.geometry().controls, psi);
  InterfaceSpec spec;
  spec.flux_jump = &d;
  return extract(ev.evaluate(spec, false), ev.geometry(), PotentialMode::normal_derivative);
}

namespace {

Solution solve_impl(InterfaceEvaluator& ev, const BvpSpec& spec, BoundaryCondition bc) {
  const SolverOptions& o = spec.options;
  if (!(o.tol > 0.0)) fail(ErrorKind::invalid_parameter, "tolerance must be positive");
  if (o.scheme == Scheme::richardson && !(o.gamma > 0.0 && o.gamma <= 1.0))
    fail(ErrorKind::invalid_parameter, "gamma must lie in (0, 1]");
  if (!spec.boundary_data) fail(ErrorKind::invalid_parameter, "boundary data missing");
  if (bc == BoundaryCondition::neumann && ev.kappa() == 0.0)
    fail(ErrorKind::unsupported, "Neumann problems need kappa > 0 (the kappa = 0 case has a nullspace)");

  const KfbiGeometry& geo = ev.geometry();
  const std::size_t start = ev.solves();
  const PotentialMode mode = bc == BoundaryCondition::dirichlet ? PotentialMode::value
                                                                 : PotentialMode::normal_derivative;
  Solution sol;
  sol.rhs.resize(geo.controls.size());
  for (std::size_t m = 0; m < sol.rhs.size(); ++m) sol.rhs[m] = spec.boundary_data(geo.controls[m]);
  if (spec.source) {
    const std::vector<double> y = eval_volume_potential(ev, *spec.source, mode);
    for (std::size_t m = 0; m < y.size(); ++m) sol.rhs[m] -= y[m];
  }

  const LinearOperator K = [&](std::span<const double> d) {
    return bc == BoundaryCondition::dirichlet ? apply_KD(ev, d) : apply_KN(ev, d);
  };
  IterativeResult it = o.scheme == Scheme::gmres
                           ? gmres_solve(K, sol.rhs, o.restart, o.tol, o.max_restarts)
                           : richardson_solve(K, sol.rhs, o.gamma, o.tol, o.max_iters);
  sol.density = std::move(it.x);
  sol.stats = std::move(it.stats);

  const DensityField d = fit_density(geo.controls, sol.density);
  InterfaceSpec final_spec;
  (bc == BoundaryCondition::dirichlet ? final_spec.value_jump : final_spec.flux_jump) = &d;
  final_spec.source = spec.source;
  InterfaceResult res = ev.evaluate(final_spec, true);
  sol.boundary_values = extract(res, geo, mode);
  sol.u = std::move(res.field);
  sol.stats.interface_solves = ev.solves() - start;
  return sol;
}

}  // namespace

Solution solve_dirichlet(InterfaceEvaluator& ev, const BvpSpec& spec) {
  return solve_impl(ev, spec, BoundaryCondition::dirichlet);
}

Solution solve_neumann(InterfaceEvaluator& ev, const BvpSpec& spec) {
  return solve_impl(ev, spec, BoundaryCondition::neumann);
}

Solution solve_bvp(InterfaceEvaluator& ev, const BvpSpec& spec) { return solve_impl(ev, spec, spec.bc); }

}  // namespace kfbi
