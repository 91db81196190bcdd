#include "kfbi/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "kfbi/error.hpp"
#include "kfbi/partition.hpp"

namespace kfbi {

void GrayScottParams::validate() const {
  for (double v : {gamma, kappa_r, eps0, eps1, eps2, dt, t_end})
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorKind::invalid_parameter, "Gray-Scott parameters must be positive and finite");
}

StateUV gray_scott_initial(const KfbiGeometry& geo) {
  const CartesianGrid& g = geo.grid;
  StateUV s{GridField(g, 0.0), GridField(g, 0.0)};
  for (int i = 0; i < g.nodes_x(); ++i)
    for (int j = 0; j < g.nodes_y(); ++j) {
      if (!geo.cls.interior(g.index(i, j))) continue;
      const double x = g.x(i), y = g.y(j);
      double v = 0.0;
      if (std::abs(x) <= 0.25 && std::abs(y) <= 0.25) {
        const double sx = std::sin(4.0 * std::numbers::pi * x), sy = std::sin(4.0 * std::numbers::pi * y);
        v = 0.25 * sx * sx * sy * sy;
      }
      s.v(i, j) = v;
      s.u(i, j) = 1.0 - 2.0 * v;
    }
  return s;
}

void reaction_substep(StateUV& s, const NodeClassification& cls, const GrayScottParams& p, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::invalid_parameter, "time step must be positive");
  const double inv = 1.0 / p.eps0;
  auto rhs = [&](double u, double v, double& du, double& dv) {
    const double uv2 = u * v * v;
    du = inv * (p.gamma * (1.0 - u) - uv2);
    dv = inv * (uv2 - (p.gamma + p.kappa_r) * v);
  };
  bool blown = false;
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    if (!cls.interior(k)) continue;
    const double u = s.u[k], v = s.v[k];
    double du, dv;
    rhs(u, v, du, dv);
    const double um = u + 0.5 * dt * du, vm = v + 0.5 * dt * dv;
    rhs(um, vm, du, dv);
    s.u[k] = u + dt * du;
    s.v[k] = v + dt * dv;
    if (!(std::abs(s.u[k]) <= 1e6 && std::abs(s.v[k]) <= 1e6)) blown = true;
  }
  if (blown) fail(ErrorKind::blow_up, "reaction step produced values beyond 1e6");
}

DiffusionStep::DiffusionStep(const KfbiGeometry& geo, double eps, double dt, int workers,
                             SolverOptions options)
    : geo_(geo), eps_(eps), dt_(dt), options_(options) {
  if (!(eps > 0.0) || !(dt > 0.0)) fail(ErrorKind::invalid_parameter, "diffusion needs eps > 0 and dt > 0");
  ev_ = make_evaluator(geo, kappa(), workers);
}

GridField DiffusionStep::apply(const GridField& u) {
  const CartesianGrid& g = geo_.grid;
  const NodeClassification& cls = geo_.cls;
  // Constants pass through exactly; only the deviation from the mean near
  // Gamma goes through the interface solve.
  double shift = 0.0;
  std::size_t count = 0;
  for (std::size_t n : cls.irregular_nodes)
    if (cls.interior(n)) {
      shift += u[n];
      ++count;
    }
  if (count > 0) shift /= static_cast<double>(count);
  GridField f(g, 0.0);
  for (std::size_t n = 0; n < u.size(); ++n)
    if (cls.interior(n)) f[n] = -kappa() * (u[n] - shift);
  const SourceTerm src = SourceTerm::sampled(g, cls, std::move(f));
  BvpSpec spec;
  spec.bc = BoundaryCondition::neumann;
  spec.boundary_data = [](const ControlPoint&) { return 0.0; };
  spec.source = &src;
  spec.options = options_;
  Solution sol = solve_neumann(*ev_, spec);
  stats_ = sol.stats;
  GridField out(g, 0.0);
  for (std::size_t n = 0; n < u.size(); ++n)
    if (cls.interior(n)) out[n] = 2.0 * (shift + sol.u[n]) - u[n];
  return out;
}

void diffusion_substep(StateUV& s, DiffusionStep& du, DiffusionStep& dv) {
  s.u = du.apply(s.u);
  s.v = dv.apply(s.v);
}

FieldRange interior_range(const GridField& f, const NodeClassification& cls) {
  FieldRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), true};
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!cls.interior(k)) continue;
    if (!std::isfinite(f[k])) r.finite = false;
    r.min = std::min(r.min, f[k]);
    r.max = std::max(r.max, f[k]);
  }
  return r;
}

GrayScottRun run_gray_scott(const KfbiGeometry& geo, const GrayScottParams& p, int workers,
                            const std::vector<double>& snapshot_times, SolverOptions options) {
  p.validate();
  const int steps = static_cast<int>(std::ceil(p.t_end / p.dt - 1e-9));
  DiffusionStep du(geo, p.eps1, p.dt, workers, options);
  DiffusionStep dv(geo, p.eps2, p.dt, workers, options);
  GrayScottRun run;
  run.state = gray_scott_initial(geo);
  std::vector<double> pending = snapshot_times;
  std::ranges::sort(pending);
  std::size_t next = 0;
  auto take = [&](double t) {
    while (next < pending.size() && pending[next] <= t + 1e-12) {
      run.snapshot_times.push_back(t);
      run.snapshots.push_back(run.state);
      ++next;
    }
  };
  take(0.0);
  const std::function<void(StateUV&, double)> reaction = [&](StateUV& s, double h) {
    reaction_substep(s, geo.cls, p, h);
  };
  const std::function<void(StateUV&)> diffusion = [&](StateUV& s) { diffusion_substep(s, du, dv); };
  for (int n = 1; n <= steps; ++n) {
    split_step(run.state, p.dt, Splitting::strang, reaction, diffusion);
    run.interface_solves += du.last_stats().interface_solves + dv.last_stats().interface_solves;
    for (const GridField* f : {&run.state.u, &run.state.v})
      if (!interior_range(*f, geo.cls).finite) fail(ErrorKind::blow_up, "non-finite concentration");
    take(n * p.dt);
  }
  run.steps = steps;
  return run;
}

}  // namespace kfbi
