#include "kfbi/manufactured.hpp"

#include <cmath>

#include "kfbi/error.hpp"

namespace kfbi {

Manufactured manufactured(const std::string& name) {
  using std::cos, std::sin, std::exp, std::sinh, std::cosh;
  if (name == "harmonic-exp")
    return {name, [](Vec2 p) { return exp(p.x) * cos(p.y) + exp(p.y) * sin(p.x); },
            [](Vec2 p) {
              return Vec2{exp(p.x) * cos(p.y) + exp(p.y) * cos(p.x), -exp(p.x) * sin(p.y) + exp(p.y) * sin(p.x)};
            },
            [](Vec2) { return 0.0; }};
  if (name == "constant-one")
    return {name, [](Vec2) { return 1.0; }, [](Vec2) { return Vec2{0.0, 0.0}; }, [](Vec2) { return 0.0; }};
  if (name == "quadratic")
    return {name, [](Vec2 p) { return p.x * p.x + p.y * p.y; }, [](Vec2 p) { return Vec2{2.0 * p.x, 2.0 * p.y}; },
            [](Vec2) { return 4.0; }};
  if (name == "cos-sinh")
    return {name, [](Vec2 p) { return cos(p.x) * sinh(p.y); },
            [](Vec2 p) { return Vec2{-sin(p.x) * sinh(p.y), cos(p.x) * cosh(p.y)}; }, [](Vec2) { return 0.0; }};
  fail(ErrorKind::config, "unknown exact solution '" + name + "'");
}

std::vector<std::string> manufactured_names() { return {"harmonic-exp", "constant-one", "quadratic", "cos-sinh"}; }

BvpSpec manufactured_spec(const Manufactured& m, BoundaryCondition bc, double kappa, SourceTerm& source,
                          SolverOptions options) {
  BvpSpec spec;
  spec.bc = bc;
  spec.options = options;
  if (bc == BoundaryCondition::dirichlet) {
    spec.boundary_data = [u = m.u](const ControlPoint& c) { return u(c.position); };
  } else {
    spec.boundary_data = [g = m.grad](const ControlPoint& c) { return dot(g(c.position), c.normal); };
  }
  source = SourceTerm::analytic([u = m.u, lap = m.laplacian, kappa](Vec2 p) { return lap(p) - kappa * u(p); });
  spec.source = &source;
  return spec;
}

ErrorNorms interior_error(const GridField& u, const CartesianGrid& grid, const NodeClassification& cls,
                          const std::function<double(Vec2)>& exact) {
  ErrorNorms e;
  double sum = 0.0;
  for (int i = 0; i < grid.nodes_x(); ++i)
    for (int j = 0; j < grid.nodes_y(); ++j) {
      if (!cls.interior(grid.index(i, j))) continue;
      const double d = std::abs(u(i, j) - exact(grid.node(i, j)));
      e.inf = std::max(e.inf, d);
      sum += d * d;
      ++e.nodes;
    }
  e.l2 = e.nodes ? std::sqrt(sum / static_cast<double>(e.nodes)) : 0.0;
  return e;
}

}  // namespace kfbi
