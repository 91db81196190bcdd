#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kfbi/bie.hpp"
#include "kfbi/grid.hpp"

namespace kfbi {

/// Built-in exact solutions for convergence studies.
struct Manufactured {
  std::string name;
  std::function<double(Vec2)> u;
  std::function<Vec2(Vec2)> grad;
  std::function<double(Vec2)> laplacian;
};

/// harmonic-exp: e^x cos y + e^y sin x;  constant-one: 1;  quadratic:
/// x^2 + y^2;  cos-sinh: cos x sinh y.
Manufactured manufactured(const std::string& name);
std::vector<std::string> manufactured_names();

/// Boundary data and source f = Lap u - kappa u for `m`; `source` receives
/// the source term and must outlive the returned spec.
BvpSpec manufactured_spec(const Manufactured& m, BoundaryCondition bc, double kappa, SourceTerm& source,
                          SolverOptions options = {});

struct ErrorNorms {
  double inf = 0.0;
  double l2 = 0.0;  // sqrt(mean of squared errors) over interior nodes
  std::size_t nodes = 0;
};

ErrorNorms interior_error(const GridField& u, const CartesianGrid& grid, const NodeClassification& cls,
                          const std::function<double(Vec2)>& exact);

}  // namespace kfbi
