#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kfbi/arrowhead.hpp"
#include "kfbi/commands.hpp"
#include "kfbi/fast_poisson.hpp"
#include "kfbi/partition.hpp"
#include "kfbi/timestepper.hpp"

namespace kfbi {

namespace {

struct Check {
  const char* module;
  const char* name;
  std::function<bool()> run;
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

ParametricBoundary unit_circle(double r = 1.0) {
  CurveParams p;
  p.radius = r;
  return ParametricBoundary::build(CurveKind::circle, p);
}

TridiagonalSystem laplace_1d(int n, std::vector<double> rhs) {
  return {std::vector<double>(n, -1.0), std::vector<double>(n, 2.0), std::vector<double>(n, -1.0),
          std::move(rhs)};
}

std::vector<Check> checks() {
  std::vector<Check> c;
  c.push_back({"geometry", "unit circle perimeter", [] {
                 return near(unit_circle().perimeter(), 2.0 * std::numbers::pi, 1e-8);
               }});
  c.push_back({"geometry", "unit circle frame at s=0", [] {
                 const BoundaryFrame f = unit_circle().frame_at(0.0);
                 return near(f.point.x, 1.0, 1e-12) && near(f.tangent.y, 1.0, 1e-12) &&
                        near(f.normal.x, 1.0, 1e-12) && near(f.curvature, 1.0, 1e-10);
               }});
  c.push_back({"geometry", "tie rule on the curve", [] {
                 return unit_circle().side_of({1.0, 0.0}) == Side::interior &&
                        unit_circle().side_of({1.1, 0.0}) == Side::exterior;
               }});
  c.push_back({"geometry", "16 equally spaced control points", [] {
                 const ControlPointSet s = discretize_boundary(unit_circle(), 2.0 * std::numbers::pi / 16);
                 return s.size() == 16 && near(s[4].position.y, 1.0, 1e-10);
               }});
  c.push_back({"grid", "h = 0.2 on a 12x12 grid", [] {
                 const CartesianGrid g = CartesianGrid::build({-1.2, 1.2, -1.2, 1.2}, 12, 12);
                 return near(g.spacing(), 0.2, 1e-15) && g.nodes_x() == 13;
               }});
  c.push_back({"grid", "node on the curve is interior and irregular", [] {
                 const CartesianGrid g = CartesianGrid::build({-1.2, 1.2, -1.2, 1.2}, 12, 12);
                 const NodeClassification cls = classify_nodes(g, unit_circle());
                 return cls.interior(g.index(6, 11)) && cls.irregular[g.index(6, 11)];
               }});
  c.push_back({"jumps", "constant density has zero derivative jumps", [] {
                 const BoundaryFrame f = unit_circle().frame_at(0.3);
                 const JumpData j = jumps_from(2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, f);
                 return j.v == 2.0 && j.vx == 0.0 && j.vy == 0.0 && j.vxx == 0.0 && j.vxy == 0.0 && j.vyy == 0.0;
               }});
  c.push_back({"jumps", "unit single layer at s=0", [] {
                 const JumpData j = jumps_from(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, unit_circle().frame_at(0.0));
                 return near(j.v, 0.0, 1e-14) && near(j.vx, 1.0, 1e-12) && near(j.vy, 0.0, 1e-12);
               }});
  c.push_back({"fast_poisson", "tridiag(-1,2,-1) all-ones witness", [] {
                 const std::vector<double> u = thomas_solve(laplace_1d(5, {1, 0, 0, 0, 1}));
                 for (double x : u)
                   if (!near(x, 1.0, 1e-14)) return false;
                 return true;
               }});
  c.push_back({"fast_poisson", "1x1 system", [] {
                 return thomas_solve({{0.0}, {3.0}, {0.0}, {6.0}})[0] == 2.0;
               }});
  c.push_back({"fast_poisson", "zero right-hand side", [] {
                 const CartesianGrid g = CartesianGrid::build({-1, 1, -1, 1}, 16, 16);
                 const GridField v = solve_interface_system(GridField(g), SpectralPlan(g, 1.0));
                 for (double x : v.data())
                   if (x != 0.0) return false;
                 return true;
               }});
  c.push_back({"arrowhead", "n=5, m=2 split and witness", [] {
                 ArrowheadSystem a = ArrowheadSystem::decompose(laplace_1d(5, {}), 2);
                 a.precompute_schur();
                 const PartitionMap& p = a.partition();
                 const std::vector<double> u = a.solve(std::vector<double>{1, 0, 0, 0, 1});
                 bool ok = p.block_begin[0] == 0 && p.block_end[0] == 2 && p.separators[0] == 2;
                 for (double x : u) ok = ok && near(x, 1.0, 1e-14);
                 return ok;
               }});
  c.push_back({"interpolation", "quadratic field reproduced", [] {
                 const CartesianGrid g = CartesianGrid::build({-1.2, 1.2, -1.2, 1.2}, 48, 48);
                 const NodeClassification cls = classify_nodes(g, unit_circle());
                 GridField v(g);
                 for (int i = 0; i < g.nodes_x(); ++i)
                   for (int j = 0; j < g.nodes_y(); ++j) v(i, j) = g.x(i) * g.x(i) + g.y(j);
                 const Vec2 z{std::cos(0.7), std::sin(0.7)};
                 const OneSidedValue r = one_sided_value(v, g, select_stencil(g, cls, z), JumpData{});
                 return near(r.value, z.x * z.x + z.y, 1e-11);
               }});
  c.push_back({"bie", "identity operator converges in one iteration", [] {
                 const LinearOperator id = [](std::span<const double> x) {
                   return std::vector<double>(x.begin(), x.end());
                 };
                 const std::vector<double> g{1.0, -2.0, 3.0};
                 return gmres_solve(id, g, 30, 1e-8).stats.inner == 1 &&
                        richardson_solve(id, g, 1.0, 1e-8).stats.inner == 1;
               }});
  c.push_back({"bie", "constant solution reproduced", [] {
                 RunConfig cfg;
                 cfg.exact = "constant-one";
                 cfg.kappa = 1.0;
                 cfg.grids = {64};
                 cfg.options.tol = 1e-12;
                 return solve_manufactured(cfg, 64).error.inf < 5e-11;
               }});
  c.push_back({"partition", "16 columns over 4 workers", [] {
                 const SlabPartition p = partition_grid(CartesianGrid::build({0, 16, 0, 16}, 16, 16), 4);
                 for (int w = 0; w < 4; ++w)
                   if (std::min(p.column_end[w], 16) - p.column_begin[w] != 4) return false;
                 return true;
               }});
  c.push_back({"partition", "10 columns over 3 workers", [] {
                 const SlabPartition p = partition_grid(CartesianGrid::build({0, 10, 0, 10}, 10, 10), 3);
                 return p.width(0) == 4 && p.width(1) == 3 && std::min(p.column_end[2], 10) - p.column_begin[2] == 3;
               }});
  c.push_back({"timestepper", "(1,0) is a reaction equilibrium", [] {
                 const CartesianGrid g = CartesianGrid::build({-2, 2, -2, 2}, 16, 16);
                 const NodeClassification cls = classify_nodes(g, unit_circle(1.8));
                 StateUV s{GridField(g, 1.0), GridField(g, 0.0)};
                 reaction_substep(s, cls, GrayScottParams{}, 0.125);
                 for (std::size_t k = 0; k < s.u.size(); ++k)
                   if (cls.interior(k) && (!near(s.u[k], 1.0, 1e-14) || s.v[k] != 0.0)) return false;
                 return true;
               }});
  c.push_back({"cli", "defaults and grid override", [] {
                 ConfigOverrides f;
                 f.grid = "256";
                 f.domain = "circle:1.0";
                 const RunConfig cfg = parse_config(Command::solve, "", f);
                 return cfg.grids == std::vector<int>{256} && cfg.options.tol == 1e-8 &&
                        cfg.options.restart == 30 && cfg.options.gamma == 0.8 && cfg.workers == 1;
               }});
  c.push_back({"cli", "negative tolerance rejected", [] {
                 try {
                   parse_config(Command::solve, "[solver]\ntol = -1\n");
                 } catch (const Error&) {
                   return true;
                 }
                 return false;
               }});
  c.push_back({"cli", "3x3 field CSV", [] {
                 const CartesianGrid g = CartesianGrid::build({0, 1, 0, 1}, 2, 2);
                 NodeClassification cls;
                 cls.side.assign(g.node_count(), Side::exterior);
                 std::ostringstream os;
                 write_field_csv(os, GridField(g), g, cls);
                 std::istringstream is(os.str());
                 return read_field_csv(is).size() == 9;
               }});
  return c;
}

}  // namespace

int run_selftest(std::ostream& out) {
  int failed = 0;
  const std::vector<Check> all = checks();
  for (const Check& c : all) {
    bool ok = false;
    std::string detail;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      detail = std::string(" (") + e.what() + ")";
    }
    if (!ok) ++failed;
    out << (ok ? "PASS " : "FAIL ") << c.module << ": " << c.name << detail << '\n';
  }
  out << all.size() - failed << "/" << all.size() << " checks passed\n";
  return failed;
}

}  // namespace kfbi
