#include <doctest.h>

#include "kfbi/correction.hpp"
#include "kfbi/error.hpp"
#include "kfbi/reference.hpp"
#include "oracles.hpp"

using namespace kfbi;

namespace {

struct Quadratic {
  double c, cx, cy, cxx, cxy, cyy;  // c + cx x + cy y + cxx x^2/2 + cxy xy + cyy y^2/2
  double operator()(Vec2 p) const {
    return c + cx * p.x + cy * p.y + 0.5 * cxx * p.x * p.x + cxy * p.x * p.y + 0.5 * cyy * p.y * p.y;
  }
  double laplacian() const { return cxx + cyy; }
};

struct Setup {
  CartesianGrid grid;
  NodeClassification cls;
  IntersectionSet xs;
  std::vector<BoundaryFrame> frames;
};

Setup make(const ParametricBoundary& b, double half, int n) {
  Setup s{oracle::square_grid(half, n), {}, {}, {}};
  s.cls = classify_nodes(s.grid, b);
  s.xs = find_intersections(s.grid, s.cls, b);
  for (const Intersection& x : s.xs.items) s.frames.push_back(b.frame_at(x.arc));
  return s;
}

// L_h v - kappa v at interior box nodes; zero on the box boundary.
GridField apply_five_point(const GridField& v, const CartesianGrid& g, double kappa) {
  GridField out(g);
  const double h2 = g.spacing() * g.spacing();
  for (int i = 1; i < g.cells_x(); ++i)
    for (int j = 1; j < g.cells_y(); ++j)
      out(i, j) = (v(i + 1, j) + v(i - 1, j) + v(i, j + 1) + v(i, j - 1) - 4.0 * v(i, j)) / h2 - kappa * v(i, j);
  return out;
}

}  // namespace

TEST_CASE("base right-hand side is the zero extension") {
  const Setup s = make(oracle::circle(), 1.2, 8);
  const SourceTerm one = SourceTerm::analytic([](Vec2) { return 1.0; });
  InterfaceSpec spec;
  spec.source = &one;
  const GridField f = base_rhs(spec, s.grid, s.cls);
  int ones = 0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(f[k] == (s.cls.interior(k) ? 1.0 : 0.0));
    ones += f[k] == 1.0;
  }
  CHECK(ones == 37);

  DensityField phi = fit_density(discretize_boundary_count(oracle::circle(), 16), std::vector<double>(16, 1.0));
  InterfaceSpec dl;
  dl.value_jump = &phi;
  const GridField fd = base_rhs(dl, s.grid, s.cls);
  for (double x : fd.data()) CHECK(x == 0.0);
  const SourceTerm zero = SourceTerm::analytic([](Vec2) { return 0.0; });
  InterfaceSpec vz;
  vz.source = &zero;
  const GridField fz = base_rhs(vz, s.grid, s.cls);
  for (double x : fz.data()) CHECK(x == 0.0);
}

TEST_CASE("zero jumps leave the base field unchanged") {
  const Setup s = make(oracle::star(), 1.5, 64);
  const GridField base = oracle::sample(s.grid, [](Vec2 p) { return std::sin(p.x) * p.y; });
  InterfaceSpec spec;
  const std::vector<JumpData> j = intersection_jumps(spec, s.xs, s.frames);
  CHECK(correct_rhs(base, s.grid, s.cls, s.xs, j).field == base);
}

TEST_CASE("single crossing against the 1D three-point model") {
  // Nodes a (interior, x = 0) and b (exterior, x = h) with the interface at
  // x = 0.6h, so b sits 0.4h past it. Piecewise constant v: 1 on a's side.
  const CartesianGrid g = CartesianGrid::build({-1, 1, -1, 1}, 10, 10);
  const double h = g.spacing();
  NodeClassification cls;
  cls.side.assign(g.node_count(), Side::interior);
  for (int i = 6; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) cls.side[g.index(i, j)] = Side::exterior;
  Intersection x;
  x.axis = EdgeAxis::x;
  x.i = 5;
  x.j = 5;
  x.point = {g.x(5) + 0.6 * h, g.y(5)};
  JumpData jump;
  jump.v = 1.0;
  const double ca = correction_term(g, cls, x, jump, g.index(5, 5));
  const double cb = correction_term(g, cls, x, jump, g.index(6, 5));
  auto v = [](int i) { return i <= 5 ? 1.0 : 0.0; };
  const double la = (v(6) - 2.0 * v(5) + v(4)) / (h * h);  // true second derivative is 0
  const double lb = (v(7) - 2.0 * v(6) + v(5)) / (h * h);
  CHECK(ca == doctest::Approx(la).epsilon(1e-14));
  CHECK(cb == doctest::Approx(lb).epsilon(1e-14));
  CHECK(std::abs(ca) == doctest::Approx(1.0 / (h * h)));

  // With a first-derivative jump the offsets 0.4h / -0.6h enter linearly.
  jump.vx = 2.0;
  CHECK(correction_term(g, cls, x, jump, g.index(5, 5)) == doctest::Approx(-(1.0 + 2.0 * 0.4 * h) / (h * h)));
  CHECK(correction_term(g, cls, x, jump, g.index(6, 5)) == doctest::Approx((1.0 - 2.0 * 0.6 * h) / (h * h)));
}

TEST_CASE("piecewise quadratic witness has zero corrected residual") {
  const Quadratic in{0.3, 1.0, -0.5, 2.0, 0.7, -1.2}, out{-0.4, 0.2, 0.9, -0.6, 0.1, 1.5};
  for (double kappa : {0.0, 1.0, 7.5}) {
    for (const auto& [b, half, n] : std::vector<std::tuple<ParametricBoundary, double, int>>{
             {oracle::circle(), 1.2, 40}, {oracle::star(), 1.5, 96}, {oracle::star(1.0, 0.2, 8), 1.5, 160}}) {
      const Setup s = make(b, half, n);
      const CartesianGrid& g = s.grid;
      GridField v(g), f(g);
      for (int i = 0; i < g.nodes_x(); ++i)
        for (int j = 0; j < g.nodes_y(); ++j) {
          const Vec2 p = g.node(i, j);
          const bool inside = s.cls.interior(g.index(i, j));
          const Quadratic& q = inside ? in : out;
          v(i, j) = q(p);
          f(i, j) = q.laplacian() - kappa * q(p);
        }
      std::vector<JumpData> jumps;
      for (const Intersection& x : s.xs.items) {
        const Vec2 p = x.point;
        jumps.push_back({in(p) - out(p), (in.cx + in.cxx * p.x + in.cxy * p.y) - (out.cx + out.cxx * p.x + out.cxy * p.y),
                         (in.cy + in.cxy * p.x + in.cyy * p.y) - (out.cy + out.cxy * p.x + out.cyy * p.y),
                         in.cxx - out.cxx, in.cxy - out.cxy, in.cyy - out.cyy});
      }
      const GridField lhs = apply_five_point(v, g, kappa);
      const GridField rhs = correct_rhs(f, g, s.cls, s.xs, jumps).field;
      const double h2 = g.spacing() * g.spacing();
      double worst = 0.0;
      for (int i = 1; i < g.cells_x(); ++i)
        for (int j = 1; j < g.cells_y(); ++j) worst = std::max(worst, std::abs(lhs(i, j) - rhs(i, j)));
      CHECK(worst < 1e-10 / h2);
      CHECK(worst * h2 < 1e-12);
    }
  }
}

TEST_CASE("spline-derived jumps: corrected residual is O(h) at irregular nodes") {
  // v = x^2 + y^2 inside the star, 0 outside; the jumps are computed through
  // the density splines, so their error shrinks with the grid.
  const ParametricBoundary b = oracle::star();
  std::vector<double> err;
  for (int n : {64, 128, 256}) {
    const Setup s = make(b, 1.5, n);
    const CartesianGrid& g = s.grid;
    const ControlPointSet pts = discretize_boundary(b, 2.0 * g.spacing());
    std::vector<double> phi_v, psi_v;
    for (const ControlPoint& c : pts.points()) {
      phi_v.push_back(dot(c.position, c.position));
      psi_v.push_back(2.0 * dot(c.position, c.normal));
    }
    const DensityField phi = fit_density(pts, phi_v), psi = fit_density(pts, psi_v);
    const SourceTerm four = SourceTerm::analytic([](Vec2) { return 4.0; });
    InterfaceSpec spec;
    spec.value_jump = &phi;
    spec.flux_jump = &psi;
    spec.source = &four;
    GridField v(g);
    for (int i = 0; i < g.nodes_x(); ++i)
      for (int j = 0; j < g.nodes_y(); ++j)
        if (s.cls.interior(g.index(i, j))) v(i, j) = dot(g.node(i, j), g.node(i, j));
    const std::vector<JumpData> jumps = intersection_jumps(spec, s.xs, s.frames);
    const GridField rhs = correct_rhs(base_rhs(spec, g, s.cls), g, s.cls, s.xs, jumps).field;
    const GridField lhs = apply_five_point(v, g, 0.0);
    double worst = 0.0;
    for (std::size_t k : s.cls.irregular_nodes) worst = std::max(worst, std::abs(lhs[k] - rhs[k]));
    err.push_back(worst);
  }
  CHECK(err[0] / err[1] >= 1.8);
  CHECK(err[1] / err[2] >= 1.8);
}

TEST_CASE("support, linearity and attribution") {
  const ParametricBoundary b = oracle::star(1.0, 0.25, 6);
  const Setup s = make(b, 1.5, 128);
  const ControlPointSet pts = discretize_boundary(b, 2.0 * s.grid.spacing());
  std::vector<double> a, c;
  for (const ControlPoint& p : pts.points()) {
    a.push_back(std::sin(2.0 * p.arc));
    c.push_back(std::cos(p.arc) + 0.5);
  }
  const DensityField pa = fit_density(pts, a), pc = fit_density(pts, c);
  const SourceTerm f = SourceTerm::analytic([](Vec2 p) { return std::exp(p.x) - p.y; });
  InterfaceSpec sa, sb, both;
  sa.value_jump = &pa;
  sb.flux_jump = &pc;
  sb.source = &f;
  both.value_jump = &pa;
  both.flux_jump = &pc;
  both.source = &f;
  const GridField zero(s.grid);
  const CorrectedRhs ra = correct_rhs(zero, s.grid, s.cls, s.xs, intersection_jumps(sa, s.xs, s.frames));
  const CorrectedRhs rb = correct_rhs(zero, s.grid, s.cls, s.xs, intersection_jumps(sb, s.xs, s.frames));
  const CorrectedRhs rab =
      correct_rhs(zero, s.grid, s.cls, s.xs, intersection_jumps(both, s.xs, s.frames), ExecPolicy::parallel, true);
  for (std::size_t k = 0; k < zero.size(); ++k) {
    if (!s.cls.irregular[k]) CHECK(rab.field[k] == 0.0);
    CHECK(std::abs(rab.field[k] - ra.field[k] - rb.field[k]) < 1e-9 * (1.0 + std::abs(rab.field[k])));
  }
  GridField sum(s.grid);
  for (const CorrectionEntry& e : rab.log) {
    const Intersection& x = s.xs.items[e.intersection];
    const std::size_t lo = s.grid.index(x.i, x.j);
    const std::size_t hi = x.axis == EdgeAxis::x ? s.grid.index(x.i + 1, x.j) : s.grid.index(x.i, x.j + 1);
    CHECK((e.node == lo || e.node == hi));
    sum[e.node] += e.value;
  }
  for (std::size_t k = 0; k < zero.size(); ++k) CHECK(std::abs(sum[k] - rab.field[k]) < 1e-9 * (1.0 + std::abs(sum[k])));
}

TEST_CASE("gather kernels match the scatter reference") {
  const ParametricBoundary b = oracle::star();
  const Setup s = make(b, 1.5, 200);
  const ControlPointSet pts = discretize_boundary(b, 2.0 * s.grid.spacing());
  std::vector<double> a;
  for (const ControlPoint& p : pts.points()) a.push_back(std::sin(3.0 * p.arc));
  const DensityField pa = fit_density(pts, a);
  InterfaceSpec spec;
  spec.value_jump = &pa;
  spec.kappa = 2.0;
  const std::vector<JumpData> j = intersection_jumps(spec, s.xs, s.frames, ExecPolicy::serial);
  CHECK(intersection_jumps(spec, s.xs, s.frames, ExecPolicy::parallel).size() == j.size());
  const GridField base = oracle::sample(s.grid, [](Vec2 p) { return p.x; });
  const GridField par = correct_rhs(base, s.grid, s.cls, s.xs, j, ExecPolicy::parallel).field;
  const GridField ser = correct_rhs(base, s.grid, s.cls, s.xs, j, ExecPolicy::serial).field;
  CHECK(par == ser);
  const GridField ref = reference::correct_rhs(base, s.grid, s.cls, s.xs, j);
  for (std::size_t k = 0; k < base.size(); ++k) CHECK(std::abs(ref[k] - par[k]) <= 1e-12 * (1.0 + std::abs(ref[k])));
  CHECK_THROWS_AS(correct_rhs(base, s.grid, s.cls, s.xs, std::span(j).first(j.size() - 1)), Error);
}
