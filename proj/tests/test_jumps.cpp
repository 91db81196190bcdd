#include <doctest.h>

#include <array>

#include "kfbi/error.hpp"
#include "kfbi/jumps.hpp"
#include "oracles.hpp"

using namespace kfbi;

namespace {

// Dense Gaussian elimination with partial pivoting on the Cartesian jump
// system: unknowns ([v_x],[v_y]) from the 2x2 rows, then ([v_xx],[v_xy],[v_yy]).
template <int N>
std::array<double, N> dense_solve(std::array<std::array<double, N + 1>, N> a) {
  for (int c = 0; c < N; ++c) {
    int p = c;
    for (int r = c + 1; r < N; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    for (int r = c + 1; r < N; ++r) {
      const double m = a[r][c] / a[c][c];
      for (int k = c; k <= N; ++k) a[r][k] -= m * a[c][k];
    }
  }
  std::array<double, N> x{};
  for (int r = N - 1; r >= 0; --r) {
    double s = a[r][N];
    for (int k = r + 1; k < N; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

JumpData cartesian_oracle(double phi, double dphi, double ddphi, double psi, double dpsi, double fj,
                          double kappa, const BoundaryFrame& f) {
  const double t1 = f.tangent.x, t2 = f.tangent.y;
  // dtau/ds = -curvature * n for the counter-clockwise orientation.
  const double d1 = -f.curvature * f.normal.x, d2 = -f.curvature * f.normal.y;
  const auto g = dense_solve<2>({{{t1, t2, dphi}, {t2, -t1, psi}}});
  const auto h = dense_solve<3>({{{t1 * t1, 2 * t1 * t2, t2 * t2, ddphi - (d1 * g[0] + d2 * g[1])},
                                  {t1 * t2, t2 * t2 - t1 * t1, -t1 * t2, dpsi - (d2 * g[0] - d1 * g[1])},
                                  {1.0, 0.0, 1.0, fj + kappa * phi}}});
  return {phi, g[0], g[1], h[0], h[1], h[2]};
}

void check_close(const JumpData& a, const JumpData& b, double tol) {
  CHECK(std::abs(a.v - b.v) < tol);
  CHECK(std::abs(a.vx - b.vx) < tol);
  CHECK(std::abs(a.vy - b.vy) < tol);
  CHECK(std::abs(a.vxx - b.vxx) < tol);
  CHECK(std::abs(a.vxy - b.vxy) < tol);
  CHECK(std::abs(a.vyy - b.vyy) < tol);
}

}  // namespace

TEST_CASE("spline of constant values has zero derivatives") {
  const ControlPointSet pts = discretize_boundary_count(oracle::star(), 40);
  const DensityField d = fit_density(pts, std::vector<double>(40, 2.5));
  for (int k = 0; k < 200; ++k) {
    const auto e = d.eval(pts.perimeter() * k / 200.0);
    CHECK(e.value == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(std::abs(e.first) < 1e-12);
    CHECK(std::abs(e.second) < 1e-12);
  }
  CHECK_THROWS_AS(fit_density(pts, std::vector<double>(39, 1.0)), Error);
}

TEST_CASE("spline derivatives against analytic oracle") {
  const ControlPointSet pts = discretize_boundary_count(oracle::circle(), 64);
  std::vector<double> v;
  for (const ControlPoint& p : pts.points()) v.push_back(std::sin(p.arc));
  const DensityField d = fit_density(pts, v);
  double e1 = 0.0, e2 = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double s = 2.0 * oracle::pi * k / 1000.0;
    e1 = std::max(e1, std::abs(d.eval(s).first - std::cos(s)));
    e2 = std::max(e2, std::abs(d.eval(s).second + std::sin(s)));
  }
  CHECK(e1 < 5e-4);
  CHECK(e2 < 5e-2);

  // Second-derivative error is O(M^-2): halves twice per doubling.
  auto max_second_error = [](std::size_t m) {
    const ControlPointSet p = discretize_boundary_count(oracle::circle(), m);
    std::vector<double> vals;
    for (const ControlPoint& c : p.points()) vals.push_back(std::cos(2.0 * c.arc));
    const DensityField f = fit_density(p, vals);
    double e = 0.0;
    for (int k = 0; k < 997; ++k) {
      const double s = 2.0 * oracle::pi * k / 997.0;
      e = std::max(e, std::abs(f.eval(s).second + 4.0 * std::cos(2.0 * s)));
    }
    return e;
  };
  const double r = max_second_error(64) / max_second_error(128);
  CHECK(r > 3.5);
}

TEST_CASE("spline interpolates and is periodic") {
  const ControlPointSet pts = discretize_boundary_count(oracle::ellipse(1.0, 0.5), 8);
  const double L = pts.perimeter();
  std::vector<double> v;
  for (const ControlPoint& p : pts.points()) {
    const double s = p.arc / L;
    v.push_back(s * s * s - 1.5 * s * s + 0.5 * s);  // cubic, zero at both ends
  }
  const DensityField d = fit_density(pts, v);
  for (std::size_t m = 0; m < 8; ++m) CHECK(std::abs(d.eval(pts[m].arc).value - v[m]) < 1e-12);
  const auto a = d.eval(L - 1e-9), b = d.eval(1e-9), c = d.eval(L);
  CHECK(std::abs(a.value - b.value) < 1e-8);
  CHECK(std::abs(a.first - b.first) < 1e-7);
  CHECK(std::abs(a.second - b.second) < 1e-6);
  CHECK(std::abs(c.value - v[0]) < 1e-12);

  const std::vector<double> r = oracle::random_vector(8, 3);
  const DensityField dr = fit_density(pts, r);
  for (std::size_t m = 0; m < 8; ++m) CHECK(std::abs(dr.eval(pts[m].arc).value - r[m]) < 1e-12);
}

TEST_CASE("constant density on Laplace has zero derivative jumps") {
  const BoundaryFrame f = oracle::star().frame_at(0.7);
  const JumpData j = jumps_from(3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, f);
  CHECK(j.v == 3.0);
  check_close(j, JumpData{3.0, 0, 0, 0, 0, 0}, 1e-14);
}

TEST_CASE("constant density with kappa = 1 on the unit circle matches dense solve") {
  const BoundaryFrame f = oracle::circle().frame_at(0.0);
  const JumpData j = jumps_from(2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, f);
  check_close(j, cartesian_oracle(2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, f), 1e-12);
  CHECK(j.vxx == doctest::Approx(2.0));
}

TEST_CASE("unit single layer on the unit circle") {
  const JumpData j = jumps_from(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, oracle::circle().frame_at(0.0));
  CHECK(std::abs(j.v) < 1e-15);
  CHECK(j.vx == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(j.vy) < 1e-12);
}

TEST_CASE("frame decomposition agrees with the Cartesian system") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const ParametricBoundary& b : {oracle::circle(0.8), oracle::ellipse(1.1, 0.6), oracle::star(1.0, 0.3, 5)}) {
    for (int k = 0; k < 50; ++k) {
      const BoundaryFrame f = b.frame_at(b.perimeter() * (k + 0.5) / 50.0);
      const double a[7] = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), std::abs(u(rng))};
      const JumpData j = jumps_from(a[0], a[1], a[2], a[3], a[4], a[5], a[6], f);
      check_close(j, cartesian_oracle(a[0], a[1], a[2], a[3], a[4], a[5], a[6], f), 1e-11);
      CHECK(std::abs(j.vxx + j.vyy - a[6] * j.v - a[5]) < 1e-12);
    }
  }
}

TEST_CASE("double layer has no normal-derivative jump") {
  const ParametricBoundary b = oracle::star();
  const ControlPointSet pts = discretize_boundary(b, 0.05);
  std::vector<double> v;
  for (const ControlPoint& p : pts.points()) v.push_back(std::cos(3.0 * p.arc) + 0.2);
  const DensityField phi = fit_density(pts, v);
  InterfaceSpec spec;
  spec.value_jump = &phi;
  spec.kappa = 0.5;
  CHECK(spec.kind() == InterfaceCase::double_layer);
  for (int k = 0; k < 100; ++k) {
    const double s = b.perimeter() * k / 100.0;
    const BoundaryFrame f = b.frame_at(s);
    const JumpData j = jumps_at(spec, f, s);
    CHECK(std::abs(j.vx * f.normal.x + j.vy * f.normal.y) < 1e-12);
    CHECK(std::abs(j.vxx + j.vyy - 0.5 * j.v) < 1e-12);
  }
}

TEST_CASE("90 degree rotation maps the jump tensor") {
  const ParametricBoundary b = oracle::circle();
  const double L = b.perimeter();
  for (double s : {0.0, 0.4, 1.3}) {
    const BoundaryFrame f = b.frame_at(s), g = b.frame_at(s + L / 4.0);
    const JumpData a = jumps_from(0.7, -0.3, 1.1, 0.4, 0.9, -0.6, 0.2, f);
    const JumpData r = jumps_from(0.7, -0.3, 1.1, 0.4, 0.9, -0.6, 0.2, g);
    // R = [[0,-1],[1,0]]: grad -> R grad, H -> R H R^T.
    CHECK(r.vx == doctest::Approx(-a.vy).epsilon(1e-10));
    CHECK(r.vy == doctest::Approx(a.vx).epsilon(1e-10));
    CHECK(r.vxx == doctest::Approx(a.vyy).epsilon(1e-10));
    CHECK(r.vyy == doctest::Approx(a.vxx).epsilon(1e-10));
    CHECK(r.vxy == doctest::Approx(-a.vxy).epsilon(1e-10));
  }
}

TEST_CASE("volume case uses the source value on the curve") {
  const SourceTerm f = SourceTerm::analytic([](Vec2 p) { return 1.0 + p.x * p.y; });
  InterfaceSpec spec;
  spec.source = &f;
  CHECK(spec.kind() == InterfaceCase::volume);
  const ParametricBoundary b = oracle::ellipse(1.0, 0.7);
  const BoundaryFrame fr = b.frame_at(0.9);
  const JumpData j = jumps_at(spec, fr, 0.9);
  CHECK(j.v == 0.0);
  CHECK(std::abs(j.vx) + std::abs(j.vy) < 1e-15);
  CHECK(j.vxx + j.vyy == doctest::Approx(1.0 + fr.point.x * fr.point.y).epsilon(1e-13));
  CHECK(InterfaceSpec{}.kind() == InterfaceCase::none);
}
