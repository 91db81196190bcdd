#include "kfbi/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kfbi/error.hpp"

namespace kfbi {

namespace {

// Solves the cyclic system  x[k-1] + 4 x[k] + x[k+1] = r[k]  (indices mod n)
// by Sherman-Morrison on top of two Thomas sweeps.
std::vector<double> solve_cyclic_141(const std::vector<double>& r) {
  const std::size_t n = r.size();
  const double alpha = 1.0, beta = 1.0;
  const double gamma = -4.0;
  std::vector<double> bb(n, 4.0);
  bb[0] = 4.0 - gamma;
  bb[n - 1] = 4.0 - alpha * beta / gamma;

  auto tridag = [&](const std::vector<double>& rhs) {
    std::vector<double> cp(n), x(n);
    double denom = bb[0];
    cp[0] = 1.0 / denom;
    x[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = bb[i] - cp[i - 1];
      cp[i] = 1.0 / denom;
      x[i] = (rhs[i] - x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
    return x;
  };

  std::vector<double> x = tridag(r);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  const std::vector<double> z = tridag(u);
  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

}  // namespace

PeriodicSpline::PeriodicSpline(double period, std::vector<double> values)
    : period_(period), values_(std::move(values)) {
  const std::size_t n = values_.size();
  if (n < 3) fail(ErrorKind::length_mismatch, "periodic spline needs at least 3 knots");
  step_ = period_ / static_cast<double>(n);
  std::vector<double> rhs(n);
  const double scale = 6.0 / (step_ * step_);
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = values_[(k + n - 1) % n], next = values_[(k + 1) % n];
    rhs[k] = scale * (next - 2.0 * values_[k] + prev);
  }
  second_ = solve_cyclic_141(rhs);
}

PeriodicSpline::Eval PeriodicSpline::eval(double s) const {
  const std::size_t n = values_.size();
  s -= period_ * std::floor(s / period_);
  auto k = static_cast<std::size_t>(s / step_);
  if (k >= n) k = n - 1;
  const std::size_t k1 = (k + 1) % n;
  const double a = static_cast<double>(k + 1) * step_ - s;  // distance to right knot
  const double b = s - static_cast<double>(k) * step_;      // distance to left knot
  const double d = step_;
  const double yk = values_[k], y1 = values_[k1], mk = second_[k], m1 = second_[k1];
  Eval e;
  e.value = mk * a * a * a / (6.0 * d) + m1 * b * b * b / (6.0 * d) + (yk / d - mk * d / 6.0) * a +
            (y1 / d - m1 * d / 6.0) * b;
  e.first = -mk * a * a / (2.0 * d) + m1 * b * b / (2.0 * d) + (y1 - yk) / d - (m1 - mk) * d / 6.0;
  e.second = (mk * a + m1 * b) / d;
  return e;
}

DensityField fit_density(const ControlPointSet& points, std::span<const double> values) {
  if (values.size() != points.size())
    fail(ErrorKind::length_mismatch, "density has " + std::to_string(values.size()) +
                                         " values for " + std::to_string(points.size()) +
                                         " control points");
  DensityField d;
  d.spline_ = PeriodicSpline(points.perimeter(), std::vector<double>(values.begin(), values.end()));
  return d;
}

struct SampledSource {
  CartesianGrid grid;
  std::vector<Side> side;
  GridField samples;
};

SourceTerm SourceTerm::analytic(std::function<double(Vec2)> f) {
  SourceTerm s;
  s.fn_ = std::move(f);
  return s;
}

SourceTerm SourceTerm::sampled(const CartesianGrid& grid, const NodeClassification& cls,
                               GridField samples) {
  if (samples.size() != grid.node_count())
    fail(ErrorKind::length_mismatch, "sampled source does not match the grid");
  SourceTerm s;
  s.sampled_ = std::make_shared<const SampledSource>(SampledSource{grid, cls.side, std::move(samples)});
  return s;
}

double SourceTerm::at_node(const CartesianGrid& grid, int i, int j) const {
  if (sampled_) return sampled_->samples(i, j);
  return fn_(grid.node(i, j));
}

double SourceTerm::at_boundary(Vec2 p) const {
  if (!sampled_) return fn_(p);
  const SampledSource& src = *sampled_;
  const CartesianGrid& g = src.grid;
  const double h = g.spacing();
  const int ic = static_cast<int>(std::lround((p.x - g.x(0)) / h));
  const int jc = static_cast<int>(std::lround((p.y - g.y(0)) / h));
  for (int radius = 2; radius <= 4; ++radius) {
    std::vector<std::pair<int, int>> nodes;
    for (int i = ic - radius; i <= ic + radius; ++i)
      for (int j = jc - radius; j <= jc + radius; ++j) {
        if (i < 0 || j < 0 || i >= g.nodes_x() || j >= g.nodes_y()) continue;
        if (src.side[g.index(i, j)] == Side::interior) nodes.emplace_back(i, j);
      }
    if (nodes.size() < 10) continue;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(nodes.size()), 6);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const auto [i, j] = nodes[r];
      const double xi = (g.x(i) - p.x) / h, eta = (g.y(j) - p.y) / h;
      const auto row = static_cast<Eigen::Index>(r);
      a.row(row) << 1.0, xi, eta, xi * xi, xi * eta, eta * eta;
      rhs(row) = src.samples(i, j);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 6) continue;
    return qr.solve(rhs)(0);
  }
  fail(ErrorKind::singular_stencil, "not enough interior nodes to evaluate the source on the boundary");
}

InterfaceCase InterfaceSpec::kind() const {
  const int n = (value_jump ? 1 : 0) + (flux_jump ? 1 : 0) + (source ? 1 : 0);
  if (n == 0) return InterfaceCase::none;
  if (n > 1) return InterfaceCase::combined;
  if (value_jump) return InterfaceCase::double_layer;
  if (flux_jump) return InterfaceCase::single_layer;
  return InterfaceCase::volume;
}

JumpData jumps_from(double phi, double dphi, double ddphi, double psi, double dpsi,
                    double source_jump, double kappa, const BoundaryFrame& f) {
  const Vec2 t = f.tangent, n = f.normal;
  if (std::abs(dot(t, t) - 1.0) > 1e-8 || std::abs(dot(t, n)) > 1e-8)
    fail(ErrorKind::singular_system, "boundary frame is not orthonormal");
  const double c = f.curvature;
  // Hessian jump in the (t, n) frame: tangential second derivative of [v],
  // tangential derivative of [d_n v], and the PDE trace.
  const double a_tt = ddphi + c * psi;
  const double a_tn = dpsi - c * dphi;
  const double a_nn = source_jump + kappa * phi - a_tt;

  JumpData j;
  j.v = phi;
  j.vx = dphi * t.x + psi * n.x;
  j.vy = dphi * t.y + psi * n.y;
  j.vxx = a_tt * t.x * t.x + 2.0 * a_tn * t.x * n.x + a_nn * n.x * n.x;
  j.vxy = a_tt * t.x * t.y + a_tn * (t.x * n.y + n.x * t.y) + a_nn * n.x * n.y;
  j.vyy = a_tt * t.y * t.y + 2.0 * a_tn * t.y * n.y + a_nn * n.y * n.y;
  return j;
}

JumpData jumps_at(const InterfaceSpec& spec, const BoundaryFrame& f, double s) {
  PeriodicSpline::Eval phi{0.0, 0.0, 0.0}, psi{0.0, 0.0, 0.0};
  if (spec.value_jump) phi = spec.value_jump->eval(s);
  if (spec.flux_jump) psi = spec.flux_jump->eval(s);
  const double fj = spec.source ? spec.source->at_boundary(f.point) : 0.0;
  return jumps_from(phi.value, phi.first, phi.second, psi.value, psi.first, fj, spec.kappa, f);
}

}  // namespace kfbi
