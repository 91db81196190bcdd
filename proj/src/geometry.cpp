#include "kfbi/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "kfbi/error.hpp"

namespace kfbi {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// 5-point Gauss-Legendre on [-1,1].
constexpr std::array<double, 5> gl_nodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
    0.9061798459386640};
constexpr std::array<double, 5> gl_weights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

double wrap_unit(double t) {
  t -= std::floor(t);
  return t >= 1.0 ? 0.0 : t;
}

void check_params(CurveKind kind, const CurveParams& p) {
  auto bad = [](const std::string& msg) { fail(ErrorKind::invalid_parameter, msg); };
  if (!std::isfinite(p.rotation)) bad("rotation must be finite");
  switch (kind) {
    case CurveKind::circle:
      if (!(p.radius > 0.0) || !std::isfinite(p.radius)) bad("circle radius must be positive");
      break;
    case CurveKind::ellipse:
      if (!(p.semi_a > 0.0) || !(p.semi_b > 0.0) || !std::isfinite(p.semi_a * p.semi_b))
        bad("ellipse semi-axes must be positive");
      break;
    case CurveKind::star:
      if (!(p.radius > 0.0) || !std::isfinite(p.radius)) bad("star radius must be positive");
      if (!(p.amplitude >= 0.0) || !(p.amplitude < 1.0)) bad("star amplitude c must satisfy 0 <= c < 1");
      if (p.folds < 1) bad("star fold count m must be a positive integer");
      break;
  }
}

}  // namespace

ParametricBoundary ParametricBoundary::build(CurveKind kind, const CurveParams& params,
                                             Vec2 center) {
  check_params(kind, params);
  if (!std::isfinite(center.x) || !std::isfinite(center.y))
    fail(ErrorKind::invalid_parameter, "center must be finite");

  ParametricBoundary b;
  b.kind_ = kind;
  b.params_ = params;
  b.center_ = center;

  constexpr int speed_samples = 4096;
  for (int k = 0; k < speed_samples; ++k) {
    if (!(b.speed(static_cast<double>(k) / speed_samples) > 0.0))
      fail(ErrorKind::invalid_parameter, "curve has a vanishing speed");
  }

  // Composite Simpson per table interval; refine until the perimeter settles.
  auto tabulate = [&b](int n) {
    std::vector<double> table(static_cast<std::size_t>(n) + 1, 0.0);
    const double dt = 1.0 / n;
    for (int k = 0; k < n; ++k) {
      const double t0 = k * dt;
      const double simpson =
          dt / 6.0 * (b.speed(t0) + 4.0 * b.speed(t0 + 0.5 * dt) + b.speed(t0 + dt));
      table[k + 1] = table[k] + simpson;
    }
    return table;
  };
  int n = 4096;
  std::vector<double> table = tabulate(n);
  for (int pass = 0; pass < 6; ++pass) {
    std::vector<double> finer = tabulate(2 * n);
    const double change = std::abs(finer.back() - table.back());
    table = std::move(finer);
    n *= 2;
    if (change < 1e-10 * table.back()) break;
  }
  b.arc_table_ = std::move(table);
  b.perimeter_ = b.arc_table_.back();

  if (norm(b.position(0.0) - b.position(1.0)) > 1e-12 * b.perimeter_)
    fail(ErrorKind::invalid_parameter, "curve is not closed");
  return b;
}

Vec2 ParametricBoundary::to_local(Vec2 p) const {
  const Vec2 d = p - center_;
  const double c = std::cos(params_.rotation), s = std::sin(params_.rotation);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Vec2 ParametricBoundary::from_local(Vec2 q) const {
  const double c = std::cos(params_.rotation), s = std::sin(params_.rotation);
  return {c * q.x - s * q.y, s * q.x + c * q.y};
}

Vec2 ParametricBoundary::position(double t) const {
  const double th = two_pi * t;
  const double ct = std::cos(th), st = std::sin(th);
  Vec2 q;
  switch (kind_) {
    case CurveKind::circle: q = {params_.radius * ct, params_.radius * st}; break;
    case CurveKind::ellipse: q = {params_.semi_a * ct, params_.semi_b * st}; break;
    case CurveKind::star: {
      const double rho = params_.radius * (1.0 + params_.amplitude * std::sin(params_.folds * th));
      q = {rho * ct, rho * st};
      break;
    }
  }
  return center_ + from_local(q);
}

Vec2 ParametricBoundary::derivative(double t) const {
  const double th = two_pi * t;
  const double ct = std::cos(th), st = std::sin(th);
  Vec2 dq;
  switch (kind_) {
    case CurveKind::circle: dq = {-params_.radius * st, params_.radius * ct}; break;
    case CurveKind::ellipse: dq = {-params_.semi_a * st, params_.semi_b * ct}; break;
    case CurveKind::star: {
      const double m = params_.folds;
      const double rho = params_.radius * (1.0 + params_.amplitude * std::sin(m * th));
      const double drho = params_.radius * params_.amplitude * m * std::cos(m * th);
      dq = {drho * ct - rho * st, drho * st + rho * ct};
      break;
    }
  }
  return two_pi * from_local(dq);
}

Vec2 ParametricBoundary::second_derivative(double t) const {
  const double th = two_pi * t;
  const double ct = std::cos(th), st = std::sin(th);
  Vec2 ddq;
  switch (kind_) {
    case CurveKind::circle: ddq = {-params_.radius * ct, -params_.radius * st}; break;
    case CurveKind::ellipse: ddq = {-params_.semi_a * ct, -params_.semi_b * st}; break;
    case CurveKind::star: {
      const double m = params_.folds;
      const double rho = params_.radius * (1.0 + params_.amplitude * std::sin(m * th));
      const double drho = params_.radius * params_.amplitude * m * std::cos(m * th);
      const double ddrho = -params_.radius * params_.amplitude * m * m * std::sin(m * th);
      ddq = {ddrho * ct - 2.0 * drho * st - rho * ct, ddrho * st + 2.0 * drho * ct - rho * st};
      break;
    }
  }
  return (two_pi * two_pi) * from_local(ddq);
}

double ParametricBoundary::subinterval_length(double t0, double t1) const {
  const double half = 0.5 * (t1 - t0), mid = 0.5 * (t1 + t0);
  double sum = 0.0;
  for (std::size_t q = 0; q < gl_nodes.size(); ++q) sum += gl_weights[q] * speed(mid + half * gl_nodes[q]);
  return half * sum;
}

double ParametricBoundary::arc_length(double t) const {
  t = wrap_unit(t);
  const std::size_t n = arc_table_.size() - 1;
  const auto k = std::min(static_cast<std::size_t>(t * static_cast<double>(n)), n - 1);
  const double tk = static_cast<double>(k) / static_cast<double>(n);
  return arc_table_[k] + subinterval_length(tk, t);
}

double ParametricBoundary::parameter_at(double s) const {
  s -= perimeter_ * std::floor(s / perimeter_);
  if (s >= perimeter_) s = 0.0;
  const std::size_t n = arc_table_.size() - 1;
  auto it = std::upper_bound(arc_table_.begin(), arc_table_.end(), s);
  std::size_t k = static_cast<std::size_t>(std::distance(arc_table_.begin(), it));
  k = std::clamp<std::size_t>(k, 1, n) - 1;

  const double dt = 1.0 / static_cast<double>(n);
  const double t0 = static_cast<double>(k) * dt, t1 = t0 + dt;
  const double s0 = arc_table_[k], s1 = arc_table_[k + 1];
  const double ds = s1 - s0;

  // Cubic Hermite of the inverse map t(s) using dt/ds = 1/speed at both ends.
  const double u = (s - s0) / ds;
  const double m0 = ds / speed(t0), m1 = ds / speed(t1);
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  double t = h00 * t0 + h10 * m0 + h01 * t1 + h11 * m1;

  for (int it_newton = 0; it_newton < 4; ++it_newton) {
    const double residual = s0 + subinterval_length(t0, t) - s;
    const double step = residual / speed(t);
    t = std::clamp(t - step, t0, t1);
    if (std::abs(step) < 1e-17) break;
  }
  return wrap_unit(t);
}

BoundaryFrame ParametricBoundary::frame_at_parameter(double t) const {
  const Vec2 d = derivative(t), dd = second_derivative(t);
  const double sp = norm(d);
  BoundaryFrame f;
  f.point = position(t);
  f.tangent = (1.0 / sp) * d;
  f.normal = rotate_cw(f.tangent);
  f.curvature = cross(d, dd) / (sp * sp * sp);
  return f;
}

double ParametricBoundary::level(Vec2 p) const {
  const Vec2 q = to_local(p);
  switch (kind_) {
    case CurveKind::circle: return std::hypot(q.x, q.y) - params_.radius;
    case CurveKind::ellipse: {
      const double u = q.x / params_.semi_a, v = q.y / params_.semi_b;
      return u * u + v * v - 1.0;
    }
    case CurveKind::star: {
      const double th = std::atan2(q.y, q.x);
      const double rho = params_.radius * (1.0 + params_.amplitude * std::sin(params_.folds * th));
      return std::hypot(q.x, q.y) - rho;
    }
  }
  return 0.0;
}

double ParametricBoundary::parameter_of_point(Vec2 p) const {
  const Vec2 q = to_local(p);
  double th = 0.0;
  if (kind_ == CurveKind::ellipse)
    th = std::atan2(q.y / params_.semi_b, q.x / params_.semi_a);
  else
    th = std::atan2(q.y, q.x);
  return wrap_unit(th / two_pi);
}

ControlPointSet discretize_boundary_count(const ParametricBoundary& b, std::size_t count) {
  if (count < 8)
    fail(ErrorKind::too_coarse, "boundary discretization needs at least 8 control points, got " +
                                    std::to_string(count));
  const double L = b.perimeter();
  std::vector<ControlPoint> pts(count);
  for (std::size_t m = 0; m < count; ++m) {
    const double s = L * static_cast<double>(m) / static_cast<double>(count);
    const BoundaryFrame f = b.frame_at(s);
    pts[m] = {f.point, s, f.normal, f.tangent, f.curvature};
  }
  return ControlPointSet(std::move(pts), L);
}

ControlPointSet discretize_boundary(const ParametricBoundary& b, double spacing_target) {
  if (!(spacing_target > 0.0)) fail(ErrorKind::invalid_parameter, "control-point spacing must be positive");
  const double count = std::round(b.perimeter() / spacing_target);
  if (count < 8.0)
    fail(ErrorKind::too_coarse, "spacing too coarse: fewer than 8 control points");
  return discretize_boundary_count(b, static_cast<std::size_t>(count));
}

}  // namespace kfbi
