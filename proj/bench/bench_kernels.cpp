#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "kfbi/arrowhead.hpp"
#include "kfbi/bie.hpp"
#include "kfbi/reference.hpp"

namespace {

using namespace kfbi;

struct Setup {
  KfbiGeometry geo;
  DensityField phi;
  InterfaceSpec spec;
  std::vector<JumpData> jumps;
};

const Setup& setup(int n) {
  static std::map<int, std::unique_ptr<Setup>> cache;
  auto& s = cache[n];
  if (!s) {
    CurveParams p;
    p.radius = 1.0;
    p.amplitude = 0.2;
    p.folds = 4;
    const auto b = ParametricBoundary::build(CurveKind::star, p);
    const auto g = CartesianGrid::build({-1.5, 1.5, -1.5, 1.5}, n, n);
    s = std::make_unique<Setup>(Setup{KfbiGeometry::build(b, g), {}, {}, {}});
    std::vector<double> vals;
    for (const ControlPoint& c : s->geo.controls.points()) vals.push_back(std::sin(3.0 * c.arc));
    s->phi = fit_density(s->geo.controls, vals);
    s->spec.value_jump = &s->phi;
    s->jumps = intersection_jumps(s->spec, s->geo.xs, s->geo.frames, ExecPolicy::serial);
  }
  return *s;
}

ExecPolicy policy(const benchmark::State& st) { return st.range(1) ? ExecPolicy::parallel : ExecPolicy::serial; }

void BM_correction(benchmark::State& st) {
  const Setup& s = setup(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    auto r = correct_rhs(GridField(s.geo.grid), s.geo.grid, s.geo.cls, s.geo.xs, s.jumps, policy(st));
    benchmark::DoNotOptimize(r.field.data().data());
  }
}

void BM_correction_scatter(benchmark::State& st) {
  const Setup& s = setup(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    auto r = reference::correct_rhs(GridField(s.geo.grid), s.geo.grid, s.geo.cls, s.geo.xs, s.jumps);
    benchmark::DoNotOptimize(r.data().data());
  }
}

void BM_fast_solve(benchmark::State& st) {
  const Setup& s = setup(static_cast<int>(st.range(0)));
  const SpectralPlan plan(s.geo.grid, 1.0);
  GridField rhs(s.geo.grid, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(solve_interface_system(rhs, plan, policy(st)).data().data());
}

void BM_fast_solve_reference(benchmark::State& st) {
  const Setup& s = setup(static_cast<int>(st.range(0)));
  GridField rhs(s.geo.grid, 1.0);
  for (auto _ : st)
    benchmark::DoNotOptimize(reference::solve_interface_system(rhs, s.geo.grid, 1.0).data().data());
}

void BM_interpolation(benchmark::State& st) {
  const Setup& s = setup(static_cast<int>(st.range(0)));
  GridField field(s.geo.grid, 1.0);
  const std::vector<JumpData> cj = control_jumps(s.geo, s.spec, ExecPolicy::serial);
  for (auto _ : st)
    benchmark::DoNotOptimize(one_sided_values(field, s.geo.grid, s.geo.stencils, cj, Side::interior, policy(st)));
}

void BM_classify(benchmark::State& st) {
  const Setup& s = setup(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(classify_nodes(s.geo.grid, s.geo.boundary, policy(st)));
}

void BM_arrowhead(benchmark::State& st) {
  const int n = 4096;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TridiagonalSystem a{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), {}};
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) {
    a.lower[i] = u(rng);
    a.upper[i] = u(rng);
    a.diag[i] = 3.0 + u(rng);
    f[i] = u(rng);
  }
  ArrowheadSystem sys = ArrowheadSystem::decompose(a, static_cast<int>(st.range(0)));
  sys.precompute_schur();
  for (auto _ : st) benchmark::DoNotOptimize(sys.solve(f, policy(st)));
}

void BM_thomas(benchmark::State& st) {
  const int n = 4096;
  TridiagonalSystem a{std::vector<double>(n, -1.0), std::vector<double>(n, 4.0), std::vector<double>(n, -1.0),
                      std::vector<double>(n, 1.0)};
  for (auto _ : st) benchmark::DoNotOptimize(thomas_solve(a));
}

}  // namespace

BENCHMARK(BM_correction)->ArgsProduct({{256, 512}, {0, 1}});
BENCHMARK(BM_correction_scatter)->Arg(256)->Arg(512);
BENCHMARK(BM_fast_solve)->ArgsProduct({{256, 512}, {0, 1}});
BENCHMARK(BM_fast_solve_reference)->Arg(256)->Arg(512);
BENCHMARK(BM_interpolation)->ArgsProduct({{256, 512}, {0, 1}});
BENCHMARK(BM_classify)->ArgsProduct({{256, 512}, {0, 1}});
BENCHMARK(BM_arrowhead)->ArgsProduct({{2, 8}, {0, 1}});
BENCHMARK(BM_thomas);

BENCHMARK_MAIN();
