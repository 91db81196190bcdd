#include <doctest.h>

#include <json.hpp>
#include <set>
#include <sstream>

#include "kfbi/error.hpp"
#include "kfbi/manufactured.hpp"
#include "kfbi/partition.hpp"
#include "oracles.hpp"

using namespace kfbi;

namespace {

std::vector<int> owned_widths(const SlabPartition& p) {
  std::vector<int> out;
  for (int w = 0; w < p.workers; ++w) out.push_back(std::min(p.column_end[w], p.cells_x) - p.column_begin[w]);
  return out;
}

GridField random_field(const CartesianGrid& g, unsigned seed) {
  const auto v = oracle::random_vector(g.node_count(), seed);
  GridField f(g);
  for (std::size_t k = 0; k < v.size(); ++k) f[k] = v[k];
  return f;
}

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double max_abs(const GridField& a) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k]));
  return m;
}

struct Circle {
  ParametricBoundary boundary = oracle::circle();
  CartesianGrid grid;
  KfbiGeometry geo;
  explicit Circle(int n) : grid(oracle::square_grid(1.2, n)), geo(KfbiGeometry::build(boundary, grid)) {}
};

}  // namespace

TEST_CASE("slab sizes") {
  SlabPartition p = partition_grid(oracle::square_grid(1.0, 16), 4);
  CHECK(owned_widths(p) == std::vector<int>{4, 4, 4, 4});
  CHECK(p.column_end.back() == 17);
  CHECK(p.ghost == 2);

  p = partition_grid(CartesianGrid::build({0, 1, 0, 1}, 10, 10), 3);
  CHECK(owned_widths(p) == std::vector<int>{4, 3, 3});
  CHECK(p.separator(0) == 3);
  CHECK(p.owner(0) == 0);
  CHECK(p.owner(4) == 1);
  CHECK(p.owner(10) == 2);
  CHECK(p.halo_begin(1) == 2);
  CHECK(p.halo_end(1) == 9);
  CHECK(p.halo_begin(0) == 0);
  CHECK(p.halo_end(2) == 11);

  p = partition_grid(oracle::square_grid(1.0, 12), 1);
  CHECK(p.column_begin == std::vector<int>{0});
  CHECK(p.column_end == std::vector<int>{13});

  for (int n : {37, 64, 101})
    for (int m : {2, 3, 5, 8}) {
      p = partition_grid(oracle::square_grid(1.0, n), m);
      CHECK(p.column_begin.front() == 0);
      CHECK(p.column_end.back() == n + 1);
      for (int w = 1; w < m; ++w) CHECK(p.column_begin[w] == p.column_end[w - 1]);
      const auto wd = owned_widths(p);
      CHECK(*std::max_element(wd.begin(), wd.end()) - *std::min_element(wd.begin(), wd.end()) <= 1);
    }

  try {
    partition_grid(oracle::square_grid(1.0, 8), 4);
    FAIL("expected too_many_workers");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::too_many_workers);
  }
  CHECK_THROWS_AS(partition_grid(oracle::square_grid(1.0, 8), 0), Error);
}

TEST_CASE("ghost exchange") {
  const CartesianGrid g = oracle::square_grid(1.0, 24);
  const SlabPartition p = partition_grid(g, 4);
  MessageBus bus(4);

  std::vector<GridField> fields(4, GridField(g, 0.0));
  for (int w = 0; w < 4; ++w)
    for (int i = p.column_begin[w]; i < p.column_end[w]; ++i)
      for (int j = 0; j < g.nodes_y(); ++j) fields[w](i, j) = i;
  exchange_ghosts(fields, p, bus);
  for (int w = 1; w < 4; ++w) {
    const int s = p.column_begin[w];
    CHECK(fields[w](s - 2, 5) == s - 2);
    CHECK(fields[w](s - 1, 5) == s - 1);
    CHECK(fields[w - 1](s, 7) == s);
    CHECK(fields[w - 1](s + 1, 7) == s + 1);
  }

  const GridField global = random_field(g, 99);
  for (int w = 0; w < 4; ++w) {
    fields[w] = GridField(g, 0.0);
    for (int i = p.column_begin[w]; i < p.column_end[w]; ++i)
      for (int j = 0; j < g.nodes_y(); ++j) fields[w](i, j) = global(i, j);
  }
  bus.clear_audit();
  exchange_ghosts(fields, p, bus);
  for (int w = 0; w < 4; ++w)
    for (int i = p.halo_begin(w); i < p.halo_end(w); ++i)
      for (int j = 0; j < g.nodes_y(); ++j) CHECK(fields[w](i, j) == global(i, j));
  const auto audit = bus.audit();
  CHECK(audit.size() == 6);
  for (const AuditEntry& e : audit) {
    CHECK(e.tag == MessageTag::ghost_exchange);
    CHECK(std::abs(e.from - e.to) == 1);
    CHECK(e.payload == static_cast<std::size_t>(2 * g.nodes_y()));
  }

  std::vector<GridField> constant(4, GridField(g, 2.5));
  exchange_ghosts(constant, p, bus);
  for (int w = 0; w < 4; ++w)
    for (std::size_t k = 0; k < constant[w].size(); ++k) CHECK(constant[w][k] == 2.5);
}

TEST_CASE("boundary scatter and gather") {
  const Circle c(96);
  for (int m : {1, 2, 3, 4, 8}) {
    const SlabPartition p = partition_grid(c.grid, m);
    const ControlOwnership own = assign_controls(c.geo, p);
    const std::size_t M = c.geo.controls.size();
    REQUIRE(own.owner.size() == M);
    std::size_t total = 0;
    for (int w = 0; w < m; ++w) {
      total += own.owned[w].size();
      CHECK(std::is_sorted(own.owned[w].begin(), own.owned[w].end()));
      for (std::size_t k : own.owned[w]) {
        CHECK(own.owner[k] == w);
        const int col = c.geo.stencils[k].i[0];
        CHECK(p.owner(col) == w);
      }
    }
    CHECK(total == M);

    MessageBus bus(m);
    const auto values = oracle::random_vector(M, 5 + m);
    const auto local = scatter_boundary(values, own, bus);
    const auto back = gather_boundary(local, own, bus);
    CHECK(back == values);

    std::vector<double> index(M);
    for (std::size_t k = 0; k < M; ++k) index[k] = static_cast<double>(k);
    CHECK(gather_boundary(scatter_boundary(index, own, bus), own, bus) == index);
    if (m == 1) {
      CHECK(local[0] == values);
      CHECK(bus.audit().empty());
    } else {
      for (const AuditEntry& e : bus.audit()) {
        const bool coordinator = e.from == 0 || e.to == 0;
        CHECK(coordinator);
      }
    }
  }
}

TEST_CASE("distributed box solve") {
  const CartesianGrid g = oracle::square_grid(1.0, 128);
  const SpectralPlan plan(g, 1.5);
  const GridField rhs = random_field(g, 7);
  const GridField single = solve_interface_system(rhs, plan);

  {
    const SlabSolver s(plan, partition_grid(g, 1));
    MessageBus bus(1);
    const GridField one = distributed_solve_interface(rhs, s, bus);
    CHECK(max_abs_diff(one, single) == 0.0);
  }
  for (int m : {2, 4, 8}) {
    const SlabSolver s(plan, partition_grid(g, m));
    MessageBus bus(m);
    const GridField d = distributed_solve_interface(rhs, s, bus);
    CHECK(max_abs_diff(d, single) < 1e-12 * max_abs(single));

    // Separator values go to the coordinator for every mode, then come back.
    std::vector<AuditEntry> sep;
    for (const AuditEntry& e : bus.audit()) {
      if (e.tag == MessageTag::ghost_exchange) CHECK(std::abs(e.from - e.to) == 1);
      if (e.tag == MessageTag::separator) sep.push_back(e);
    }
    REQUIRE(sep.size() == static_cast<std::size_t>(2 * (m - 1)));
    std::set<int> senders, receivers;
    for (int k = 0; k < m - 1; ++k) {
      CHECK(sep[k].to == 0);
      CHECK(sep[m - 1 + k].from == 0);
      senders.insert(sep[k].from);
      receivers.insert(sep[m - 1 + k].to);
      CHECK(sep[k].payload == static_cast<std::size_t>(plan.modes()));
      CHECK(sep[m - 1 + k].payload == static_cast<std::size_t>(plan.modes()));
    }
    CHECK(senders.size() == static_cast<std::size_t>(m - 1));
    CHECK(receivers == senders);

    MessageBus again(m);
    const GridField d2 = distributed_solve_interface(rhs, s, again);
    CHECK(max_abs_diff(d, d2) == 0.0);
  }

  const double pi = oracle::pi, h = g.spacing(), kappa = 1.5;
  const int p = 3, q = 5, I = g.cells_x(), J = g.cells_y();
  const double mu = -4.0 / (h * h) * (std::pow(std::sin(p * pi / (2.0 * I)), 2) + std::pow(std::sin(q * pi / (2.0 * J)), 2)) - kappa;
  GridField eig(g), erhs(g);
  for (int i = 0; i <= I; ++i)
    for (int j = 0; j <= J; ++j) {
      eig(i, j) = std::sin(p * pi * i / I) * std::sin(q * pi * j / J);
      erhs(i, j) = mu * eig(i, j);
    }
  const SlabSolver s4(plan, partition_grid(g, 4));
  MessageBus bus(4);
  CHECK(max_abs_diff(distributed_solve_interface(erhs, s4, bus), eig) < 1e-11);
}

TEST_CASE("worker count does not change the BVP solution") {
  const Circle c(128);
  SourceTerm f;
  const BvpSpec spec = manufactured_spec(manufactured("harmonic-exp"), BoundaryCondition::dirichlet, 0.0, f);
  SerialEvaluator serial(c.geo, 0.0);
  const Solution ref = solve_bvp(serial, spec);
  for (int m : {1, 2, 4, 8}) {
    DistributedEvaluator ev(c.geo, 0.0, m);
    CHECK(ev.workers() == m);
    const Solution s = solve_bvp(ev, spec);
    double dd = 0.0;
    for (std::size_t k = 0; k < s.density.size(); ++k) dd = std::max(dd, std::abs(s.density[k] - ref.density[k]));
    CHECK(dd < 1e-10);
    CHECK(max_abs_diff(s.u, ref.u) < 1e-10);
    if (m == 1) CHECK(max_abs_diff(s.u, ref.u) == 0.0);
    if (m == 4) {
      DistributedEvaluator ev2(c.geo, 0.0, m);
      CHECK(max_abs_diff(solve_bvp(ev2, spec).u, s.u) == 0.0);
    }
  }
}

TEST_CASE("message audit log") {
  const Circle c(64);
  DistributedEvaluator ev(c.geo, 1.0, 3);
  const auto psi = oracle::random_vector(c.geo.controls.size(), 3);
  apply_KN(ev, psi);
  const auto audit = ev.bus().audit();
  REQUIRE_FALSE(audit.empty());
  for (std::size_t k = 0; k < audit.size(); ++k) {
    CHECK(audit[k].sequence == k);
    if (audit[k].tag == MessageTag::ghost_exchange) CHECK(std::abs(audit[k].from - audit[k].to) == 1);
    if (audit[k].tag == MessageTag::boundary_gather) CHECK(audit[k].to == 0);
    if (audit[k].tag == MessageTag::boundary_scatter) CHECK(audit[k].from == 0);
  }
  std::ostringstream os;
  ev.bus().write_audit(os);
  std::istringstream is(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("tag"));
    CHECK(j.contains("from"));
    ++lines;
  }
  CHECK(lines == audit.size());
}

TEST_CASE("evaluator factory") {
  const Circle c(64);
  CHECK(make_evaluator(c.geo, 0.0, 1)->workers() == 1);
  CHECK(make_evaluator(c.geo, 0.0, 4)->workers() == 4);
  CHECK_THROWS_AS(make_evaluator(c.geo, 0.0, 40), Error);
}
