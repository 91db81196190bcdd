#include "kfbi/partition.hpp"

#include <algorithm>
#include <exception>
#include <ostream>
#include <thread>

#include "kfbi/error.hpp"

namespace kfbi {

namespace {

struct BusAborted : std::exception {
  const char* what() const noexcept override { return "message bus aborted"; }
};

// Runs body(w) on one thread per worker. On failure the bus is aborted so
// blocked peers return, and the first real error is rethrown.
template <class F>
void run_workers(int m, MessageBus& bus, std::barrier<>* sync, F&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(m));
    for (int w = 0; w < m; ++w)
      threads.emplace_back([&, w] {
        try {
          body(w);
        } catch (...) {
          errors[w] = std::current_exception();
          bus.abort();
          if (sync) sync->arrive_and_drop();
        }
      });
  }
  std::exception_ptr first;
  for (const auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const BusAborted&) {
      if (!first) first = e;
    } catch (...) {
      std::rethrow_exception(e);
    }
  }
  if (first) std::rethrow_exception(first);
}

void copy_columns(const GridField& from, GridField& to, int begin, int end) {
  for (int i = begin; i < end; ++i) std::ranges::copy(from.column(i), to.column(i).begin());
}

}  // namespace

int SlabPartition::owner(int column) const {
  for (int w = 0; w < workers; ++w)
    if (column < column_end[w]) return w;
  return workers - 1;
}

int SlabPartition::halo_begin(int w) const { return std::max(0, column_begin[w] - ghost); }
int SlabPartition::halo_end(int w) const { return std::min(cells_x + 1, column_end[w] + ghost); }

SlabPartition partition_grid(const CartesianGrid& grid, int workers) {
  if (workers < 1) fail(ErrorKind::invalid_parameter, "worker count must be positive");
  const int I = grid.cells_x();
  const int base = I / workers, rem = I % workers;
  if (base < 3)
    fail(ErrorKind::too_many_workers, std::to_string(workers) + " workers leave slabs narrower than 3 of " +
                                          std::to_string(I) + " grid columns");
  SlabPartition p;
  p.workers = workers;
  p.cells_x = I;
  int c = 0;
  for (int w = 0; w < workers; ++w) {
    p.column_begin.push_back(c);
    c += base + (w < rem ? 1 : 0);
    p.column_end.push_back(c);
  }
  p.column_end.back() = I + 1;
  return p;
}

std::string to_string(MessageTag tag) {
  switch (tag) {
    case MessageTag::ghost_exchange: return "ghost-exchange";
    case MessageTag::boundary_gather: return "boundary-gather";
    case MessageTag::boundary_scatter: return "boundary-scatter";
    case MessageTag::separator: return "separator";
  }
  return "unknown";
}

MessageBus::MessageBus(int workers) : boxes_(static_cast<std::size_t>(workers)) {}

void MessageBus::send(WorkerMessage msg) {
  if (msg.to < 0 || msg.to >= workers() || msg.from < 0 || msg.from >= workers())
    fail(ErrorKind::invalid_parameter, "message addressed outside the worker range");
  {
    std::lock_guard lock(mutex_);
    audit_.push_back({audit_.size(), msg.tag, msg.from, msg.to, msg.payload.size()});
    boxes_[msg.to].queue.push_back(std::move(msg));
  }
  cv_.notify_all();
}

WorkerMessage MessageBus::receive(int to, int from, MessageTag tag) {
  std::unique_lock lock(mutex_);
  auto& q = boxes_[to].queue;
  for (;;) {
    const auto it = std::ranges::find_if(q, [&](const WorkerMessage& m) { return m.from == from && m.tag == tag; });
    if (it != q.end()) {
      WorkerMessage msg = std::move(*it);
      q.erase(it);
      return msg;
    }
    if (aborted_) throw BusAborted{};
    cv_.wait(lock);
  }
}

void MessageBus::abort() {
  {
    std::lock_guard lock(mutex_);
    aborted_ = true;
  }
  cv_.notify_all();
}

void MessageBus::reset() {
  std::lock_guard lock(mutex_);
  for (auto& b : boxes_) b.queue.clear();
  aborted_ = false;
}

std::vector<AuditEntry> MessageBus::audit() const {
  std::lock_guard lock(mutex_);
  return audit_;
}

void MessageBus::clear_audit() {
  std::lock_guard lock(mutex_);
  audit_.clear();
}

void MessageBus::write_audit(std::ostream& out) const {
  for (const AuditEntry& e : audit())
    out << "{\"seq\":" << e.sequence << ",\"tag\":\"" << to_string(e.tag) << "\",\"from\":" << e.from
        << ",\"to\":" << e.to << ",\"payload\":" << e.payload << "}\n";
}

void send_ghosts(int w, const GridField& field, const SlabPartition& part, MessageBus& bus) {
  const int cb = part.column_begin[w], ce = part.column_end[w];
  auto pack = [&](int first) {
    std::vector<double> payload;
    for (int i = first; i < first + part.ghost; ++i) {
      const auto col = field.column(i);
      payload.insert(payload.end(), col.begin(), col.end());
    }
    return payload;
  };
  if (w > 0) bus.send({MessageTag::ghost_exchange, w, w - 1, pack(cb)});
  if (w + 1 < part.workers) bus.send({MessageTag::ghost_exchange, w, w + 1, pack(ce - part.ghost)});
}

void receive_ghosts(int w, GridField& field, const SlabPartition& part, MessageBus& bus) {
  const int cb = part.column_begin[w], ce = part.column_end[w];
  const auto ny = static_cast<std::size_t>(field.nodes_y());
  auto unpack = [&](const WorkerMessage& msg, int first) {
    if (msg.payload.size() != ny * static_cast<std::size_t>(part.ghost))
      fail(ErrorKind::size, "ghost message has the wrong size");
    for (int g = 0; g < part.ghost; ++g)
      std::copy_n(msg.payload.begin() + static_cast<std::ptrdiff_t>(g * ny), ny, field.column(first + g).begin());
  };
  if (w > 0) unpack(bus.receive(w, w - 1, MessageTag::ghost_exchange), cb - part.ghost);
  if (w + 1 < part.workers) unpack(bus.receive(w, w + 1, MessageTag::ghost_exchange), ce);
}

void exchange_ghosts(std::span<GridField> fields, const SlabPartition& part, MessageBus& bus) {
  if (static_cast<int>(fields.size()) != part.workers) fail(ErrorKind::size, "one field per worker expected");
  for (int w = 0; w < part.workers; ++w) send_ghosts(w, fields[w], part, bus);
  for (int w = 0; w < part.workers; ++w) receive_ghosts(w, fields[w], part, bus);
}

ControlOwnership assign_controls(const KfbiGeometry& geo, const SlabPartition& part) {
  ControlOwnership own;
  own.owner.resize(geo.stencils.size());
  own.owned.assign(static_cast<std::size_t>(part.workers), {});
  for (std::size_t m = 0; m < geo.stencils.size(); ++m) {
    own.owner[m] = part.owner(geo.stencils[m].i[0]);
    own.owned[own.owner[m]].push_back(m);
  }
  return own;
}

std::vector<std::vector<double>> scatter_boundary(std::span<const double> global,
                                                  const ControlOwnership& own, MessageBus& bus) {
  if (global.size() != own.owner.size()) fail(ErrorKind::length_mismatch, "boundary list length");
  const int m = static_cast<int>(own.owned.size());
  std::vector<std::vector<double>> local(static_cast<std::size_t>(m));
  for (int w = 0; w < m; ++w) {
    std::vector<double> part;
    for (std::size_t k : own.owned[w]) part.push_back(global[k]);
    if (w == 0)
      local[0] = std::move(part);
    else
      bus.send({MessageTag::boundary_scatter, 0, w, std::move(part)});
  }
  for (int w = 1; w < m; ++w) local[w] = bus.receive(w, 0, MessageTag::boundary_scatter).payload;
  return local;
}

std::vector<double> gather_boundary(const std::vector<std::vector<double>>& local,
                                    const ControlOwnership& own, MessageBus& bus) {
  const int m = static_cast<int>(own.owned.size());
  if (static_cast<int>(local.size()) != m) fail(ErrorKind::size, "one list per worker expected");
  for (int w = 1; w < m; ++w) bus.send({MessageTag::boundary_gather, w, 0, local[w]});
  std::vector<double> global(own.owner.size(), 0.0);
  for (int w = 0; w < m; ++w) {
    const std::vector<double> part = w == 0 ? local[0] : bus.receive(0, w, MessageTag::boundary_gather).payload;
    if (part.size() != own.owned[w].size()) fail(ErrorKind::length_mismatch, "gathered list length");
    for (std::size_t r = 0; r < part.size(); ++r) global[own.owned[w][r]] = part[r];
  }
  return global;
}

SlabSolver::SlabSolver(const SpectralPlan& plan, const SlabPartition& part) : plan_(plan), part_(part) {
  if (part.cells_x != plan.grid().cells_x()) fail(ErrorKind::size, "partition does not match the grid");
  std::vector<std::size_t> seps;
  for (int w = 0; w + 1 < part.workers; ++w) seps.push_back(static_cast<std::size_t>(part.separator(w) - 1));
  const auto n = static_cast<std::size_t>(plan.unknowns_x());
  const PartitionMap map = PartitionMap::with_separators(n, seps);
  modes_.reserve(static_cast<std::size_t>(plan.modes()));
  for (int k = 1; k <= plan.modes(); ++k) {
    ArrowheadSystem sys = ArrowheadSystem::decompose(plan.mode_system(k), map);
    sys.precompute_schur();
    modes_.push_back(std::move(sys));
  }
}

void SlabSolver::solve_columns(int w, GridField& field, MessageBus& bus) const {
  const CartesianGrid& g = plan_.grid();
  const int I = g.cells_x(), J = g.cells_y();
  const int m = part_.workers;
  const int nm = plan_.modes();
  const int cb = part_.column_begin[w], ce = part_.column_end[w];
  const int ib = std::max(cb, 1), ie = std::min(ce, I);
  const auto inner = static_cast<std::size_t>(J - 1);
  const SineTransform& fst = plan_.transform();
  for (int i = ib; i < ie; ++i) fst.forward(field.column(i).subspan(1, inner));

  const PartitionMap& map = modes_.front().partition();
  const int first = static_cast<int>(map.block_begin[w]) + 1;
  const int last = static_cast<int>(map.block_end[w]) + 1;  // one past the last block column
  std::vector<double> block(static_cast<std::size_t>(last - first));
  auto load = [&](int k) {
    for (int i = first; i < last; ++i) block[i - first] = field(i, k + 1);
  };
  auto store = [&](int k) {
    for (int i = first; i < last; ++i) field(i, k + 1) = block[i - first];
  };
  for (int k = 0; k < nm; ++k) {
    load(k);
    modes_[k].block_solve(w, block);
    store(k);
  }

  std::vector<double> h_left(static_cast<std::size_t>(nm), 0.0), h_right(static_cast<std::size_t>(nm), 0.0);
  if (m > 1) {
    if (w > 0) {
      std::vector<double> z_first(static_cast<std::size_t>(nm));
      for (int k = 0; k < nm; ++k) z_first[k] = field(first, k + 1);
      bus.send({MessageTag::ghost_exchange, w, w - 1, std::move(z_first)});
    }
    const int sep = w + 1 < m ? part_.separator(w) : -1;
    if (w + 1 < m) {
      const std::vector<double> z_next = bus.receive(w, w + 1, MessageTag::ghost_exchange).payload;
      std::vector<double> rhs(static_cast<std::size_t>(nm));
      for (int k = 0; k < nm; ++k)
        rhs[k] = modes_[k].separator_rhs(w, field(sep, k + 1), field(last - 1, k + 1), z_next[k]);
      bus.send({MessageTag::separator, w, 0, std::move(rhs)});
    }
    if (w == 0) {
      std::vector<std::vector<double>> rhs(static_cast<std::size_t>(m - 1));
      for (int s = 0; s + 1 < m; ++s) rhs[s] = bus.receive(0, s, MessageTag::separator).payload;
      std::vector<std::vector<double>> h(static_cast<std::size_t>(m - 1), std::vector<double>(static_cast<std::size_t>(nm)));
      std::vector<double> gk(static_cast<std::size_t>(m - 1));
      for (int k = 0; k < nm; ++k) {
        for (int s = 0; s + 1 < m; ++s) gk[s] = rhs[s][k];
        const std::vector<double> hk = modes_[k].solve_separators(gk);
        for (int s = 0; s + 1 < m; ++s) h[s][k] = hk[s];
      }
      for (int s = 0; s + 1 < m; ++s) bus.send({MessageTag::separator, 0, s, std::move(h[s])});
    }
    if (w + 1 < m) {
      h_right = bus.receive(w, 0, MessageTag::separator).payload;
      for (int k = 0; k < nm; ++k) field(sep, k + 1) = h_right[k];
      bus.send({MessageTag::ghost_exchange, w, w + 1, h_right});
    }
    if (w > 0) h_left = bus.receive(w, w - 1, MessageTag::ghost_exchange).payload;
  }
  for (int k = 0; k < nm; ++k) {
    load(k);
    modes_[k].back_substitute(w, block, h_left[k], h_right[k]);
    store(k);
  }

  for (int i = ib; i < ie; ++i) fst.inverse(field.column(i).subspan(1, inner));
  for (int i = cb; i < ce; ++i) {
    field(i, 0) = 0.0;
    field(i, J) = 0.0;
  }
  if (cb == 0) std::ranges::fill(field.column(0), 0.0);
  if (ce == I + 1) std::ranges::fill(field.column(I), 0.0);
}

GridField distributed_solve_interface(const GridField& rhs, const SlabSolver& solver, MessageBus& bus) {
  const SlabPartition& part = solver.partition();
  const CartesianGrid& g = solver.plan().grid();
  std::vector<GridField> fields(static_cast<std::size_t>(part.workers), GridField(g, 0.0));
  for (int w = 0; w < part.workers; ++w) copy_columns(rhs, fields[w], part.column_begin[w], part.column_end[w]);
  bus.reset();
  run_workers(part.workers, bus, nullptr, [&](int w) { solver.solve_columns(w, fields[w], bus); });
  GridField out(g, 0.0);
  for (int w = 0; w < part.workers; ++w) copy_columns(fields[w], out, part.column_begin[w], part.column_end[w]);
  return out;
}

DistributedEvaluator::DistributedEvaluator(const KfbiGeometry& geo, double kappa, int workers)
    : geo_(geo),
      plan_(geo.grid, kappa),
      part_(partition_grid(geo.grid, workers)),
      solver_(plan_, part_),
      own_(assign_controls(geo, part_)),
      bus_(workers) {
  worker_intersections_.assign(static_cast<std::size_t>(workers), {});
  for (int w = 0; w < workers; ++w)
    for (std::size_t id = 0; id < geo.xs.items.size(); ++id) {
      const int i = geo.xs.items[id].i;
      if (i >= part_.column_begin[w] - 1 && i < part_.column_end[w]) worker_intersections_[w].push_back(id);
    }
}

namespace {

std::vector<double> pack_densities(const InterfaceSpec& spec) {
  std::vector<double> out;
  for (const DensityField* d : {spec.value_jump, spec.flux_jump}) {
    if (!d) {
      out.push_back(-1.0);
      continue;
    }
    out.push_back(static_cast<double>(d->values().size()));
    out.insert(out.end(), d->values().begin(), d->values().end());
  }
  return out;
}

}  // namespace

void DistributedEvaluator::run_worker(int w, const InterfaceSpec& spec, std::vector<GridField>& fields,
                                      std::vector<OneSidedValue>& boundary, std::barrier<>& sync) {
  const int m = part_.workers;
  const CartesianGrid& g = geo_.grid;
  GridField& f = fields[w];

  // Densities: the coordinator broadcasts the full control-point values.
  std::vector<double> dens;
  if (w == 0) {
    dens = pack_densities(spec);
    for (int t = 1; t < m; ++t) bus_.send({MessageTag::boundary_scatter, 0, t, dens});
  } else {
    dens = bus_.receive(w, 0, MessageTag::boundary_scatter).payload;
  }
  DensityField phi, psi;
  InterfaceSpec local;
  local.source = spec.source;
  local.kappa = kappa();
  std::size_t pos = 0;
  for (int which = 0; which < 2; ++which) {
    const double count = dens.at(pos++);
    if (count < 0.0) continue;
    const auto n = static_cast<std::size_t>(count);
    const std::span<const double> vals(dens.data() + pos, n);
    pos += n;
    (which == 0 ? phi : psi) = fit_density(geo_.controls, vals);
    (which == 0 ? local.value_jump : local.flux_jump) = which == 0 ? &phi : &psi;
  }

  const int cb = part_.column_begin[w], ce = part_.column_end[w];
  std::vector<JumpData> jumps(geo_.xs.items.size());
  for (std::size_t id : worker_intersections_[w])
    jumps[id] = jumps_at(local, geo_.frames[id], geo_.xs.items[id].arc);
  if (local.source)
    for (int i = cb; i < ce; ++i)
      for (int j = 0; j < g.nodes_y(); ++j)
        if (geo_.cls.interior(g.index(i, j))) f(i, j) = local.source->at_node(g, i, j);
  correct_rhs_columns(f, g, geo_.cls, geo_.xs, jumps, cb, ce, ExecPolicy::serial);
  sync.arrive_and_wait();

  solver_.solve_columns(w, f, bus_);
  sync.arrive_and_wait();

  send_ghosts(w, f, part_, bus_);
  receive_ghosts(w, f, part_, bus_);

  std::vector<double> values;
  for (std::size_t c : own_.owned[w]) {
    const JumpData jd = jumps_at(local, geo_.control_frames[c], geo_.controls[c].arc);
    const OneSidedValue v = one_sided_value(f, g, geo_.stencils[c], jd, Side::interior);
    values.insert(values.end(), {v.value, v.dx, v.dy, v.dxx, v.dxy, v.dyy});
  }
  sync.arrive_and_wait();
  if (w != 0) {
    bus_.send({MessageTag::boundary_gather, w, 0, std::move(values)});
    return;
  }
  for (int t = 0; t < m; ++t) {
    const std::vector<double> part = t == 0 ? values : bus_.receive(0, t, MessageTag::boundary_gather).payload;
    if (part.size() != 6 * own_.owned[t].size()) fail(ErrorKind::length_mismatch, "gathered boundary data");
    for (std::size_t r = 0; r < own_.owned[t].size(); ++r) {
      const double* p = part.data() + 6 * r;
      boundary[own_.owned[t][r]] = {p[0], p[1], p[2], p[3], p[4], p[5]};
    }
  }
}

InterfaceResult DistributedEvaluator::evaluate(const InterfaceSpec& spec, bool need_field) {
  ++solves_;
  const int m = part_.workers;
  std::vector<GridField> fields(static_cast<std::size_t>(m), GridField(geo_.grid, 0.0));
  InterfaceResult out;
  out.boundary.resize(geo_.controls.size());
  std::barrier<> sync(m);
  bus_.reset();
  run_workers(m, bus_, &sync, [&](int w) { run_worker(w, spec, fields, out.boundary, sync); });
  if (need_field) {
    out.field = GridField(geo_.grid, 0.0);
    for (int w = 0; w < m; ++w) copy_columns(fields[w], out.field, part_.column_begin[w], part_.column_end[w]);
  }
  return out;
}

}  // namespace kfbi

namespace kfbi {

std::unique_ptr<InterfaceEvaluator> make_evaluator(const KfbiGeometry& geo, double kappa, int workers,
                                                   ExecPolicy exec) {
  if (workers <= 1) return std::make_unique<SerialEvaluator>(geo, kappa, exec);
  return std::make_unique<DistributedEvaluator>(geo, kappa, workers);
}

}  // namespace kfbi
