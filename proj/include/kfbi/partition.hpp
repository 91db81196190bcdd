#pragma once

#include <barrier>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "kfbi/arrowhead.hpp"
#include "kfbi/bie.hpp"
#include "kfbi/fast_poisson.hpp"
#include "kfbi/grid.hpp"

namespace kfbi {

/// Contiguous slabs of node columns, one per worker. Node columns [0, I)
/// are balanced across workers; the closing box column I belongs to the
/// last slab.
struct SlabPartition {
  int workers = 1;
  int ghost = 2;
  int cells_x = 0;
  std::vector<int> column_begin;  // [begin, end) per worker
  std::vector<int> column_end;

  int width(int w) const { return column_end[w] - column_begin[w]; }
  int owner(int column) const;
  /// Node column holding the arrowhead separator between slabs w and w+1.
  int separator(int w) const { return column_end[w] - 1; }
  /// Own columns plus ghosts, clipped to the grid.
  int halo_begin(int w) const;
  int halo_end(int w) const;
};

SlabPartition partition_grid(const CartesianGrid& grid, int workers);

enum class MessageTag { ghost_exchange, boundary_gather, boundary_scatter, separator };

std::string to_string(MessageTag tag);

struct WorkerMessage {
  MessageTag tag = MessageTag::ghost_exchange;
  int from = 0;
  int to = 0;
  std::vector<double> payload;
};

struct AuditEntry {
  std::size_t sequence = 0;
  MessageTag tag = MessageTag::ghost_exchange;
  int from = 0;
  int to = 0;
  std::size_t payload = 0;
};

/// Point-to-point mailboxes between in-process workers. Receives block until
/// a message with the requested sender and tag arrives (FIFO per pair).
class MessageBus {
public:
  explicit MessageBus(int workers);

  int workers() const { return static_cast<int>(boxes_.size()); }
  void send(WorkerMessage msg);
  WorkerMessage receive(int to, int from, MessageTag tag);
  /// Wakes all blocked receivers with an error; used when a worker fails.
  void abort();
  void reset();

  std::vector<AuditEntry> audit() const;
  void clear_audit();
  /// One JSON object per line.
  void write_audit(std::ostream& out) const;

private:
  struct Box {
    std::deque<WorkerMessage> queue;
  };
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Box> boxes_;
  std::vector<AuditEntry> audit_;
  bool aborted_ = false;
};

/// Per-worker halves of the ghost exchange, for use from worker threads:
/// worker w sends its two edge columns to each neighbour, then fills its
/// ghost columns from the neighbours' messages.
void send_ghosts(int w, const GridField& field, const SlabPartition& part, MessageBus& bus);
void receive_ghosts(int w, GridField& field, const SlabPartition& part, MessageBus& bus);

/// fields[w] is worker w's copy of the grid (own columns authoritative).
void exchange_ghosts(std::span<GridField> fields, const SlabPartition& part, MessageBus& bus);

/// Control point m belongs to the worker owning the centre column of its
/// interpolation stencil.
struct ControlOwnership {
  std::vector<int> owner;
  std::vector<std::vector<std::size_t>> owned;  // ascending global indices per worker
};

ControlOwnership assign_controls(const KfbiGeometry& geo, const SlabPartition& part);

/// Coordinator (worker 0) splits a global control-point list by owner.
std::vector<std::vector<double>> scatter_boundary(std::span<const double> global,
                                                  const ControlOwnership& own, MessageBus& bus);
/// Inverse of scatter_boundary; ordering by global control index.
std::vector<double> gather_boundary(const std::vector<std::vector<double>>& local,
                                    const ControlOwnership& own, MessageBus& bus);

/// Per-mode arrowhead systems whose blocks are the slabs.
class SlabSolver {
public:
  SlabSolver(const SpectralPlan& plan, const SlabPartition& part);

  const SpectralPlan& plan() const { return plan_; }
  const SlabPartition& partition() const { return part_; }
  const ArrowheadSystem& mode(int k) const { return modes_[k]; }  // 0-based mode

  /// Worker w's share of the box solve (transform, arrowhead sweep, inverse
  /// transform) on its own columns of `field`. All workers must run this
  /// concurrently on the same bus.
  void solve_columns(int w, GridField& field, MessageBus& bus) const;

private:
  const SpectralPlan& plan_;
  SlabPartition part_;
  std::vector<ArrowheadSystem> modes_;
};

/// The fast box solve carried out by m workers; equals the single-worker
/// solve up to rounding (bitwise for m = 1).
GridField distributed_solve_interface(const GridField& rhs, const SlabSolver& solver, MessageBus& bus);

class DistributedEvaluator final : public InterfaceEvaluator {
public:
  DistributedEvaluator(const KfbiGeometry& geo, double kappa, int workers);

  const KfbiGeometry& geometry() const override { return geo_; }
  double kappa() const override { return plan_.kappa(); }
  int workers() const override { return part_.workers; }
  InterfaceResult evaluate(const InterfaceSpec& spec, bool need_field) override;

  const SlabPartition& partition() const { return part_; }
  const ControlOwnership& ownership() const { return own_; }
  MessageBus& bus() { return bus_; }

private:
  void run_worker(int w, const InterfaceSpec& spec, std::vector<GridField>& fields,
                  std::vector<OneSidedValue>& boundary, std::barrier<>& sync);

  const KfbiGeometry& geo_;
  SpectralPlan plan_;
  SlabPartition part_;
  SlabSolver solver_;
  ControlOwnership own_;
  std::vector<std::vector<std::size_t>> worker_intersections_;
  MessageBus bus_;
};

}  // namespace kfbi

namespace kfbi {

/// Serial evaluator for one worker, distributed otherwise.
std::unique_ptr<InterfaceEvaluator> make_evaluator(const KfbiGeometry& geo, double kappa, int workers,
                                                   ExecPolicy exec = ExecPolicy::parallel);

}  // namespace kfbi
