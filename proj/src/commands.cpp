#include "kfbi/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kfbi/partition.hpp"
#include "kfbi/timestepper.hpp"

namespace kfbi {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_parameter:
    case ErrorKind::anisotropic_spacing:
    case ErrorKind::boundary_escapes_box:
    case ErrorKind::resolution:
    case ErrorKind::too_coarse:
    case ErrorKind::near_box:
    case ErrorKind::unsupported:
    case ErrorKind::too_many_workers:
    case ErrorKind::too_small:
      return 2;
    case ErrorKind::no_convergence:
    case ErrorKind::blow_up:
    case ErrorKind::singular_system:
    case ErrorKind::singular_block:
    case ErrorKind::singular_stencil:
    case ErrorKind::zero_pivot:
    case ErrorKind::root_not_found:
      return 3;
    case ErrorKind::io:
      return 4;
    default:
      return 1;
  }
}

SolveOutcome solve_manufactured(const RunConfig& cfg, int n, const WarningSink& warn) {
  const CartesianGrid grid = cfg.grid(n);
  SolveOutcome o{KfbiGeometry::build(cfg.boundary(), grid, cfg.control_spacing * grid.spacing(),
                                     ExecPolicy::parallel, warn),
                 {}, {}, cfg.workers};
  const Manufactured m = manufactured(cfg.exact);
  SourceTerm source;
  const BvpSpec spec = manufactured_spec(m, cfg.bc, cfg.kappa, source, cfg.options);
  auto ev = make_evaluator(o.geometry, cfg.kappa, cfg.workers);
  o.solution = solve_bvp(*ev, spec);
  o.error = interior_error(o.solution.u, grid, o.geometry.cls, m.u);
  if (!cfg.audit.empty())
    if (auto* d = dynamic_cast<DistributedEvaluator*>(ev.get())) {
      std::ofstream os(cfg.audit);
      if (!os) fail(ErrorKind::io, "cannot open '" + cfg.audit + "' for writing");
      d->bus().write_audit(os);
    }
  return o;
}

ConvergeOutcome run_converge(const RunConfig& cfg, const WarningSink& warn) {
  ConvergeOutcome c;
  for (int n : cfg.grids) {
    ErrorRow row;
    row.grid = n;
    row.h = (cfg.box.x_hi - cfg.box.x_lo) / n;
    try {
      const SolveOutcome o = solve_manufactured(cfg, n, warn);
      row.ok = true;
      row.e_inf = o.error.inf;
      row.e_l2 = o.error.l2;
      row.iters = o.solution.stats.inner;
      c.stats.push_back(o.solution.stats);
    } catch (const Error& e) {
      row.failure = std::string(to_string(e.kind())) + ": " + e.what();
      c.failures.push_back(e.kind());
    }
    c.rows.push_back(row);
  }
  compute_orders(c.rows);
  return c;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

nlohmann::json report_base(const RunConfig& cfg) {
  return {{"schema_version", report_schema_version}, {"command", to_string(cfg.command)},
          {"config", to_json(cfg)}, {"workers", cfg.workers}};
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, const WarningSink& warn) {
  const auto t0 = Clock::now();
  const int n = cfg.grids.front();
  const SolveOutcome o = solve_manufactured(cfg, n, warn);
  const CartesianGrid& grid = o.geometry.grid;
  if (!cfg.out.empty()) write_field(cfg.out, cfg.format, o.solution.u, grid, o.geometry.cls);
  const double wall = seconds_since(t0);
  if (!cfg.report.empty()) {
    nlohmann::json r = report_base(cfg);
    r["solves"] = nlohmann::json::array({{{"grid", n},
                                          {"h", grid.spacing()},
                                          {"control_points", o.geometry.controls.size()},
                                          {"e_inf", o.error.inf},
                                          {"e_l2", o.error.l2},
                                          {"stats", to_json(o.solution.stats)}}});
    r["wall_time_seconds"] = wall;
    write_json(cfg.report, r);
  }
  char line[256];
  std::snprintf(line, sizeof line, "grid %d  iters %d  e_inf %.6e  e_l2 %.6e  (%.2f s)\n", n,
                o.solution.stats.inner, o.error.inf, o.error.l2, wall);
  out << line;
  return 0;
}

int cmd_converge(const RunConfig& cfg, std::ostream& out, const WarningSink& warn) {
  const auto t0 = Clock::now();
  const ConvergeOutcome c = run_converge(cfg, warn);
  const double wall = seconds_since(t0);
  std::ostringstream table;
  write_error_table(table, c.rows);
  out << table.str();
  if (!cfg.table.empty()) write_text(cfg.table, table.str());
  if (!cfg.report.empty()) {
    nlohmann::json r = report_base(cfg);
    nlohmann::json rows = nlohmann::json::array(), solves = nlohmann::json::array();
    for (const ErrorRow& row : c.rows) rows.push_back(to_json(row));
    std::size_t s = 0;
    for (const ErrorRow& row : c.rows)
      if (row.ok)
        solves.push_back({{"grid", row.grid}, {"h", row.h}, {"e_inf", row.e_inf}, {"e_l2", row.e_l2},
                          {"stats", to_json(c.stats[s++])}});
    r["error_table"] = rows;
    r["solves"] = solves;
    r["wall_time_seconds"] = wall;
    write_json(cfg.report, r);
  }
  return c.failures.empty() ? 0 : exit_code(c.failures.front());
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

int cmd_gray_scott(const RunConfig& cfg, std::ostream& out, const WarningSink& warn) {
  const auto t0 = Clock::now();
  const CartesianGrid grid = cfg.grid(cfg.grids.front());
  const KfbiGeometry geo = KfbiGeometry::build(cfg.boundary(), grid, cfg.control_spacing * grid.spacing(),
                                               ExecPolicy::parallel, warn);
  const GrayScottRun run = run_gray_scott(geo, cfg.gray_scott, cfg.workers, cfg.snapshots, cfg.options);
  const FieldRange ru = interior_range(run.state.u, geo.cls), rv = interior_range(run.state.v, geo.cls);
  if (!cfg.out.empty()) {
    write_field(with_suffix(cfg.out, "_u"), cfg.format, run.state.u, grid, geo.cls);
    write_field(with_suffix(cfg.out, "_v"), cfg.format, run.state.v, grid, geo.cls);
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
      const std::string tag = "_t" + std::to_string(k);
      write_field(with_suffix(cfg.out, tag + "_u"), cfg.format, run.snapshots[k].u, grid, geo.cls);
      write_field(with_suffix(cfg.out, tag + "_v"), cfg.format, run.snapshots[k].v, grid, geo.cls);
    }
  }
  const double wall = seconds_since(t0);
  if (!cfg.report.empty()) {
    nlohmann::json r = report_base(cfg);
    r["gray_scott"] = {{"steps", run.steps},
                       {"interface_solves", run.interface_solves},
                       {"snapshot_times", run.snapshot_times},
                       {"u_range", {ru.min, ru.max}},
                       {"v_range", {rv.min, rv.max}}};
    r["wall_time_seconds"] = wall;
    write_json(cfg.report, r);
  }
  char line[256];
  std::snprintf(line, sizeof line, "steps %d  u in [%.6f, %.6f]  v in [%.6f, %.6f]  (%.2f s)\n", run.steps,
                ru.min, ru.max, rv.min, rv.max, wall);
  out << line;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel-free boundary integral solver for 2D elliptic problems", "kfbi"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  ConfigOverrides flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "TOML configuration file");
    sub->add_option("--grid", flags.grid, "cells per direction, or a comma list for converge");
    sub->add_option("--box", flags.box, "lo,hi or xlo,xhi,ylo,yhi");
    sub->add_option("--domain", flags.domain, "circle:r | ellipse:a,b | star:r,c,m");
    sub->add_option("--kappa", flags.kappa, "modified Helmholtz coefficient");
    sub->add_option("--bc", flags.bc, "dirichlet | neumann");
    sub->add_option("--scheme", flags.scheme, "gmres | richardson");
    sub->add_option("--tol", flags.tol, "relative residual tolerance");
    sub->add_option("--gamma", flags.gamma, "Richardson relaxation");
    sub->add_option("--restart", flags.restart, "GMRES restart length");
    sub->add_option("--workers", flags.workers, "number of slab workers");
    sub->add_option("--out", flags.out, "field output path");
    sub->add_option("--report", flags.report, "JSON report path");
    sub->add_option("--format", flags.format, "csv | vtk");
  };
  for (const char* name : {"solve", "converge", "gray-scott"}) add_common(app.add_subcommand(name));
  app.add_subcommand("selftest", "run the built-in trivial examples");

  auto report = [&](ErrorKind kind, const std::string& msg) {
    std::string one_line = msg;
    for (char& ch : one_line)
      if (ch == '\n' || ch == '\r') ch = ' ';
    err << "kfbi-error[" << to_string(kind) << "]: " << one_line << '\n';
    return exit_code(kind);
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return report(ErrorKind::config, e.what());
  }

  const WarningSink warn = [&err](const std::string& msg) { err << "kfbi-warning: " << msg << '\n'; };
  try {
    const Command command = parse_command(app.get_subcommands().front()->get_name());
    if (command == Command::selftest) return run_selftest(out) == 0 ? 0 : 1;
    const RunConfig cfg = load_config(command, config_path, flags);
    switch (command) {
      case Command::solve: return cmd_solve(cfg, out, warn);
      case Command::converge: return cmd_converge(cfg, out, warn);
      default: return cmd_gray_scott(cfg, out, warn);
    }
  } catch (const Error& e) {
    return report(e.kind(), e.what());
  } catch (const std::exception& e) {
    err << "kfbi-error[internal]: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace kfbi
