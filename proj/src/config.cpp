#include "kfbi/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "kfbi/error.hpp"
#include "kfbi/manufactured.hpp"
#include "kfbi/partition.hpp"

namespace kfbi {

std::string to_string(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::converge: return "converge";
    case Command::gray_scott: return "gray-scott";
    case Command::selftest: return "selftest";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  if (s == "solve") return Command::solve;
  if (s == "converge") return Command::converge;
  if (s == "gray-scott") return Command::gray_scott;
  if (s == "selftest") return Command::selftest;
  fail(ErrorKind::config, "unknown command '" + s + "'");
}

ParametricBoundary RunConfig::boundary() const { return ParametricBoundary::build(kind, curve, center); }

CartesianGrid RunConfig::grid(int n) const { return CartesianGrid::build(box, n, n); }

namespace {

std::vector<double> split_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      fail(ErrorKind::config, what + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorKind::config, what + ": empty list");
  return out;
}

int as_int(double v, const std::string& what) {
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(ErrorKind::config, what + " must be an integer");
  return static_cast<int>(v);
}

std::vector<int> parse_grids(const std::string& s) {
  std::vector<int> out;
  for (double v : split_numbers(s, "grid")) out.push_back(as_int(v, "grid"));
  return out;
}

Box parse_box(const std::vector<double>& v) {
  if (v.size() == 2) return {v[0], v[1], v[0], v[1]};
  if (v.size() == 4) return {v[0], v[1], v[2], v[3]};
  fail(ErrorKind::config, "box takes 2 (lo,hi) or 4 (xlo,xhi,ylo,yhi) numbers");
}

CurveKind parse_kind(const std::string& s) {
  if (s == "circle") return CurveKind::circle;
  if (s == "ellipse") return CurveKind::ellipse;
  if (s == "star") return CurveKind::star;
  fail(ErrorKind::config, "unknown domain kind '" + s + "'");
}

BoundaryCondition parse_bc(const std::string& s) {
  if (s == "dirichlet") return BoundaryCondition::dirichlet;
  if (s == "neumann") return BoundaryCondition::neumann;
  fail(ErrorKind::config, "unknown boundary condition '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "gmres") return Scheme::gmres;
  if (s == "richardson") return Scheme::richardson;
  fail(ErrorKind::config, "unknown scheme '" + s + "'");
}

FieldFormat parse_format(const std::string& s) {
  if (s == "csv") return FieldFormat::csv;
  if (s == "vtk") return FieldFormat::vtk;
  fail(ErrorKind::config, "unknown field format '" + s + "'");
}

std::string where(const toml::node& n, const std::string& key) {
  const auto& src = n.source();
  std::string loc = key;
  if (src.begin.line) loc += " (line " + std::to_string(src.begin.line) + ")";
  return loc;
}

// Typed accessors over one TOML table; every key read is marked so leftovers
// can be reported as unknown.
class Section {
public:
  Section(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

  template <class F>
  void number(const char* key, F&& set) {
    if (const toml::node* n = find(key)) {
      auto v = n->value<double>();
      if (!v || n->is_boolean()) fail(ErrorKind::config, where(*n, qualified(key)) + " must be a number");
      set(*v);
    }
  }
  template <class F>
  void integer(const char* key, F&& set) {
    number(key, [&](double v) { set(as_int(v, qualified(key))); });
  }
  template <class F>
  void string(const char* key, F&& set) {
    if (const toml::node* n = find(key)) {
      auto v = n->value<std::string>();
      if (!v) fail(ErrorKind::config, where(*n, qualified(key)) + " must be a string");
      set(*v);
    }
  }
  template <class F>
  void numbers(const char* key, F&& set) {
    if (const toml::node* n = find(key)) {
      std::vector<double> out;
      if (auto v = n->value<double>(); v && !n->is_boolean()) {
        out.push_back(*v);
      } else if (const toml::array* a = n->as_array()) {
        for (const toml::node& e : *a) {
          auto x = e.value<double>();
          if (!x || e.is_boolean()) fail(ErrorKind::config, where(e, qualified(key)) + " must hold numbers");
          out.push_back(*x);
        }
      } else {
        fail(ErrorKind::config, where(*n, qualified(key)) + " must be a number or an array of numbers");
      }
      set(out);
    }
  }
  void finish() const {
    if (!t_) return;
    for (auto&& [k, v] : *t_)
      if (!used_.count(std::string(k.str())))
        fail(ErrorKind::config, "unknown key " + where(v, qualified(std::string(k.str()))));
  }

private:
  std::string qualified(const std::string& key) const { return name_ + "." + key; }
  const toml::node* find(const char* key) {
    if (!t_) return nullptr;
    used_.insert(key);
    return t_->get(key);
  }
  const toml::table* t_;
  std::string name_;
  std::set<std::string> used_;
};

void read_file_config(RunConfig& cfg, const toml::table& root) {
  static const std::set<std::string> sections{"pde", "geometry", "grid", "solver", "output", "gray_scott"};
  for (auto&& [k, v] : root) {
    const std::string key(k.str());
    if (!sections.count(key)) fail(ErrorKind::config, "unknown section " + where(v, key));
    if (!v.is_table()) fail(ErrorKind::config, where(v, key) + " must be a table");
  }
  auto table = [&](const char* name) { return root.get_as<toml::table>(name); };

  Section pde(table("pde"), "pde");
  pde.number("kappa", [&](double v) { cfg.kappa = v; });
  pde.string("bc", [&](const std::string& v) { cfg.bc = parse_bc(v); });
  pde.string("exact", [&](const std::string& v) { cfg.exact = v; });
  pde.finish();

  Section geo(table("geometry"), "geometry");
  geo.string("domain", [&](const std::string& v) { apply_domain(cfg, v); });
  geo.string("kind", [&](const std::string& v) { cfg.kind = parse_kind(v); });
  geo.number("radius", [&](double v) { cfg.curve.radius = v; });
  geo.number("semi_a", [&](double v) { cfg.curve.semi_a = v; });
  geo.number("semi_b", [&](double v) { cfg.curve.semi_b = v; });
  geo.number("amplitude", [&](double v) { cfg.curve.amplitude = v; });
  geo.integer("folds", [&](int v) { cfg.curve.folds = v; });
  geo.number("rotation", [&](double v) { cfg.curve.rotation = v; });
  geo.numbers("center", [&](const std::vector<double>& v) {
    if (v.size() != 2) fail(ErrorKind::config, "geometry.center takes two numbers");
    cfg.center = {v[0], v[1]};
  });
  geo.finish();

  Section grid(table("grid"), "grid");
  grid.numbers("box", [&](const std::vector<double>& v) { cfg.box = parse_box(v); });
  grid.numbers("n", [&](const std::vector<double>& v) {
    cfg.grids.clear();
    for (double x : v) cfg.grids.push_back(as_int(x, "grid.n"));
  });
  grid.number("control_spacing", [&](double v) { cfg.control_spacing = v; });
  grid.finish();

  Section solver(table("solver"), "solver");
  solver.string("scheme", [&](const std::string& v) { cfg.options.scheme = parse_scheme(v); });
  solver.number("tol", [&](double v) { cfg.options.tol = v; });
  solver.integer("restart", [&](int v) { cfg.options.restart = v; });
  solver.integer("max_restarts", [&](int v) { cfg.options.max_restarts = v; });
  solver.number("gamma", [&](double v) { cfg.options.gamma = v; });
  solver.integer("max_iters", [&](int v) { cfg.options.max_iters = v; });
  solver.integer("workers", [&](int v) { cfg.workers = v; });
  solver.finish();

  Section out(table("output"), "output");
  out.string("field", [&](const std::string& v) { cfg.out = v; });
  out.string("format", [&](const std::string& v) { cfg.format = parse_format(v); });
  out.string("report", [&](const std::string& v) { cfg.report = v; });
  out.string("table", [&](const std::string& v) { cfg.table = v; });
  out.string("audit", [&](const std::string& v) { cfg.audit = v; });
  out.numbers("snapshots", [&](const std::vector<double>& v) { cfg.snapshots = v; });
  out.finish();

  Section gs(table("gray_scott"), "gray_scott");
  GrayScottParams& p = cfg.gray_scott;
  gs.number("gamma", [&](double v) { p.gamma = v; });
  gs.number("kappa", [&](double v) { p.kappa_r = v; });
  gs.number("eps0", [&](double v) { p.eps0 = v; });
  gs.number("eps1", [&](double v) { p.eps1 = v; });
  gs.number("eps2", [&](double v) { p.eps2 = v; });
  gs.number("dt", [&](double v) { p.dt = v; });
  gs.number("t_end", [&](double v) { p.t_end = v; });
  gs.finish();
}

void apply_overrides(RunConfig& cfg, const ConfigOverrides& f) {
  if (f.grid) cfg.grids = parse_grids(*f.grid);
  if (f.box) cfg.box = parse_box(split_numbers(*f.box, "box"));
  if (f.domain) apply_domain(cfg, *f.domain);
  if (f.kappa) cfg.kappa = *f.kappa;
  if (f.bc) cfg.bc = parse_bc(*f.bc);
  if (f.scheme) cfg.options.scheme = parse_scheme(*f.scheme);
  if (f.tol) cfg.options.tol = *f.tol;
  if (f.gamma) cfg.options.gamma = *f.gamma;
  if (f.restart) cfg.options.restart = *f.restart;
  if (f.workers) cfg.workers = *f.workers;
  if (f.out) cfg.out = *f.out;
  if (f.report) cfg.report = *f.report;
  if (f.format) cfg.format = parse_format(*f.format);
}

void invalid(const std::string& what) { fail(ErrorKind::invalid_parameter, what); }

}  // namespace

void apply_domain(RunConfig& cfg, const std::string& spec) {
  const auto colon = spec.find(':');
  cfg.kind = parse_kind(spec.substr(0, colon));
  if (colon == std::string::npos) return;
  const std::vector<double> v = split_numbers(spec.substr(colon + 1), "domain");
  std::size_t rot = 0;
  switch (cfg.kind) {
    case CurveKind::circle:
      cfg.curve.radius = v[0];
      rot = 1;
      break;
    case CurveKind::ellipse:
      if (v.size() < 2) fail(ErrorKind::config, "ellipse domain needs a,b");
      cfg.curve.semi_a = v[0];
      cfg.curve.semi_b = v[1];
      rot = 2;
      break;
    case CurveKind::star:
      if (v.size() < 3) fail(ErrorKind::config, "star domain needs r,c,m");
      cfg.curve.radius = v[0];
      cfg.curve.amplitude = v[1];
      cfg.curve.folds = as_int(v[2], "star folds");
      rot = 3;
      break;
  }
  if (v.size() > rot + 1) fail(ErrorKind::config, "too many domain parameters in '" + spec + "'");
  if (v.size() == rot + 1) cfg.curve.rotation = v[rot];
}

void validate(const RunConfig& cfg) {
  const SolverOptions& o = cfg.options;
  if (!(o.tol > 0.0) || !std::isfinite(o.tol)) invalid("solver.tol must be positive");
  if (o.restart < 1) invalid("solver.restart must be at least 1");
  if (o.max_restarts < 1) invalid("solver.max_restarts must be at least 1");
  if (o.max_iters < 1) invalid("solver.max_iters must be at least 1");
  if (!(o.gamma > 0.0) || !std::isfinite(o.gamma)) invalid("solver.gamma must be positive");
  if (cfg.workers < 1) invalid("solver.workers must be at least 1");
  if (!(cfg.kappa >= 0.0) || !std::isfinite(cfg.kappa)) invalid("pde.kappa must be non-negative");
  if (!(cfg.control_spacing > 0.0)) invalid("grid.control_spacing must be positive");
  if (cfg.grids.empty()) invalid("grid.n is empty");
  if (cfg.command == Command::solve || cfg.command == Command::converge) {
    const auto names = manufactured_names();
    if (std::find(names.begin(), names.end(), cfg.exact) == names.end())
      fail(ErrorKind::config, "unknown exact solution '" + cfg.exact + "'");
    if (cfg.bc == BoundaryCondition::neumann && cfg.kappa == 0.0)
      fail(ErrorKind::unsupported, "Neumann problem with kappa = 0 has a nullspace");
  }
  if (cfg.command == Command::gray_scott) cfg.gray_scott.validate();
  for (double t : cfg.snapshots)
    if (!(t >= 0.0)) invalid("output.snapshots must be non-negative times");

  const ParametricBoundary b = cfg.boundary();
  for (int n : cfg.grids) {
    if (n < 8) invalid("grid.n must be at least 8, got " + std::to_string(n));
    const CartesianGrid g = cfg.grid(n);
    partition_grid(g, cfg.workers);
    const Box& box = g.box();
    for (int k = 0; k < 1024; ++k) {
      const Vec2 p = b.position(k / 1024.0);
      if (p.x <= box.x_lo || p.x >= box.x_hi || p.y <= box.y_lo || p.y >= box.y_hi)
        fail(ErrorKind::boundary_escapes_box, "domain boundary leaves the box");
    }
  }
}

RunConfig parse_config(Command command, const std::string& toml_text, const ConfigOverrides& flags,
                       const std::string& source_name) {
  RunConfig cfg;
  cfg.command = command;
  if (command == Command::gray_scott) {
    cfg.curve.radius = 1.8;
    cfg.box = {-2.0, 2.0, -2.0, 2.0};
  }
  toml::table root;
  try {
    root = toml::parse(toml_text, source_name);
  } catch (const toml::parse_error& e) {
    const auto& src = e.source();
    fail(ErrorKind::config, source_name + ":" + std::to_string(src.begin.line) + ":" +
                                std::to_string(src.begin.column) + ": " + std::string(e.description()));
  }
  read_file_config(cfg, root);
  apply_overrides(cfg, flags);
  validate(cfg);
  return cfg;
}

RunConfig load_config(Command command, const std::optional<std::string>& path, const ConfigOverrides& flags) {
  std::string text;
  if (path) {
    std::ifstream in(*path);
    if (!in) fail(ErrorKind::io, "cannot read config file '" + *path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config(command, text, flags, path.value_or("config"));
}

}  // namespace kfbi
