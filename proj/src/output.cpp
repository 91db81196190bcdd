#include "kfbi/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "kfbi/error.hpp"

namespace kfbi {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  return os;
}

void check_written(std::ostream& os, const std::string& path) {
  os.flush();
  if (!os) fail(ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace

void write_field_csv(std::ostream& os, const GridField& f, const CartesianGrid& grid,
                     const NodeClassification& cls) {
  os << "x,y,value,inside\n";
  for (int j = 0; j < grid.nodes_y(); ++j)
    for (int i = 0; i < grid.nodes_x(); ++i)
      os << g17(grid.x(i)) << ',' << g17(grid.y(j)) << ',' << g17(f(i, j)) << ','
         << (cls.interior(grid.index(i, j)) ? 1 : 0) << '\n';
}

void write_field_vtk(std::ostream& os, const GridField& f, const CartesianGrid& grid,
                     const NodeClassification& cls) {
  os << "# vtk DataFile Version 3.0\nkfbi field\nASCII\nDATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << grid.nodes_x() << ' ' << grid.nodes_y() << " 1\n";
  os << "ORIGIN " << g17(grid.x(0)) << ' ' << g17(grid.y(0)) << " 0\n";
  os << "SPACING " << g17(grid.spacing()) << ' ' << g17(grid.spacing()) << " 1\n";
  os << "POINT_DATA " << grid.node_count() << "\nSCALARS value double 1\nLOOKUP_TABLE default\n";
  for (int j = 0; j < grid.nodes_y(); ++j)
    for (int i = 0; i < grid.nodes_x(); ++i)
      os << (cls.interior(grid.index(i, j)) ? g17(f(i, j)) : std::string("nan")) << '\n';
}

void write_field(const std::string& path, FieldFormat format, const GridField& f, const CartesianGrid& grid,
                 const NodeClassification& cls) {
  std::ofstream os = open_out(path);
  if (format == FieldFormat::csv)
    write_field_csv(os, f, grid, cls);
  else
    write_field_vtk(os, f, grid, cls);
  check_written(os, path);
}

std::vector<FieldCsvRow> read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x,y,value,inside") fail(ErrorKind::io, "missing field CSV header");
  std::vector<FieldCsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    FieldCsvRow r;
    int inside = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%d", &r.x, &r.y, &r.value, &inside) != 4)
      fail(ErrorKind::io, "malformed field CSV line '" + line + "'");
    r.inside = inside != 0;
    rows.push_back(r);
  }
  return rows;
}

void compute_orders(std::vector<ErrorRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].order_inf.reset();
    rows[k].order_l2.reset();
    if (k == 0 || !rows[k].ok || !rows[k - 1].ok) continue;
    const double r = std::log(rows[k - 1].h / rows[k].h);
    rows[k].order_inf = std::log(rows[k - 1].e_inf / rows[k].e_inf) / r;
    rows[k].order_l2 = std::log(rows[k - 1].e_l2 / rows[k].e_l2) / r;
  }
}

void write_error_table(std::ostream& os, const std::vector<ErrorRow>& rows) {
  os << "grid,h,e_inf,e_l2,order_inf,order_l2,iters\n";
  auto opt = [](const std::optional<double>& v) { return v ? g17(*v) : std::string(); };
  for (const ErrorRow& r : rows) {
    os << r.grid << ',' << g17(r.h) << ',';
    if (r.ok)
      os << g17(r.e_inf) << ',' << g17(r.e_l2) << ',' << opt(r.order_inf) << ',' << opt(r.order_l2) << ','
         << r.iters << '\n';
    else
      os << "FAIL,FAIL,,,\n";
  }
}

nlohmann::json to_json(const RunConfig& cfg) {
  using nlohmann::json;
  static const char* kinds[] = {"circle", "ellipse", "star"};
  json geo = {{"kind", kinds[static_cast<int>(cfg.kind)]},
              {"radius", cfg.curve.radius},
              {"semi_a", cfg.curve.semi_a},
              {"semi_b", cfg.curve.semi_b},
              {"amplitude", cfg.curve.amplitude},
              {"folds", cfg.curve.folds},
              {"rotation", cfg.curve.rotation},
              {"center", {cfg.center.x, cfg.center.y}}};
  json j = {
      {"command", to_string(cfg.command)},
      {"pde", {{"kappa", cfg.kappa}, {"bc", to_string(cfg.bc)}, {"exact", cfg.exact}}},
      {"geometry", geo},
      {"grid",
       {{"box", {cfg.box.x_lo, cfg.box.x_hi, cfg.box.y_lo, cfg.box.y_hi}},
        {"n", cfg.grids},
        {"control_spacing", cfg.control_spacing}}},
      {"solver",
       {{"scheme", to_string(cfg.options.scheme)},
        {"tol", cfg.options.tol},
        {"restart", cfg.options.restart},
        {"max_restarts", cfg.options.max_restarts},
        {"gamma", cfg.options.gamma},
        {"max_iters", cfg.options.max_iters},
        {"workers", cfg.workers}}},
      {"output",
       {{"field", cfg.out},
        {"format", cfg.format == FieldFormat::csv ? "csv" : "vtk"},
        {"report", cfg.report},
        {"table", cfg.table},
        {"audit", cfg.audit},
        {"snapshots", cfg.snapshots}}}};
  if (cfg.command == Command::gray_scott) {
    const GrayScottParams& p = cfg.gray_scott;
    j["gray_scott"] = {{"gamma", p.gamma}, {"kappa", p.kappa_r}, {"eps0", p.eps0}, {"eps1", p.eps1},
                       {"eps2", p.eps2},   {"dt", p.dt},         {"t_end", p.t_end}};
  }
  return j;
}

nlohmann::json to_json(const IterationStats& s) {
  return {{"scheme", to_string(s.scheme)},
          {"converged", s.converged},
          {"outer", s.outer},
          {"inner", s.inner},
          {"applications", s.applications},
          {"interface_solves", s.interface_solves},
          {"residuals", s.residuals}};
}

nlohmann::json to_json(const ErrorRow& r) {
  nlohmann::json j = {{"grid", r.grid}, {"h", r.h}, {"ok", r.ok}, {"iters", r.iters}};
  if (r.ok) {
    j["e_inf"] = r.e_inf;
    j["e_l2"] = r.e_l2;
  } else {
    j["failure"] = r.failure;
  }
  j["order_inf"] = r.order_inf ? nlohmann::json(*r.order_inf) : nlohmann::json(nullptr);
  j["order_l2"] = r.order_l2 ? nlohmann::json(*r.order_l2) : nlohmann::json(nullptr);
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
  check_written(os, path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os = open_out(path);
  os << text;
  check_written(os, path);
}

}  // namespace kfbi
