#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfbi/bie.hpp"
#include "kfbi/config.hpp"
#include "kfbi/grid.hpp"

namespace kfbi {

inline constexpr int report_schema_version = 1;

/// CSV `x,y,value,inside`, one node per line, rows of constant y (j outer,
/// i inner), 17 significant digits.
void write_field_csv(std::ostream& os, const GridField& f, const CartesianGrid& grid,
                     const NodeClassification& cls);
/// Legacy ASCII STRUCTURED_POINTS; exterior nodes are written as NaN.
void write_field_vtk(std::ostream& os, const GridField& f, const CartesianGrid& grid,
                     const NodeClassification& cls);
void write_field(const std::string& path, FieldFormat format, const GridField& f, const CartesianGrid& grid,
                 const NodeClassification& cls);

struct FieldCsvRow {
  double x = 0.0, y = 0.0, value = 0.0;
  bool inside = false;
};
std::vector<FieldCsvRow> read_field_csv(std::istream& is);

struct ErrorRow {
  int grid = 0;
  double h = 0.0;
  bool ok = false;
  double e_inf = 0.0, e_l2 = 0.0;
  std::optional<double> order_inf, order_l2;
  int iters = 0;
  std::string failure;  // error kind when !ok
};

/// Fills order_inf/order_l2 between consecutive successful rows.
void compute_orders(std::vector<ErrorRow>& rows);
void write_error_table(std::ostream& os, const std::vector<ErrorRow>& rows);

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const IterationStats& s);
nlohmann::json to_json(const ErrorRow& r);

void write_json(const std::string& path, const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace kfbi
