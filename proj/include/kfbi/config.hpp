#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kfbi/bie.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/timestepper.hpp"

namespace kfbi {

enum class Command { solve, converge, gray_scott, selftest };

std::string to_string(Command c);
Command parse_command(const std::string& s);

enum class FieldFormat { csv, vtk };

struct RunConfig {
  Command command = Command::solve;

  // [pde]
  double kappa = 0.0;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  std::string exact = "harmonic-exp";

  // [geometry]
  CurveKind kind = CurveKind::circle;
  CurveParams curve;
  Vec2 center;

  // [grid]
  Box box{-1.2, 1.2, -1.2, 1.2};
  std::vector<int> grids{128};   // solve uses the first entry
  double control_spacing = 2.0;  // in units of h

  // [solver]
  SolverOptions options;
  int workers = 1;

  // [output]
  std::string out;     // field file
  FieldFormat format = FieldFormat::csv;
  std::string report;  // JSON report
  std::string table;   // converge error table (CSV)
  std::string audit;   // message transcript (JSON lines)

  // [gray_scott]
  GrayScottParams gray_scott;
  std::vector<double> snapshots;

  ParametricBoundary boundary() const;
  CartesianGrid grid(int n) const;
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<std::string> grid;    // "N" or "N1,N2,..."
  std::optional<std::string> box;     // "lo,hi" or "xlo,xhi,ylo,yhi"
  std::optional<std::string> domain;  // kind:params
  std::optional<double> kappa;
  std::optional<std::string> bc;
  std::optional<std::string> scheme;
  std::optional<double> tol;
  std::optional<double> gamma;
  std::optional<int> restart;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> report;
  std::optional<std::string> format;
};

/// Parses TOML text (empty is fine), applies overrides and validates.
/// Throws Error{config} for syntax or unknown keys and the precondition's
/// own kind for invalid values.
RunConfig parse_config(Command command, const std::string& toml_text, const ConfigOverrides& flags = {},
                       const std::string& source_name = "config");
RunConfig load_config(Command command, const std::optional<std::string>& path,
                      const ConfigOverrides& flags = {});

/// Throws on the first violated precondition.
void validate(const RunConfig& cfg);

/// Domain spec: circle:r, ellipse:a,b, star:r,c,m (optional trailing rotation).
void apply_domain(RunConfig& cfg, const std::string& spec);

}  // namespace kfbi
