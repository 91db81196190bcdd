#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfbi/bie.hpp"
#include "kfbi/config.hpp"
#include "kfbi/error.hpp"
#include "kfbi/manufactured.hpp"
#include "kfbi/output.hpp"

namespace kfbi {

/// 2 config/validation, 3 solver failure, 4 I/O, 1 anything else.
int exit_code(ErrorKind kind);

struct SolveOutcome {
  KfbiGeometry geometry;
  Solution solution;
  ErrorNorms error;
  int workers = 1;
};

/// One manufactured BVP solve on grid N.
SolveOutcome solve_manufactured(const RunConfig& cfg, int n, const WarningSink& warn = {});

struct ConvergeOutcome {
  std::vector<ErrorRow> rows;
  std::vector<IterationStats> stats;  // one per successful row
  std::vector<ErrorKind> failures;
};

ConvergeOutcome run_converge(const RunConfig& cfg, const WarningSink& warn = {});

/// Entry point of the `kfbi` executable. Errors are reported on `err` as a
/// single line `kfbi-error[<kind>]: <message>`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs the trivial example of every module; one line per check on `out`.
/// Returns the number of failed checks.
int run_selftest(std::ostream& out);

}  // namespace kfbi
