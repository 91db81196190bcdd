#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kfbi/commands.hpp"
#include "kfbi/config.hpp"
#include "kfbi/output.hpp"

using namespace kfbi;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "kfbi_cli_test";
  fs::create_directories(p);
  return p;
}

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kfbi");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::config;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

int shell_status(const std::string& cmd) {
  const int s = std::system(cmd.c_str());
  return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

}  // namespace

TEST_CASE("empty config with flags takes the defaults") {
  ConfigOverrides f;
  f.grid = "256";
  f.domain = "circle:1.0";
  const RunConfig cfg = parse_config(Command::solve, "", f);
  CHECK(cfg.grids == std::vector<int>{256});
  CHECK(cfg.kind == CurveKind::circle);
  CHECK(cfg.curve.radius == 1.0);
  CHECK(cfg.options.tol == 1e-8);
  CHECK(cfg.options.scheme == Scheme::gmres);
  CHECK(cfg.options.restart == 30);
  CHECK(cfg.options.gamma == 0.8);
  CHECK(cfg.workers == 1);
  CHECK(cfg.bc == BoundaryCondition::dirichlet);

  const RunConfig gs = parse_config(Command::gray_scott, "");
  CHECK(gs.curve.radius == 1.8);
  CHECK(gs.box.x_hi == 2.0);
}

TEST_CASE("flags override the file") {
  const std::string text = "[solver]\ntol = 1e-6\nscheme = \"richardson\"\n[grid]\nn = [32, 64]\n";
  RunConfig cfg = parse_config(Command::converge, text);
  CHECK(cfg.options.tol == 1e-6);
  CHECK(cfg.options.scheme == Scheme::richardson);
  CHECK(cfg.grids == std::vector<int>{32, 64});
  ConfigOverrides f;
  f.tol = 1e-9;
  f.grid = "16,32,64";
  f.box = "-2,2";
  cfg = parse_config(Command::converge, text, f);
  CHECK(cfg.options.tol == 1e-9);
  CHECK(cfg.grids == std::vector<int>{16, 32, 64});
  CHECK(cfg.box.y_lo == -2.0);
}

TEST_CASE("invalid configurations are rejected") {
  ConfigOverrides f;
  f.tol = -1.0;
  CHECK(kind_of([&] { parse_config(Command::solve, "", f); }) == ErrorKind::invalid_parameter);
  CHECK(exit_code(ErrorKind::invalid_parameter) == 2);

  ConfigOverrides w;
  w.workers = 4;
  w.grid = "8";
  CHECK(kind_of([&] { parse_config(Command::solve, "", w); }) == ErrorKind::too_many_workers);

  CHECK(kind_of([] { parse_config(Command::solve, "[solver]\nfoo = 1\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(Command::solve, "[mystery]\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(Command::solve, "[solver]\ntol = \"small\"\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(Command::solve, "[pde]\nbc = \"robin\"\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(Command::solve, "[pde]\nbc = \"neumann\"\n"); }) == ErrorKind::unsupported);
  try {
    parse_config(Command::solve, "[solver]\n\ntol = = 3\n", {}, "run.toml");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    CHECK(std::string(e.what()).find("run.toml:3") != std::string::npos);
  }
  try {
    parse_config(Command::solve, "[grid]\nbogus = 2\n");
    FAIL("expected an unknown key");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("grid.bogus") != std::string::npos);
  }
}

TEST_CASE("domain specs") {
  RunConfig cfg;
  apply_domain(cfg, "star:1,0.2,4,0.3");
  CHECK(cfg.kind == CurveKind::star);
  CHECK(cfg.curve.amplitude == 0.2);
  CHECK(cfg.curve.folds == 4);
  CHECK(cfg.curve.rotation == 0.3);
  apply_domain(cfg, "ellipse:1,0.5");
  CHECK(cfg.kind == CurveKind::ellipse);
  CHECK(cfg.curve.semi_b == 0.5);
  CHECK(kind_of([&] { apply_domain(cfg, "square:1"); }) == ErrorKind::config);
  CHECK(kind_of([&] { apply_domain(cfg, "star:1,0.2"); }) == ErrorKind::config);
  CHECK(kind_of([&] { apply_domain(cfg, "circle:1,0,4"); }) == ErrorKind::config);
  CHECK(kind_of([&] { apply_domain(cfg, "circle:one"); }) == ErrorKind::config);
}

TEST_CASE("field writers") {
  const CartesianGrid g = CartesianGrid::build({0.0, 1.0, 0.0, 1.0}, 2, 2);
  NodeClassification cls;
  cls.side.assign(g.node_count(), Side::exterior);
  cls.side[g.index(1, 1)] = Side::interior;
  const GridField zero(g, 0.0);
  std::ostringstream csv;
  write_field_csv(csv, zero, g, cls);
  std::istringstream lines(csv.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 10);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1e3, 1e3);
  GridField f(g, 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = dist(rng) / 7.0;
  std::ostringstream os;
  write_field_csv(os, f, g, cls);
  std::istringstream is(os.str());
  const auto rows = read_field_csv(is);
  REQUIRE(rows.size() == 9);
  for (int j = 0, r = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i, ++r) {
      CHECK(rows[r].value == f(i, j));
      CHECK(rows[r].x == g.x(i));
      CHECK(rows[r].y == g.y(j));
      CHECK(rows[r].inside == (i == 1 && j == 1));
    }

  const CartesianGrid v = CartesianGrid::build({-1.2, 1.2, -0.6, 0.6}, 8, 4);
  NodeClassification vc;
  vc.side.assign(v.node_count(), Side::exterior);
  std::ostringstream vtk;
  write_field_vtk(vtk, GridField(v, 1.0), v, vc);
  std::istringstream vs(vtk.str());
  std::string key;
  double a = 0.0, b = 0.0, c = 0.0;
  bool dims = false, origin = false, spacing = false;
  while (vs >> key) {
    if (key == "DIMENSIONS") {
      vs >> a >> b >> c;
      dims = a == 9 && b == 5 && c == 1;
    } else if (key == "ORIGIN") {
      vs >> a >> b >> c;
      origin = std::abs(a + 1.2) < 1e-15 && std::abs(b + 0.6) < 1e-15;
    } else if (key == "SPACING") {
      vs >> a >> b >> c;
      spacing = std::abs(a - 0.3) < 1e-15 && std::abs(b - 0.3) < 1e-15;
    }
  }
  CHECK(dims);
  CHECK(origin);
  CHECK(spacing);
  CHECK(vtk.str().find("nan") != std::string::npos);

  CHECK(kind_of([&] { write_field("/nonexistent/dir/f.csv", FieldFormat::csv, f, g, cls); }) == ErrorKind::io);
}

TEST_CASE("converge tables") {
  ConfigOverrides f;
  f.grid = "64";
  const ConvergeOutcome one = run_converge(parse_config(Command::converge, "", f));
  REQUIRE(one.rows.size() == 1);
  CHECK(!one.rows[0].order_inf);
  std::ostringstream t;
  write_error_table(t, one.rows);
  CHECK(t.str().rfind("grid,h,e_inf,e_l2,order_inf,order_l2,iters\n", 0) == 0);
  CHECK(t.str().find(",,") != std::string::npos);

  f.grid = "32,64,128";
  const ConvergeOutcome three = run_converge(parse_config(Command::converge, "", f));
  REQUIRE(three.rows.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    REQUIRE(three.rows[k].order_inf);
    CHECK(*three.rows[k].order_inf > 1.5);
    CHECK(*three.rows[k].order_inf < 2.6);
  }

  const ConvergeOutcome c = run_converge(parse_config(Command::converge, "[pde]\nexact = \"constant-one\"\n", f));
  for (const ErrorRow& r : c.rows) {
    CHECK(r.ok);
    CHECK(r.e_inf < 1e-10);
  }
}

TEST_CASE("reports are deterministic and embed the table") {
  const fs::path dir = scratch_dir();
  const std::string a = (dir / "a.json").string();
  const std::string table = (dir / "table.csv").string();
  const fs::path cfg = dir / "conv.toml";
  std::ofstream(cfg) << "[grid]\nn = [32, 64]\n[output]\ntable = \"" << table << "\"\n";
  CHECK(cli({"converge", "--config", cfg.string(), "--report", a, "--workers", "2"}).code == 0);
  nlohmann::json ja = read_json(a);
  CHECK(cli({"converge", "--config", cfg.string(), "--report", a, "--workers", "2"}).code == 0);
  nlohmann::json jb = read_json(a);
  CHECK(ja["workers"] == 2);
  CHECK(ja["error_table"].size() == 2);
  CHECK(ja["solves"][0]["stats"]["residuals"].size() > 0);
  ja.erase("wall_time_seconds");
  jb.erase("wall_time_seconds");
  CHECK(ja == jb);
  CHECK(read_file(table).rfind("grid,h,e_inf", 0) == 0);
}

TEST_CASE("exit codes and error lines") {
  const fs::path dir = scratch_dir();
  CliRun r = cli({"solve", "--grid", "32", "--tol", "-1"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("kfbi-error[", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  CHECK(cli({"solve", "--frobnicate"}).code == 2);
  CHECK(cli({"solve", "--config", (dir / "missing.toml").string()}).code == 4);
  CHECK(cli({"solve", "--grid", "32", "--out", "/nonexistent/dir/u.csv"}).code == 4);

  const fs::path hard = dir / "hard.toml";
  std::ofstream(hard) << "[solver]\ntol = 1e-14\nmax_iters = 1\nrestart = 1\nmax_restarts = 1\n";
  r = cli({"solve", "--config", hard.string(), "--grid", "32"});
  CHECK(r.code == 3);
  CHECK(r.err.find("kfbi-error[no-convergence]") != std::string::npos);

  const std::string csv = (dir / "u.csv").string();
  r = cli({"solve", "--grid", "32", "--out", csv});
  CHECK(r.code == 0);
  std::ifstream in(csv);
  CHECK(read_field_csv(in).size() == 33u * 33u);

  const std::string gs = (dir / "gs.vtk").string();
  CHECK(cli({"gray-scott", "--grid", "64", "--out", gs, "--format", "vtk"}).code == 0);
  CHECK(fs::exists(dir / "gs_u.vtk"));
  CHECK(fs::exists(dir / "gs_v.vtk"));
}

TEST_CASE("the installed binary") {
  const std::string bin = KFBI_CLI;
  CHECK(shell_status(bin + " selftest > /dev/null") == 0);
  CHECK(shell_status(bin + " solve --grid 32 --tol -1 2> /dev/null") == 2);
  CHECK(shell_status(bin + " solve --grid 32 > /dev/null") == 0);
}
