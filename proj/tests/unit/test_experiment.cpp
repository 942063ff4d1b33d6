#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "../support.hpp"
#include "doctest.h"
#include "paraprec/error.hpp"
#include "paraprec/experiment.hpp"
#include "paraprec/manifest.hpp"

using namespace paraprec;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("paraprec_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kGreedyConfig = R"({
  "command": "greedy-precond",
  "problem": {"name": "synthetic", "d": 2, "n": 120, "m_A": 3, "grid_size": 40},
  "sketch": {"kind": "rademacher", "K": 24},
  "constraint": "nonneg",
  "M_max": 4,
  "seed": 7
})";

int run_cli(const std::string& args) {
  const int status = std::system((std::string(PARAPREC_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("same configuration gives byte-identical outputs") {
    std::string csv[2];
    for (int run = 0; run < 2; ++run) {
      ExperimentConfig c = parse_config(kGreedyConfig);
      c.output_dir = scratch("det" + std::to_string(run)).string();
      c.workers = run == 0 ? 1 : 3;
      run_experiment(c);
      csv[run] = read_text(c.output_dir + "/history.csv");
    }
    CHECK(csv[0] == csv[1]);
    CHECK(csv[0].rfind("# schema:", 0) == 0);
  }

  TEST_CASE("configuration errors name the field") {
    try {
      parse_config(R"({"command": "greedy-precond", "M_maks": 3})");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("M_maks") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(R"({"sketch": {"kind": "gaussian"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"constraint": "kappa:abc"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"M_max": "three"})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\n\"command\": \n}"), ParseError);
    CHECK(config_schema().find("\"properties\"") != std::string::npos);
  }

  TEST_CASE("sketch bounds table") {
    BoundsSpec b;
    b.kind = SketchKind::rademacher;
    b.n = {1e4};
    b.m = {2, 5};
    const std::string t = sketch_bounds_table(b);
    CHECK(t.rfind("n\tm=2\tm=5\n", 0) == 0);
    CHECK(t.find(std::to_string(min_sketch_columns(SketchKind::rademacher, 1e4, 5, 10.0, 1e-3).K)) != std::string::npos);
  }

  TEST_CASE("problem directories round trip") {
    const BenchmarkProblem p = synthetic_multiparam(2, 60, 3, 5, 30);
    const fs::path dir = scratch("problem");
    write_problem(dir.string(), p);
    const BenchmarkProblem q = read_problem(dir.string());
    CHECK(q.grid.size() == p.grid.size());
    for (Index g : {0, 13, 29}) {
      const Point& xi = p.grid[g];
      CHECK((q.grid[g] - xi).norm() <= 1e-15);
      CHECK((Matrix(q.op->eval(xi)) - Matrix(p.op->eval(xi))).norm() <= 1e-13 * Matrix(p.op->eval(xi)).norm());
      CHECK((q.rhs->eval(xi) - p.rhs->eval(xi)).norm() <= 1e-13 * p.rhs->eval(xi).norm());
    }
    CHECK((Matrix(q.RX.matrix()) - Matrix(p.RX.matrix())).norm() <= 1e-13 * Matrix(p.RX.matrix()).norm());
  }

  TEST_CASE("preconditioners round trip") {
    const BenchmarkProblem p = synthetic_multiparam(2, 60, 3, 5, 30);
    const Preconditioner P = make_preconditioner(p.op, p.grid, {p.grid[3], p.grid[20]},
                                                 make_sketch(SketchKind::rademacher, 60, 12, 1).dense(),
                                                 Constraint::nonneg());
    const fs::path dir = scratch("precond");
    save_preconditioner(dir.string(), P);
    const Preconditioner Q = load_preconditioner(dir.string(), p.op);
    CHECK(Q.size() == 2);
    CHECK(to_string(Q.constraint()) == "nonneg");
    const Point xi = p.grid[11];
    CHECK((Q.coefficients(xi).lambda - P.coefficients(xi).lambda).norm() <= 1e-12);
  }

  TEST_CASE("command line exit codes") {
    const fs::path out = scratch("cli");
    CHECK(run_cli("sketch-bounds --output-dir " + out.string()) == 0);
    CHECK(fs::exists(out / "bounds.csv"));
    CHECK(run_cli("greedy-precond --bogus-flag") == 2);
    const fs::path bad = out / "bad.json";
    std::ofstream(bad) << R"({"command": "greedy-precond", "unknown_key": 1})";
    CHECK(run_cli("run --config " + bad.string()) == 2);
    CHECK(run_cli("run --config " + (out / "missing.json").string()) == 2);
  }
}
