#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paraprec/bench.hpp"
#include "paraprec/precond.hpp"
#include "paraprec/reduction.hpp"
#include "paraprec/sketch.hpp"

namespace paraprec {

struct ProblemSpec {
  std::string name = "adr";  // adr | synthetic | import
  int mesh_side = 40;
  double D = 50.0;
  Index grid_size = 250;
  int d = 4;
  Index n = 500;
  int m_A = 4;
  std::optional<std::uint64_t> seed;
  std::string import_dir;
};

struct SketchSpec {
  SketchKind kind = SketchKind::psrht;
  Index K = 128;
  std::optional<std::uint64_t> seed;
};

struct BoundsSpec {
  SketchKind kind = SketchKind::psrht;
  std::vector<double> n = {1e4, 1e6, 1e8};
  std::vector<int> m = {2, 5, 10, 20, 50};
  double ratio = 10.0;
  double delta = 1e-3;
  SrhtBoundForm form = SrhtBoundForm::table;
};

// One batch experiment. Parsed from JSON with every key validated; unknown
// keys are rejected with the offending field name.
struct ExperimentConfig {
  std::string command = "greedy-precond";
  ProblemSpec problem;
  SketchSpec sketch;
  BoundsSpec bounds;
  Constraint constraint;
  std::string strategy = "frob";  // frob | delta
  Index M_max = 10;
  PointSet points;                  // build-precond / sweep
  std::optional<Point> seed_point;
  RbMode rb_mode = RbMode::precond_reuse;
  Index R = 10;
  Index validation_stride = 5;
  Index reduced_dim = 0;  // POD rank for delta scoring / sweeps
  bool diagnostics = false;
  std::vector<Index> kappa_at;
  unsigned workers = 1;
  std::string output_dir = "paraprec-out";
  std::uint64_t seed = 0;
  std::string resume_dir;
};

ExperimentConfig parse_config(const std::string& json_text, const std::string& source = "<config>");
std::string config_schema();

BenchmarkProblem build_problem(const ProblemSpec& spec, std::uint64_t root_seed);
SketchMatrix build_sketch(const SketchSpec& spec, Index n, std::uint64_t root_seed);

// Text of the sketch-bounds table (also written to bounds.csv).
std::string sketch_bounds_table(const BoundsSpec& b);

struct RunResult {
  std::string stdout_text;
  std::vector<std::string> files;
};
// Throws paraprec::Error on failure; the CLI maps input errors to exit 2 and
// numerical ones to exit 3.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace paraprec
