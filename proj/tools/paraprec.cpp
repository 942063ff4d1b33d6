#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "paraprec/error.hpp"
#include "paraprec/experiment.hpp"
#include "paraprec/manifest.hpp"
#include "paraprec/parallel.hpp"

using namespace paraprec;

namespace {

struct Common {
  std::string output_dir = "paraprec-out";
  unsigned workers = default_workers();
  std::uint64_t seed = 0;
  std::string constraint = "none";
  bool diagnostics = false;
  // problem
  std::string problem = "adr";
  int mesh_side = 40;
  double D = 50.0;
  Index grid_size = 250;
  int d = 4;
  Index n = 500;
  int m_A = 4;
  std::string import_dir;
  // sketch
  std::string sketch = "psrht";
  Index K = 128;
  std::optional<std::uint64_t> sketch_seed;
};

void add_common(CLI::App* app, Common& c, bool with_sketch) {
  app->add_option("--output-dir", c.output_dir, "Directory for CSV/JSON artifacts");
  app->add_option("--workers", c.workers, "Worker threads for parameter sweeps")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "Root seed");
  app->add_option("--problem", c.problem, "adr, synthetic or import")->check(CLI::IsMember({"adr", "synthetic", "import"}));
  app->add_option("--mesh-side", c.mesh_side, "ADR mesh side (n = side^2)");
  app->add_option("--D", c.D, "ADR advection strength");
  app->add_option("--grid-size", c.grid_size, "Number of training points");
  app->add_option("--dim", c.d, "Synthetic: parameter dimension");
  app->add_option("--n", c.n, "Synthetic: problem size");
  app->add_option("--terms", c.m_A, "Synthetic: number of affine terms");
  app->add_option("--import", c.import_dir, "Problem directory with manifest.json");
  if (with_sketch) {
    app->add_option("--constraint", c.constraint, "none, nonneg or kappa:<value>");
    app->add_flag("--diagnostics", c.diagnostics, "Dense condition numbers (n <= 2000)");
    app->add_option("--sketch", c.sketch, "psrht, rademacher, hadamard or identity");
    app->add_option("--K", c.K, "Sketch columns");
    app->add_option("--sketch-seed", c.sketch_seed, "Sketch seed (default derived from --seed)");
  }
}

ExperimentConfig to_config(const std::string& command, const Common& c) {
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.output_dir = c.output_dir;
  cfg.workers = c.workers;
  cfg.seed = c.seed;
  try {
    cfg.constraint = parse_constraint(c.constraint);
    cfg.sketch.kind = parse_sketch_kind(c.sketch);
  } catch (const InvalidArgument& e) {
    throw ConfigError("", e.what());
  }
  cfg.diagnostics = c.diagnostics;
  cfg.problem.name = c.problem;
  if (!c.import_dir.empty()) {
    cfg.problem.name = "import";
    cfg.problem.import_dir = c.import_dir;
  }
  cfg.problem.mesh_side = c.mesh_side;
  cfg.problem.D = c.D;
  cfg.problem.grid_size = c.grid_size;
  cfg.problem.d = c.d;
  cfg.problem.n = c.n;
  cfg.problem.m_A = c.m_A;
  cfg.sketch.K = c.K;
  cfg.sketch.seed = c.sketch_seed;
  return cfg;
}

PointSet to_points(const std::vector<double>& xs) {
  PointSet p;
  for (double x : xs) p.push_back(make_point(x));
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpolated inverses of parameter-dependent operators"};
  app.require_subcommand(1);
  Common c;
  std::optional<ExperimentConfig> cfg;

  // sketch-bounds
  auto* sb = app.add_subcommand("sketch-bounds", "Minimal sketch size K for a quasi-optimality ratio");
  std::string dist = "psrht", form = "table";
  std::vector<double> ns = {1e4, 1e6, 1e8};
  std::vector<int> ms = {2, 5, 10, 20, 50};
  double ratio = 10.0, delta = 1e-3;
  sb->add_option("--dist", dist, "psrht or rademacher");
  sb->add_option("--n", ns, "Problem sizes")->expected(1, -1);
  sb->add_option("--m", ms, "Interpolation dimensions")->expected(1, -1);
  sb->add_option("--ratio", ratio, "sqrt((1+eps')/(1-eps'))");
  sb->add_option("--delta", delta, "Failure probability");
  sb->add_option("--form", form, "P-SRHT bound variant: table or printed")->check(CLI::IsMember({"table", "printed"}));
  sb->add_option("--output-dir", c.output_dir, "Directory for bounds.csv");

  auto* bp = app.add_subcommand("build-precond", "Preconditioner with prescribed interpolation points");
  add_common(bp, c, true);
  std::vector<double> points;
  bp->add_option("--points", points, "Interpolation points (scalar parameter)")->expected(1, -1)->required();

  auto* gp = app.add_subcommand("greedy-precond", "Greedy interpolation points");
  add_common(gp, c, true);
  Index M_max = 10;
  std::optional<double> seed_point;
  std::string strategy = "frob", resume;
  Index reduced_dim = 0;
  std::vector<Index> kappa_at;
  gp->add_option("--M", M_max, "Number of interpolation points")->check(CLI::PositiveNumber);
  gp->add_option("--seed-point", seed_point, "First interpolation point (default: argmax rule)");
  gp->add_option("--strategy", strategy, "frob or delta")->check(CLI::IsMember({"frob", "delta"}));
  gp->add_option("--reduced-dim", reduced_dim, "POD rank for the delta strategy");
  gp->add_option("--kappa-at", kappa_at, "Restrict diagnostics to these m");
  gp->add_option("--resume", resume, "Continue from a saved preconditioner directory");

  auto* rb = app.add_subcommand("rb-greedy", "Reduced basis greedy");
  add_common(rb, c, true);
  std::string mode = "precond_reuse";
  Index R = 10, stride = 5;
  rb->add_option("--mode", mode, "ideal, standard, precond_fixed or precond_reuse");
  rb->add_option("--R", R, "Reduced dimension");
  rb->add_option("--validation-stride", stride, "Hold out every k-th grid point (0: validate on all)");
  rb->add_option("--M", M_max, "precond_fixed: number of interpolation points");
  rb->add_option("--seed-point", seed_point, "precond_fixed: first interpolation point");

  auto* sw = app.add_subcommand("sweep", "Per-parameter residual, kappa and delta sweeps");
  add_common(sw, c, true);
  sw->add_option("--points", points, "Interpolation points (default: greedy with --M)")->expected(1, -1);
  sw->add_option("--M", M_max, "Greedy size when no points are given");
  sw->add_option("--reduced-dim", reduced_dim, "POD rank for delta sweeps");

  auto* ei = app.add_subcommand("eim-inspect", "Magic points of the normal-equation surrogate");
  add_common(ei, c, false);

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string config_path;
  run->add_option("--config", config_path, "Config file")->required();

  auto* schema = app.add_subcommand("schema", "Print the config JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (schema->parsed()) {
      std::cout << config_schema();
      return 0;
    }
    if (run->parsed()) {
      cfg = parse_config(read_text(config_path), config_path);
    } else if (sb->parsed()) {
      ExperimentConfig e;
      e.command = "sketch-bounds";
      e.output_dir = c.output_dir;
      try {
        e.bounds.kind = parse_sketch_kind(dist);
      } catch (const InvalidArgument& ex) {
        throw ConfigError("--dist", ex.what());
      }
      e.bounds.n = ns;
      e.bounds.m = ms;
      e.bounds.ratio = ratio;
      e.bounds.delta = delta;
      e.bounds.form = form == "printed" ? SrhtBoundForm::printed : SrhtBoundForm::table;
      cfg = e;
    } else {
      for (auto* sub : {bp, gp, rb, sw, ei})
        if (sub->parsed()) cfg = to_config(sub->get_name(), c);
      cfg->points = to_points(points);
      cfg->M_max = M_max;
      if (seed_point) cfg->seed_point = make_point(*seed_point);
      cfg->strategy = strategy;
      cfg->reduced_dim = reduced_dim;
      cfg->kappa_at = kappa_at;
      cfg->resume_dir = resume;
      cfg->R = R;
      cfg->validation_stride = stride;
      try {
        cfg->rb_mode = parse_rb_mode(mode);
      } catch (const InvalidArgument& ex) {
        throw ConfigError("--mode", ex.what());
      }
    }
    const RunResult r = run_experiment(*cfg);
    std::cout << r.stdout_text;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_input_error() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
