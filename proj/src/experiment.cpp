#include "paraprec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "json.hpp"
#include "paraprec/diagnostics.hpp"
#include "paraprec/error.hpp"
#include "paraprec/greedy.hpp"
#include "paraprec/manifest.hpp"
#include "paraprec/parallel.hpp"
#include "paraprec/rng.hpp"

namespace paraprec {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string point_str(const Point& xi) {
  std::string s;
  for (Index j = 0; j < xi.size(); ++j) s += (j ? ";" : "") + num(xi[j]);
  return s;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
  if (!j.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(prefix + it.key(), "unknown key");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& field) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
}

Point json_point(const json& j, const std::string& field) {
  std::vector<double> v;
  if (j.is_number()) v.push_back(j.get<double>());
  else v = get<std::vector<double>>(json{{"v", j}}, "v", field);
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

template <class F>
auto wrap(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

std::string config_schema() {
  return R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "paraprec experiment",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "command": {"enum": ["sketch-bounds", "build-precond", "greedy-precond", "rb-greedy", "sweep", "eim-inspect"]},
    "problem": {"type": "object", "additionalProperties": false, "properties": {
      "name": {"enum": ["adr", "synthetic", "import"]}, "mesh_side": {"type": "integer", "minimum": 4},
      "D": {"type": "number"}, "grid_size": {"type": "integer", "minimum": 1}, "d": {"type": "integer"},
      "n": {"type": "integer"}, "m_A": {"type": "integer"}, "seed": {"type": "integer"}, "path": {"type": "string"}}},
    "sketch": {"type": "object", "additionalProperties": false, "properties": {
      "kind": {"enum": ["psrht", "rademacher", "hadamard", "identity"]}, "K": {"type": "integer", "minimum": 1},
      "seed": {"type": "integer"}}},
    "bounds": {"type": "object", "additionalProperties": false, "properties": {
      "dist": {"enum": ["psrht", "rademacher"]}, "n": {"type": "array", "items": {"type": "number"}},
      "m": {"type": "array", "items": {"type": "integer"}}, "ratio": {"type": "number"},
      "delta": {"type": "number"}, "form": {"enum": ["table", "printed"]}}},
    "constraint": {"type": "string", "pattern": "^(none|nonneg|kappa:.+)$"},
    "strategy": {"enum": ["frob", "delta"]},
    "M_max": {"type": "integer", "minimum": 1},
    "points": {"type": "array"},
    "seed_point": {},
    "rb": {"type": "object", "additionalProperties": false, "properties": {
      "mode": {"enum": ["ideal", "standard", "precond_fixed", "precond_reuse"]}, "R": {"type": "integer"},
      "validation_stride": {"type": "integer", "minimum": 0}}},
    "reduced_dim": {"type": "integer", "minimum": 0},
    "diagnostics": {"type": "boolean"},
    "kappa_at": {"type": "array", "items": {"type": "integer"}},
    "workers": {"type": "integer", "minimum": 1},
    "output_dir": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
    "resume": {"type": "string"}
  }
}
)";
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    throw ParseError(source, 1 + static_cast<long>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n')),
                     e.what());
  }
  check_keys(j, {"command", "problem", "sketch", "bounds", "constraint", "strategy", "M_max", "points", "seed_point",
                 "rb", "reduced_dim", "diagnostics", "kappa_at", "workers", "output_dir", "seed", "resume"},
             "");
  ExperimentConfig c;
  if (j.contains("command")) {
    c.command = get<std::string>(j, "command", "command");
    static const std::set<std::string> cmds = {"sketch-bounds", "build-precond", "greedy-precond",
                                               "rb-greedy",     "sweep",         "eim-inspect"};
    if (!cmds.count(c.command)) throw ConfigError("command", "unknown command '" + c.command + "'");
  }
  if (j.contains("problem")) {
    const json& p = j["problem"];
    check_keys(p, {"name", "mesh_side", "D", "grid_size", "d", "n", "m_A", "seed", "path"}, "problem.");
    if (p.contains("name")) c.problem.name = get<std::string>(p, "name", "problem.name");
    if (c.problem.name != "adr" && c.problem.name != "synthetic" && c.problem.name != "import")
      throw ConfigError("problem.name", "expected adr, synthetic or import");
    if (p.contains("mesh_side")) c.problem.mesh_side = get<int>(p, "mesh_side", "problem.mesh_side");
    if (p.contains("D")) c.problem.D = get<double>(p, "D", "problem.D");
    if (p.contains("grid_size")) c.problem.grid_size = get<Index>(p, "grid_size", "problem.grid_size");
    if (p.contains("d")) c.problem.d = get<int>(p, "d", "problem.d");
    if (p.contains("n")) c.problem.n = get<Index>(p, "n", "problem.n");
    if (p.contains("m_A")) c.problem.m_A = get<int>(p, "m_A", "problem.m_A");
    if (p.contains("seed")) c.problem.seed = get<std::uint64_t>(p, "seed", "problem.seed");
    if (p.contains("path")) c.problem.import_dir = get<std::string>(p, "path", "problem.path");
    if (c.problem.name == "import" && c.problem.import_dir.empty()) throw ConfigError("problem.path", "required for import");
    if (c.problem.mesh_side < 4) throw ConfigError("problem.mesh_side", "must be at least 4");
    if (c.problem.grid_size < 1) throw ConfigError("problem.grid_size", "must be positive");
  }
  if (j.contains("sketch")) {
    const json& s = j["sketch"];
    check_keys(s, {"kind", "K", "seed"}, "sketch.");
    if (s.contains("kind"))
      c.sketch.kind = wrap("sketch.kind", [&] { return parse_sketch_kind(get<std::string>(s, "kind", "sketch.kind")); });
    if (s.contains("K")) c.sketch.K = get<Index>(s, "K", "sketch.K");
    if (s.contains("seed")) c.sketch.seed = get<std::uint64_t>(s, "seed", "sketch.seed");
    if (c.sketch.K < 1) throw ConfigError("sketch.K", "must be positive");
  }
  if (j.contains("bounds")) {
    const json& b = j["bounds"];
    check_keys(b, {"dist", "n", "m", "ratio", "delta", "form"}, "bounds.");
    if (b.contains("dist"))
      c.bounds.kind = wrap("bounds.dist", [&] { return parse_sketch_kind(get<std::string>(b, "dist", "bounds.dist")); });
    if (b.contains("n")) c.bounds.n = get<std::vector<double>>(b, "n", "bounds.n");
    if (b.contains("m")) c.bounds.m = get<std::vector<int>>(b, "m", "bounds.m");
    if (b.contains("ratio")) c.bounds.ratio = get<double>(b, "ratio", "bounds.ratio");
    if (b.contains("delta")) c.bounds.delta = get<double>(b, "delta", "bounds.delta");
    if (b.contains("form")) {
      const auto f = get<std::string>(b, "form", "bounds.form");
      if (f == "table") c.bounds.form = SrhtBoundForm::table;
      else if (f == "printed") c.bounds.form = SrhtBoundForm::printed;
      else throw ConfigError("bounds.form", "expected table or printed");
    }
    if (!(c.bounds.ratio > 1.0)) throw ConfigError("bounds.ratio", "must exceed 1");
    if (!(c.bounds.delta > 0.0 && c.bounds.delta < 1.0)) throw ConfigError("bounds.delta", "must lie in (0, 1)");
  }
  if (j.contains("constraint"))
    c.constraint = wrap("constraint", [&] { return parse_constraint(get<std::string>(j, "constraint", "constraint")); });
  if (j.contains("strategy")) {
    c.strategy = get<std::string>(j, "strategy", "strategy");
    if (c.strategy != "frob" && c.strategy != "delta") throw ConfigError("strategy", "expected frob or delta");
  }
  if (j.contains("M_max")) c.M_max = get<Index>(j, "M_max", "M_max");
  if (c.M_max < 1) throw ConfigError("M_max", "must be at least 1");
  if (j.contains("points")) {
    if (!j["points"].is_array()) throw ConfigError("points", "expected an array");
    for (const auto& p : j["points"]) c.points.push_back(json_point(p, "points"));
  }
  if (j.contains("seed_point") && !j["seed_point"].is_null()) c.seed_point = json_point(j["seed_point"], "seed_point");
  if (j.contains("rb")) {
    const json& r = j["rb"];
    check_keys(r, {"mode", "R", "validation_stride"}, "rb.");
    if (r.contains("mode")) c.rb_mode = wrap("rb.mode", [&] { return parse_rb_mode(get<std::string>(r, "mode", "rb.mode")); });
    if (r.contains("R")) c.R = get<Index>(r, "R", "rb.R");
    if (r.contains("validation_stride")) c.validation_stride = get<Index>(r, "validation_stride", "rb.validation_stride");
    if (c.R < 0) throw ConfigError("rb.R", "must be nonnegative");
    if (c.validation_stride < 0) throw ConfigError("rb.validation_stride", "must be nonnegative");
  }
  if (j.contains("reduced_dim")) c.reduced_dim = get<Index>(j, "reduced_dim", "reduced_dim");
  if (j.contains("diagnostics")) c.diagnostics = get<bool>(j, "diagnostics", "diagnostics");
  if (j.contains("kappa_at")) c.kappa_at = get<std::vector<Index>>(j, "kappa_at", "kappa_at");
  if (j.contains("workers")) c.workers = get<unsigned>(j, "workers", "workers");
  if (c.workers < 1) throw ConfigError("workers", "must be at least 1");
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", "output_dir");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", "seed");
  if (j.contains("resume")) c.resume_dir = get<std::string>(j, "resume", "resume");
  return c;
}

BenchmarkProblem build_problem(const ProblemSpec& spec, std::uint64_t root_seed) {
  if (spec.name == "adr") return assemble_adr(spec.mesh_side, spec.D, spec.grid_size);
  if (spec.name == "synthetic")
    return synthetic_multiparam(spec.d, spec.n, spec.m_A, spec.seed.value_or(derive_seed(root_seed, "problem")),
                                spec.grid_size);
  if (spec.name == "import") return read_problem(spec.import_dir);
  throw ConfigError("problem.name", "unknown problem '" + spec.name + "'");
}

SketchMatrix build_sketch(const SketchSpec& spec, Index n, std::uint64_t root_seed) {
  const Index K = spec.kind == SketchKind::identity ? n : spec.K;
  return make_sketch(spec.kind, n, K, spec.seed.value_or(derive_seed(root_seed, "sketch")));
}

std::string sketch_bounds_table(const BoundsSpec& b) {
  std::ostringstream os;
  os << "n";
  for (int m : b.m) os << "\tm=" << m;
  os << "\n";
  for (double n : b.n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", n);
    os << buf;
    for (int m : b.m) os << "\t" << min_sketch_columns(b.kind, n, m, b.ratio, b.delta, b.form).K;
    os << "\n";
  }
  return os.str();
}

namespace {

struct Out {
  fs::path dir;
  RunResult* res;
  void text(const std::string& name, const std::string& body) {
    write_text((dir / name).string(), body);
    res->files.push_back((dir / name).string());
  }
};

std::string sketch_desc(const SketchMatrix& V) {
  return to_string(V.kind()) + " K=" + std::to_string(V.cols()) + " seed=" + std::to_string(V.seed());
}

json stats_json(std::vector<double> v) {
  if (v.empty()) return json::object();
  const double sup = *std::max_element(v.begin(), v.end());
  return {{"sup", sup},
          {"min", *std::min_element(v.begin(), v.end())},
          {"q50", quantile(v, 0.5)},
          {"q90", quantile(v, 0.9)},
          {"q97", quantile(v, 0.97)}};
}

json problem_json(const BenchmarkProblem& p) {
  return {{"name", p.name}, {"n", p.op->dim()}, {"param_dim", p.op->param_dim()}, {"grid", p.grid.size()},
          {"params", p.params}};
}

// Per-point sketched residual, lambda and optional kappa.
std::string precond_sweep(const Preconditioner& P, const PointSet& grid, bool diag, unsigned workers, json& summary) {
  std::vector<double> res(grid.size()), kap;
  std::vector<Vector> lam(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t g) {
    res[g] = P.sketched_residual(grid[g]);
    lam[g] = P.size() ? P.coefficients(grid[g]).lambda : Vector();
  });
  if (diag) {
    KappaEvaluator kev(P.op_ptr());
    sup_kappa(P, grid, kev, workers, &kap);
  }
  std::ostringstream os;
  os << "# schema: paraprec-precond-sweep/1\n";
  os << "xi,sketch_residual" << (diag ? ",kappa" : "");
  for (std::size_t i = 0; i < P.size(); ++i) os << ",lambda_" << i + 1;
  os << "\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    os << point_str(grid[g]) << ',' << num(res[g]);
    if (diag) os << ',' << num(kap[g]);
    for (Index i = 0; i < lam[g].size(); ++i) os << ',' << num(lam[g][i]);
    os << "\n";
  }
  summary["sketch_residual"] = stats_json(res);
  if (diag) summary["kappa"] = stats_json(kap);
  return os.str();
}

Matrix pod_from_grid(const BenchmarkProblem& prob, Index r, unsigned workers) {
  const std::size_t N = prob.grid.size();
  const std::size_t count = std::min<std::size_t>(N, std::max<Index>(30, r));
  Matrix S(prob.op->dim(), static_cast<Index>(count));
  parallel_for(count, workers, [&](std::size_t k) {
    const std::size_t g = count == 1 ? 0 : k * (N - 1) / (count - 1);
    S.col(static_cast<Index>(k)) = factorize(prob.op->eval(prob.grid[g])).apply(prob.rhs->eval(prob.grid[g]));
  });
  return pod_basis(S, prob.RX, r);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c) {
  RunResult res;
  fs::create_directories(c.output_dir);
  Out out{fs::path(c.output_dir), &res};
  json summary = {{"command", c.command}, {"seed", c.seed}};

  if (c.command == "sketch-bounds") {
    const std::string table = sketch_bounds_table(c.bounds);
    res.stdout_text = table;
    std::ostringstream csv;
    csv << "# schema: paraprec-sketch-bounds/1\n";
    csv << "dist,n,m,ratio,delta,K,K_real,C,eps\n";
    for (double n : c.bounds.n)
      for (int m : c.bounds.m) {
        const SketchBound sb = min_sketch_columns(c.bounds.kind, n, m, c.bounds.ratio, c.bounds.delta, c.bounds.form);
        csv << to_string(c.bounds.kind) << ',' << num(n) << ',' << m << ',' << num(c.bounds.ratio) << ','
            << num(c.bounds.delta) << ',' << sb.K << ',' << num(sb.K_real) << ',' << num(sb.C) << ',' << num(sb.eps)
            << "\n";
      }
    out.text("bounds.csv", csv.str());
    return res;
  }

  const BenchmarkProblem prob = build_problem(c.problem, c.seed);
  summary["problem"] = problem_json(prob);
  const Index n = prob.op->dim();

  if (c.command == "eim-inspect") {
    const EimPair e = eim_for_operator(*prob.op, prob.grid);
    out.text("eim_M.json", eim_to_json(e.M) + "\n");
    out.text("eim_S.json", eim_to_json(e.S) + "\n");
    std::ostringstream csv, txt;
    csv << "# schema: paraprec-eim/1\n";
    csv << "family,k,grid_index,xi,function,residual\n";
    for (const auto* m : {&e.M, &e.S}) {
      const char* name = m == &e.M ? "M" : "S";
      txt << name << ": rank " << m->rank() << ", points";
      for (Index k = 0; k < m->rank(); ++k) {
        csv << name << ',' << k + 1 << ',' << m->magic_grid[k] << ',' << point_str(m->magic_points[k]) << ','
            << m->magic_functions[k] << ',' << num(m->selected_residuals[k]) << "\n";
        txt << ' ' << point_str(m->magic_points[k]);
      }
      txt << "\n";
    }
    out.text("eim.csv", csv.str());
    summary["m_M"] = e.M.rank();
    summary["m_S"] = e.S.rank();
    res.stdout_text = txt.str();
    out.text("summary.json", summary.dump(2) + "\n");
    return res;
  }

  const SketchMatrix V = build_sketch(c.sketch, n, c.seed);
  summary["sketch"] = sketch_desc(V);
  summary["constraint"] = to_string(c.constraint);

  auto make_greedy = [&]() {
    GreedyOptions go;
    go.M_max = c.M_max;
    go.constraint = c.constraint;
    go.seed_point = c.seed_point;
    go.workers = c.workers;
    go.diagnostics = c.diagnostics;
    go.kappa_at = c.kappa_at;
    Preconditioner P;
    if (c.strategy == "delta") {
      if (c.reduced_dim < 1) throw ConfigError("reduced_dim", "delta strategy needs reduced_dim >= 1");
      ReducedModel model(prob.op, prob.rhs, prob.RX);
      model.set_basis(pod_from_grid(prob, c.reduced_dim, c.workers));
      P = greedy_delta(prob.op, prob.grid, model, V.dense(), go);
    } else if (!c.resume_dir.empty()) {
      const Preconditioner prev = load_preconditioner(c.resume_dir, prob.op, c.workers);
      P = greedy_frob(prob.op, prob.grid, V.dense(), go, &prev);
    } else {
      P = greedy_frob(prob.op, prob.grid, V.dense(), go);
    }
    P.sketch_description = sketch_desc(V);
    return P;
  };

  if (c.command == "build-precond" || c.command == "greedy-precond" || c.command == "sweep") {
    Preconditioner P;
    if (c.command == "greedy-precond" || (c.command == "sweep" && c.points.empty())) {
      P = make_greedy();
      out.text("history.csv", history_csv(P));
    } else {
      if (c.points.empty()) throw ConfigError("points", "build-precond needs interpolation points");
      P = make_preconditioner(prob.op, prob.grid, c.points, V.dense(), c.constraint, c.workers);
      P.sketch_description = sketch_desc(V);
    }
    out.text("precond_sweep.csv", precond_sweep(P, prob.grid, c.diagnostics, c.workers, summary));
    if (c.command == "sweep" && c.reduced_dim > 0) {
      ReducedModel model(prob.op, prob.rhs, prob.RX);
      model.set_basis(pod_from_grid(prob, c.reduced_dim, c.workers));
      const Matrix RU = prob.RX.apply(model.U());
      std::vector<double> delta(prob.grid.size()), qopt(prob.grid.size());
      parallel_for(prob.grid.size(), c.workers, [&](std::size_t g) {
        try {
          delta[g] = delta_rm_from(prob.grid[g], model, P.at(prob.grid[g]).apply_transpose(RU));
        } catch (const DegenerateTestSpace&) {
          delta[g] = 1.0;
        }
        qopt[g] = quasi_opt_constant(delta[g]);
      });
      std::ostringstream csv;
      csv << "# schema: paraprec-delta-sweep/1\n";
      csv << "xi,delta,quasi_opt\n";
      for (std::size_t g = 0; g < prob.grid.size(); ++g)
        csv << point_str(prob.grid[g]) << ',' << num(delta[g]) << ',' << num(qopt[g]) << "\n";
      out.text("delta_sweep.csv", csv.str());
      summary["delta"] = stats_json(delta);
      summary["quasi_opt"] = stats_json(qopt);
    }
    summary["m"] = P.size();
    summary["warnings"] = P.warnings;
    save_preconditioner((out.dir / "preconditioner").string(), P);
    res.files.push_back((out.dir / "preconditioner").string());
    std::ostringstream txt;
    txt << "m = " << P.size() << ", sup sketched residual = " << num(summary["sketch_residual"]["sup"].get<double>())
        << "\n";
    res.stdout_text = txt.str();
    out.text("summary.json", summary.dump(2) + "\n");
    return res;
  }

  if (c.command == "rb-greedy") {
    RbOptions ro;
    ro.mode = c.rb_mode;
    ro.R = c.R;
    ro.validation_stride = c.validation_stride;
    ro.constraint = c.constraint;
    ro.workers = c.workers;
    ro.V = V.dense();
    std::optional<Preconditioner> fixed;
    if (c.rb_mode == RbMode::precond_fixed) {
      fixed = make_greedy();
      ro.fixed = &*fixed;
      out.text("history.csv", history_csv(*fixed));
    }
    const RbResult rb = rb_greedy(prob.op, prob.rhs, prob.grid, prob.RX, ro);
    std::ostringstream csv;
    csv << "# schema: paraprec-rb-trace/1\n";
    csv << "r,xi_selected,sup_rel_err,q97_rel_err,eff_lo,eff_hi,sup_rel_err_all,score\n";
    for (const auto& r : rb.trace.records)
      csv << r.r << ',' << point_str(r.xi) << ',' << num(r.sup_rel_err) << ',' << num(r.q97_rel_err) << ','
          << num(r.eff_lo) << ',' << num(r.eff_hi) << ',' << num(r.sup_rel_err_all) << ',' << num(r.score) << "\n";
    out.text("rb_trace.csv", csv.str());
    save_reduced_model((out.dir / "model").string(), rb.model);
    res.files.push_back((out.dir / "model").string());
    summary["mode"] = to_string(c.rb_mode);
    summary["status"] = rb.trace.status;
    summary["r"] = rb.model.dim();
    if (!rb.trace.records.empty()) {
      const auto& last = rb.trace.records.back();
      summary["final"] = {{"sup_rel_err", last.sup_rel_err},
                          {"q97_rel_err", last.q97_rel_err},
                          {"eff_lo", std::isfinite(last.eff_lo) ? json(last.eff_lo) : json(nullptr)},
                          {"eff_hi", std::isfinite(last.eff_hi) ? json(last.eff_hi) : json(nullptr)}};
    }
    std::ostringstream txt;
    txt << to_string(c.rb_mode) << ": r = " << rb.model.dim() << ", status " << rb.trace.status << "\n";
    res.stdout_text = txt.str();
    out.text("summary.json", summary.dump(2) + "\n");
    return res;
  }
  throw ConfigError("command", "unknown command '" + c.command + "'");
}

}  // namespace paraprec
