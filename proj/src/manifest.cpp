#include "paraprec/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "paraprec/error.hpp"
#include "paraprec/mmio.hpp"

namespace paraprec {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kind_name(CoefficientFunction::Kind k) {
  switch (k) {
    case CoefficientFunction::Kind::constant: return "constant";
    case CoefficientFunction::Kind::cosine: return "cosine";
    case CoefficientFunction::Kind::sine: return "sine";
    case CoefficientFunction::Kind::monomial: return "monomial";
    case CoefficientFunction::Kind::log_uniform: return "log_uniform";
    case CoefficientFunction::Kind::tabulated: return "tabulated";
  }
  return "?";
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json mat_json(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) rows.push_back(vec_json(M.row(i).transpose()));
  return rows;
}

Matrix json_mat(const json& j) {
  Matrix M(static_cast<Index>(j.size()), j.empty() ? 0 : static_cast<Index>(j[0].size()));
  for (Index i = 0; i < M.rows(); ++i) M.row(i) = json_vec(j[static_cast<std::size_t>(i)]).transpose();
  return M;
}

json points_json(const PointSet& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(vec_json(p));
  return a;
}

PointSet json_points(const json& j) {
  PointSet pts;
  for (const auto& p : j) pts.push_back(json_vec(p));
  return pts;
}

json coef_json(const CoefficientFunction& f) {
  json j = {{"kind", kind_name(f.kind)}, {"scale", f.scale}};
  using K = CoefficientFunction::Kind;
  switch (f.kind) {
    case K::constant: break;
    case K::cosine:
    case K::sine:
      j["coord"] = f.coord;
      j["frequency"] = f.frequency;
      j["phase"] = f.phase;
      break;
    case K::monomial:
      j["coord"] = f.coord;
      j["power"] = f.power;
      break;
    case K::log_uniform:
      j["coord"] = f.coord;
      j["lo"] = f.lo;
      j["hi"] = f.hi;
      break;
    case K::tabulated:
      j["points"] = points_json(f.table_points);
      j["values"] = f.table_values;
      break;
  }
  return j;
}

CoefficientFunction json_coef(const json& j, const std::string& where) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    CoefficientFunction f;
    using K = CoefficientFunction::Kind;
    if (kind == "constant") f.kind = K::constant;
    else if (kind == "cosine") f.kind = K::cosine;
    else if (kind == "sine") f.kind = K::sine;
    else if (kind == "monomial") f.kind = K::monomial;
    else if (kind == "log_uniform") f.kind = K::log_uniform;
    else if (kind == "tabulated") f.kind = K::tabulated;
    else throw ConfigError(where + ".kind", "unknown coefficient kind '" + kind + "'");
    f.scale = j.value("scale", 1.0);
    f.coord = j.value("coord", 0);
    f.frequency = j.value("frequency", 0.0);
    f.phase = j.value("phase", 0.0);
    f.power = j.value("power", 0.0);
    f.lo = j.value("lo", 1.0);
    f.hi = j.value("hi", 1.0);
    if (f.kind == K::tabulated) {
      f.table_points = json_points(j.at("points"));
      f.table_values = j.at("values").get<std::vector<double>>();
      if (f.table_points.size() != f.table_values.size())
        throw ConfigError(where, "tabulated coefficient needs one value per point");
    }
    return f;
  } catch (const json::exception& e) {
    throw ConfigError(where, e.what());
  }
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line number
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + static_cast<long>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ParseError(source, line, e.what());
  }
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path, "cannot write file");
  out << text;
}

std::string coefficient_to_json(const CoefficientFunction& f) { return coef_json(f).dump(); }
CoefficientFunction coefficient_from_json(const std::string& text) {
  return json_coef(parse_json(text, "<coefficient>"), "coefficient");
}

void write_problem(const std::string& dir, const BenchmarkProblem& p) {
  fs::create_directories(dir);
  json m;
  m["schema"] = "paraprec-affine/1";
  m["name"] = p.name;
  m["description"] = p.description;
  m["n"] = p.op->dim();
  m["param_dim"] = p.op->param_dim();
  m["params"] = p.params;
  json ops = json::array();
  for (std::size_t k = 0; k < p.op->num_terms(); ++k) {
    const std::string file = "A" + std::to_string(k) + ".mtx";
    write_matrix_market((fs::path(dir) / file).string(), p.op->terms()[k]);
    ops.push_back({{"file", file}, {"coefficient", coef_json(p.op->coeffs()[k])}});
  }
  m["operator"] = ops;
  json rhs = json::array();
  for (std::size_t k = 0; k < p.rhs->terms().size(); ++k) {
    const std::string file = "b" + std::to_string(k) + ".mtx";
    write_matrix_market((fs::path(dir) / file).string(), p.rhs->terms()[k]);
    rhs.push_back({{"file", file}, {"coefficient", coef_json(p.rhs->coeffs()[k])}});
  }
  m["rhs"] = rhs;
  Matrix grid(static_cast<Index>(p.grid.size()), p.op->param_dim());
  for (std::size_t g = 0; g < p.grid.size(); ++g) grid.row(static_cast<Index>(g)) = p.grid[g].transpose();
  write_matrix_market((fs::path(dir) / "grid.mtx").string(), grid);
  m["grid"] = "grid.mtx";
  if (!p.RX.is_identity()) {
    write_matrix_market((fs::path(dir) / "RX.mtx").string(), p.RX.matrix());
    m["norm"] = "RX.mtx";
  }
  write_text((fs::path(dir) / "manifest.json").string(), m.dump(2) + "\n");
}

BenchmarkProblem read_problem(const std::string& dir) {
  const std::string mpath = (fs::path(dir) / "manifest.json").string();
  const json m = parse_json(read_text(mpath), mpath);
  static const std::set<std::string> known = {"schema", "name",  "description", "n",    "param_dim",
                                              "params", "operator", "rhs",     "grid", "norm"};
  for (auto it = m.begin(); it != m.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(it.key(), "unknown manifest key");
  if (m.value("schema", "") != "paraprec-affine/1") throw ConfigError("schema", "expected paraprec-affine/1");
  try {
    const int d = m.at("param_dim").get<int>();
    auto path = [&](const json& j) { return (fs::path(dir) / j.get<std::string>()).string(); };
    std::vector<SparseMatrix> terms;
    std::vector<CoefficientFunction> coeffs;
    for (std::size_t k = 0; k < m.at("operator").size(); ++k) {
      const json& t = m["operator"][k];
      terms.push_back(read_sparse_matrix_market(path(t.at("file"))));
      coeffs.push_back(json_coef(t.at("coefficient"), "operator[" + std::to_string(k) + "].coefficient"));
    }
    std::vector<Vector> bterms;
    std::vector<CoefficientFunction> bcoeffs;
    for (std::size_t k = 0; k < m.at("rhs").size(); ++k) {
      const json& t = m["rhs"][k];
      bterms.push_back(read_vector_matrix_market(path(t.at("file"))));
      bcoeffs.push_back(json_coef(t.at("coefficient"), "rhs[" + std::to_string(k) + "].coefficient"));
    }
    BenchmarkProblem p;
    p.op = std::make_shared<AffineOperator>(terms, coeffs, d);
    p.rhs = std::make_shared<AffineVector>(bterms, bcoeffs, d);
    const Matrix grid = read_dense_matrix_market(path(m.at("grid")));
    if (grid.cols() != d) throw ConfigError("grid", "grid columns must equal param_dim");
    for (Index g = 0; g < grid.rows(); ++g) p.grid.push_back(grid.row(g).transpose());
    p.RX = m.contains("norm") ? NormMatrix(read_sparse_matrix_market(path(m["norm"])))
                              : NormMatrix::identity(p.op->dim());
    p.name = m.value("name", "imported");
    p.description = m.value("description", "");
    if (m.contains("params")) p.params = m["params"].get<std::map<std::string, double>>();
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(mpath, e.what());
  }
}

std::string eim_to_json(const EimModel& e) {
  json j;
  j["magic_grid"] = e.magic_grid;
  j["magic_points"] = points_json(e.magic_points);
  j["magic_functions"] = e.magic_functions;
  j["Q"] = mat_json(e.Q);
  j["Qinv"] = mat_json(e.Qinv);
  j["selected_residuals"] = e.selected_residuals;
  j["final_residual"] = e.final_residual;
  j["family_size"] = e.family_size;
  return j.dump(2);
}

EimModel eim_from_json(const std::string& text) {
  const json j = parse_json(text, "<eim>");
  try {
    EimModel e;
    e.magic_grid = j.at("magic_grid").get<std::vector<Index>>();
    e.magic_points = json_points(j.at("magic_points"));
    e.magic_functions = j.at("magic_functions").get<std::vector<Index>>();
    e.Q = json_mat(j.at("Q"));
    e.Qinv = json_mat(j.at("Qinv"));
    e.selected_residuals = j.at("selected_residuals").get<std::vector<double>>();
    e.final_residual = j.at("final_residual").get<double>();
    e.family_size = j.at("family_size").get<Index>();
    return e;
  } catch (const json::exception& ex) {
    throw ConfigError("eim", ex.what());
  }
}

std::string normal_eq_to_json(const NormalEq& ne) {
  json j = {{"M", mat_json(ne.M)}, {"S", vec_json(ne.S)}, {"vnorm2", ne.vnorm2}};
  return j.dump(2);
}

void save_preconditioner(const std::string& dir, const Preconditioner& P) {
  fs::create_directories(dir);
  json j;
  j["schema"] = "paraprec-preconditioner/1";
  j["points"] = points_json(P.basis().points());
  j["constraint"] = to_string(P.constraint());
  j["sketch"] = P.sketch_description;
  j["warnings"] = P.warnings;
  json h = json::array();
  for (const auto& r : P.history) {
    json e = {{"m", r.m}, {"xi", vec_json(r.xi)}, {"grid_index", r.grid_index}, {"sup_residual", r.sup_residual}};
    if (r.sup_kappa) e["sup_kappa"] = *r.sup_kappa;
    if (r.score) e["score"] = *r.score;
    h.push_back(e);
  }
  j["history"] = h;
  j["eim_M"] = json::parse(eim_to_json(P.eim_models().M));
  j["eim_S"] = json::parse(eim_to_json(P.eim_models().S));
  write_matrix_market((fs::path(dir) / "V.mtx").string(), P.sketch());
  write_text((fs::path(dir) / "preconditioner.json").string(), j.dump(2) + "\n");
}

Preconditioner load_preconditioner(const std::string& dir, std::shared_ptr<const AffineOperator> op,
                                   unsigned workers) {
  const std::string jpath = (fs::path(dir) / "preconditioner.json").string();
  const json j = parse_json(read_text(jpath), jpath);
  try {
    if (j.value("schema", "") != "paraprec-preconditioner/1") throw ConfigError("schema", "not a preconditioner file");
    const Matrix V = read_dense_matrix_market((fs::path(dir) / "V.mtx").string());
    EimPair models{eim_from_json(j.at("eim_M").dump()), eim_from_json(j.at("eim_S").dump())};
    Preconditioner P(op, V, parse_constraint(j.at("constraint").get<std::string>()), std::move(models), workers);
    for (const auto& xi : json_points(j.at("points"))) P.add_point(xi);
    P.sketch_description = j.value("sketch", "");
    P.warnings = j.value("warnings", std::vector<std::string>{});
    for (const auto& e : j.at("history")) {
      GreedyRecord r;
      r.m = e.at("m").get<Index>();
      r.xi = json_vec(e.at("xi"));
      r.grid_index = e.at("grid_index").get<Index>();
      r.sup_residual = e.at("sup_residual").get<double>();
      if (e.contains("sup_kappa")) r.sup_kappa = e["sup_kappa"].get<double>();
      if (e.contains("score")) r.score = e["score"].get<double>();
      P.history.push_back(r);
    }
    return P;
  } catch (const json::exception& ex) {
    throw ConfigError(jpath, ex.what());
  }
}

void save_reduced_model(const std::string& dir, const ReducedModel& model) {
  fs::create_directories(dir);
  write_matrix_market((fs::path(dir) / "U.mtx").string(), model.U());
  json j = {{"schema", "paraprec-reduced-model/1"},
            {"mode", model.mode_tag},
            {"r", model.dim()},
            {"n", model.n()},
            {"snapshot_points", points_json(model.snapshot_points())}};
  write_text((fs::path(dir) / "model.json").string(), j.dump(2) + "\n");
}

}  // namespace paraprec
