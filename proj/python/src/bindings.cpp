#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "paraprec/bench.hpp"
#include "paraprec/eim.hpp"
#include "paraprec/error.hpp"
#include "paraprec/experiment.hpp"
#include "paraprec/greedy.hpp"
#include "paraprec/preconditioner.hpp"
#include "paraprec/sketch.hpp"

namespace py = pybind11;
using namespace paraprec;

namespace {

Point to_point(const std::vector<double>& x) { return Eigen::Map<const Vector>(x.data(), static_cast<Index>(x.size())); }

std::vector<double> from_point(const Point& p) { return {p.data(), p.data() + p.size()}; }

PointSet to_points(const std::vector<std::vector<double>>& xs) {
  PointSet out;
  for (const auto& x : xs) out.push_back(to_point(x));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "paraprec core bindings";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<SketchMatrix>(m, "Sketch")
      .def_property_readonly("kind", [](const SketchMatrix& s) { return to_string(s.kind()); })
      .def_property_readonly("seed", &SketchMatrix::seed)
      .def_property_readonly("matrix", &SketchMatrix::dense)
      .def("coherence", [](const SketchMatrix& s) { return coherence_err(s); });

  m.def(
      "make_sketch",
      [](const std::string& kind, Index n, Index K, std::uint64_t seed) {
        return make_sketch(parse_sketch_kind(kind), n, K, seed);
      },
      py::arg("kind"), py::arg("n"), py::arg("K"), py::arg("seed") = 0);

  m.def(
      "min_sketch_columns",
      [](const std::string& kind, double n, int m_, double ratio, double delta) {
        return min_sketch_columns(parse_sketch_kind(kind), n, m_, ratio, delta).K;
      },
      py::arg("kind"), py::arg("n"), py::arg("m"), py::arg("ratio") = 10.0, py::arg("delta") = 1e-3);

  m.def(
      "concentration_columns",
      [](const std::string& kind, double n, double eps, double delta) {
        return concentration_columns(parse_sketch_kind(kind), n, eps, delta);
      },
      py::arg("kind"), py::arg("n"), py::arg("eps"), py::arg("delta"));

  py::class_<BenchmarkProblem>(m, "Benchmark")
      .def_readonly("name", &BenchmarkProblem::name)
      .def_property_readonly("n", [](const BenchmarkProblem& p) { return p.op->dim(); })
      .def_property_readonly("grid", [](const BenchmarkProblem& p) {
        std::vector<std::vector<double>> g;
        for (const auto& x : p.grid) g.push_back(from_point(x));
        return g;
      })
      .def("operator", [](const BenchmarkProblem& p, const std::vector<double>& xi) { return p.op->eval(to_point(xi)); })
      .def("rhs", [](const BenchmarkProblem& p, const std::vector<double>& xi) { return p.rhs->eval(to_point(xi)); });

  m.def("assemble_adr", &assemble_adr, py::arg("mesh_side") = 40, py::arg("D") = 50.0, py::arg("grid_size") = 250);
  m.def("synthetic_multiparam", &synthetic_multiparam, py::arg("d"), py::arg("n"), py::arg("m_A"), py::arg("seed"),
        py::arg("grid_size") = 200, py::arg("lo") = 0.1, py::arg("hi") = 10.0);

  py::class_<Preconditioner>(m, "Preconditioner")
      .def_property_readonly("size", &Preconditioner::size)
      .def_property_readonly("points", [](const Preconditioner& P) {
        std::vector<std::vector<double>> out;
        for (const auto& x : P.basis().points()) out.push_back(from_point(x));
        return out;
      })
      .def_property_readonly("history", [](const Preconditioner& P) {
        std::vector<double> out;
        for (const auto& r : P.history) out.push_back(r.sup_residual);
        return out;
      })
      .def("coefficients",
           [](const Preconditioner& P, const std::vector<double>& xi) { return P.coefficients(to_point(xi)).lambda; })
      .def("residual",
           [](const Preconditioner& P, const std::vector<double>& xi) { return P.sketched_residual(to_point(xi)); })
      .def("apply", [](const Preconditioner& P, const std::vector<double>& xi, const Vector& x) {
        return P.at(to_point(xi)).apply(x);
      });

  m.def(
      "make_preconditioner",
      [](const BenchmarkProblem& p, const std::vector<std::vector<double>>& points, const Matrix& V,
         const std::string& constraint) {
        return make_preconditioner(p.op, p.grid, to_points(points), V, parse_constraint(constraint));
      },
      py::arg("problem"), py::arg("points"), py::arg("V"), py::arg("constraint") = "none");

  m.def(
      "greedy_frob",
      [](const BenchmarkProblem& p, const Matrix& V, Index M_max, const std::string& constraint, unsigned workers) {
        GreedyOptions opt;
        opt.M_max = M_max;
        opt.constraint = parse_constraint(constraint);
        opt.workers = workers;
        py::gil_scoped_release release;
        return greedy_frob(p.op, p.grid, V, opt);
      },
      py::arg("problem"), py::arg("V"), py::arg("M_max") = 10, py::arg("constraint") = "none", py::arg("workers") = 1);

  m.def(
      "eim",
      [](const Matrix& table, const std::vector<std::vector<double>>& grid, double rel_tol) {
        const EimModel e = eim(table, to_points(grid), rel_tol);
        std::vector<std::vector<double>> pts;
        for (const auto& x : e.magic_points) pts.push_back(from_point(x));
        return py::make_tuple(e.magic_grid, pts, e.Q);
      },
      py::arg("table"), py::arg("grid"), py::arg("rel_tol") = 1e-14);

  m.def(
      "run_config",
      [](const std::string& json_text) {
        const ExperimentConfig c = parse_config(json_text);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        return py::make_tuple(r.stdout_text, r.files);
      },
      py::arg("json_text"));
}
