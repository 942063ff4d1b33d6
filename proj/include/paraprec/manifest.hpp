#pragma once

#include <string>

#include "paraprec/bench.hpp"
#include "paraprec/eim.hpp"
#include "paraprec/preconditioner.hpp"
#include "paraprec/reduction.hpp"

namespace paraprec {

// A problem directory holds one Matrix Market file per affine term, the
// training grid and R_X, plus manifest.json (schema "paraprec-affine/1")
// describing the coefficient functions.
void write_problem(const std::string& dir, const BenchmarkProblem& problem);
BenchmarkProblem read_problem(const std::string& dir);

std::string coefficient_to_json(const CoefficientFunction& f);
CoefficientFunction coefficient_from_json(const std::string& text);

std::string eim_to_json(const EimModel& model);
EimModel eim_from_json(const std::string& text);
std::string normal_eq_to_json(const NormalEq& ne);

// Interpolation points, constraint, history and the sketch (V.mtx). Loading
// refactorizes the operator at the stored points.
void save_preconditioner(const std::string& dir, const Preconditioner& P);
Preconditioner load_preconditioner(const std::string& dir, std::shared_ptr<const AffineOperator> op,
                                   unsigned workers = 1);

// U.mtx and model.json with the snapshot points.
void save_reduced_model(const std::string& dir, const ReducedModel& model);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace paraprec
