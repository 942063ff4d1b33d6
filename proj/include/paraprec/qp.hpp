#pragma once

#include "paraprec/operators.hpp"

namespace paraprec {

struct NnlsResult {
  Vector x;
  int iterations = 0;
};

// Lawson-Hanson active set for min 1/2 x^T M x - S^T x subject to x >= 0,
// working directly on the Gram matrix M (PSD) and S = "A^T b".
NnlsResult nnls_gram(const Matrix& M, const Vector& S, const Vector* warm_start = nullptr);

struct QpResult {
  Vector x;
  Vector multipliers;  // for the general rows G x >= h
  int iterations = 0;
};

// Primal active-set method for the convex problem
//   min 1/2 x^T H x - c^T x   s.t.  x >= 0,  G x >= h,
// with H symmetric PSD (possibly singular) and c in range(H). x0 must be
// feasible. Equality-constrained subproblems are solved in the null space of
// the working set with a minimum-norm least-squares step.
QpResult convex_qp(const Matrix& H, const Vector& c, const Matrix& G, const Vector& h, const Vector& x0);

}  // namespace paraprec
