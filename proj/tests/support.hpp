#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <memory>

#include "paraprec/bench.hpp"
#include "paraprec/operators.hpp"
#include "paraprec/rng.hpp"

namespace testsupport {

using namespace paraprec;

inline Matrix random_matrix(Index rows, Index cols, SplitMix64& rng) {
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = 2.0 * rng.uniform() - 1.0;
  return M;
}

inline SparseMatrix to_sparse(const Matrix& M) { return M.sparseView(0.0, 0.0); }

// Small nonsymmetric affine problem with a positive definite symmetric part
// for every xi in [0, 1]:
// A(xi) = A0 + cos(2 pi xi) A1 + xi^2 A2, A0 = c I + E.
struct SmallProblem {
  std::shared_ptr<AffineOperator> op;
  std::shared_ptr<AffineVector> rhs;
  NormMatrix RX;
};

inline SmallProblem small_problem(Index n, std::uint64_t seed, double spread = 1.0) {
  SplitMix64 rng(seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix A0 = 3.0 * Matrix::Identity(n, n) + 0.5 * s * random_matrix(n, n, rng);
  Matrix A1 = spread * s * random_matrix(n, n, rng);
  Matrix A2 = spread * s * random_matrix(n, n, rng);
  auto op = std::make_shared<AffineOperator>(
      std::vector<SparseMatrix>{to_sparse(A0), to_sparse(A1), to_sparse(A2)},
      std::vector<CoefficientFunction>{CoefficientFunction::constant(1.0),
                                       CoefficientFunction::cosine(1.0, 2.0 * M_PI),
                                       CoefficientFunction::monomial(1.0, 2.0)},
      1);
  Vector b0 = random_matrix(n, 1, rng), b1 = random_matrix(n, 1, rng);
  auto rhs = std::make_shared<AffineVector>(std::vector<Vector>{b0, b1},
                                            std::vector<CoefficientFunction>{CoefficientFunction::constant(1.0),
                                                                             CoefficientFunction::sine(1.0, 2.0 * M_PI)},
                                            1);
  const Matrix G = random_matrix(n, n, rng);
  const Matrix R = G * G.transpose() / static_cast<double>(n) + Matrix::Identity(n, n);
  return {op, rhs, NormMatrix(to_sparse(R))};
}

inline PointSet random_points(Index m, SplitMix64& rng) {
  PointSet p;
  for (Index i = 0; i < m; ++i) p.push_back(make_point(rng.uniform()));
  return p;
}

inline Matrix dense_inverse(const SparseMatrix& A) { return Matrix(A).fullPivLu().inverse(); }

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

}  // namespace testsupport
