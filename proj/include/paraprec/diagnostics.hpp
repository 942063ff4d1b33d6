#pragma once

#include <deque>
#include <mutex>
#include <vector>

#include "paraprec/preconditioner.hpp"

namespace paraprec {

// Spectral condition number of P(xi) A(xi) with P = sum_i lambda_i A(xi_i)^{-1},
// computed densely (n <= 2000). Dense inverses of the basis are cached by
// interpolation point.
class KappaEvaluator {
 public:
  explicit KappaEvaluator(std::shared_ptr<const AffineOperator> op, double tol = 1e-6);

  double kappa(const Point& xi, const InverseBasis& basis, const Vector& lambda);
  double kappa(const Point& xi, const Preconditioner& P);
  // Forms every dense inverse up front so concurrent calls only read the cache.
  void warm(const InverseBasis& basis);

 private:
  const Matrix& dense_inverse(const InverseBasis& basis, std::size_t i);

  std::shared_ptr<const AffineOperator> op_;
  double tol_;
  std::mutex mutex_;
  std::deque<std::pair<Point, Matrix>> cache_;
};

// Extreme singular values of a dense square matrix by Lanczos on B^T B and on
// (B^T B)^{-1} through a dense LU.
struct DenseSingular {
  double smin = 0.0, smax = 0.0;
};
DenseSingular dense_extreme_singular(const Matrix& B, double tol = 1e-6, int max_iter = 500);

// sup over the grid of kappa(P_m A); one value per grid point is returned in
// `values` when non-null.
double sup_kappa(const Preconditioner& P, const PointSet& grid, KappaEvaluator& eval, unsigned workers = 1,
                 std::vector<double>* values = nullptr);

}  // namespace paraprec
