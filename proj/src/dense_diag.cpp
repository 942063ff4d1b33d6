#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "paraprec/diagnostics.hpp"
#include "paraprec/error.hpp"
#include "paraprec/parallel.hpp"
#include "paraprec/rng.hpp"

namespace paraprec {

KappaEvaluator::KappaEvaluator(std::shared_ptr<const AffineOperator> op, double tol) : op_(std::move(op)), tol_(tol) {
  if (!op_) throw InvalidArgument("kappa evaluator needs an operator");
  if (op_->dim() > 2000) throw InvalidSize("dense condition numbers are limited to n <= 2000");
}

const Matrix& KappaEvaluator::dense_inverse(const InverseBasis& basis, std::size_t i) {
  std::lock_guard<std::mutex> lock(mutex_);
  const Point& xi = basis.points()[i];
  for (const auto& entry : cache_)
    if (entry.first.size() == xi.size() && (entry.first - xi).cwiseAbs().maxCoeff() == 0.0) return entry.second;
  const Index n = op_->dim();
  cache_.emplace_back(xi, basis[i].apply(Matrix(Matrix::Identity(n, n))));
  return cache_.back().second;
}

namespace {

// sigma_max from the top of B^T B, sigma_min from the top of (B^T B)^{-1}.
DenseSingular extreme_singular(const std::function<Vector(const Vector&)>& gram,
                               const std::function<Vector(const Vector&)>& inv_gram, Index n, double tol,
                               int max_iter) {
  const std::uint64_t seed = derive_seed(0x5eedULL, "kappa");
  const LanczosResult top = lanczos_extremes(gram, n, tol, max_iter, seed, LanczosTarget::largest);
  DenseSingular out;
  out.smax = std::sqrt(std::max(0.0, top.max));
  if (!inv_gram) return out;
  const LanczosResult inv = lanczos_extremes(inv_gram, n, tol, max_iter, splitmix_mix(seed), LanczosTarget::largest);
  out.smin = inv.max > 0.0 ? 1.0 / std::sqrt(inv.max) : 0.0;
  if (!top.converged || !inv.converged)
    throw ConvergenceFailure("singular value estimates did not converge", {out.smin, out.smax});
  return out;
}

}  // namespace

DenseSingular dense_extreme_singular(const Matrix& B, double tol, int max_iter) {
  const Index n = B.rows();
  if (B.cols() != n) throw DimensionError("dense_extreme_singular expects a square matrix");
  Eigen::PartialPivLU<Matrix> lu(B);
  const double rc = lu.rcond();
  std::function<Vector(const Vector&)> inv;
  if (rc > 0.0 && std::isfinite(rc)) inv = [&lu](const Vector& x) { return Vector(lu.solve(lu.transpose().solve(x))); };
  return extreme_singular([&B](const Vector& x) { return Vector(B.transpose() * (B * x)); }, inv, n, tol, max_iter);
}

double KappaEvaluator::kappa(const Point& xi, const InverseBasis& basis, const Vector& lambda) {
  const SparseMatrix A = op_->eval(xi);
  DenseSingular s;
  if (basis.empty()) {
    const FactorizedInverse F = factorize(A);
    s = extreme_singular([&A](const Vector& x) { return Vector(A.transpose() * (A * x)); },
                         [&F](const Vector& x) { return F.apply(F.apply(x, true)); }, A.rows(), tol_, 500);
  } else {
    const Index n = op_->dim();
    Matrix P = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double l = lambda[static_cast<Index>(i)];
      if (l != 0.0) P += l * dense_inverse(basis, i);
    }
    s = dense_extreme_singular(P * A, tol_);
  }
  return s.smin > 0.0 ? s.smax / s.smin : std::numeric_limits<double>::infinity();
}

void KappaEvaluator::warm(const InverseBasis& basis) {
  for (std::size_t i = 0; i < basis.size(); ++i) dense_inverse(basis, i);
}

double KappaEvaluator::kappa(const Point& xi, const Preconditioner& P) {
  if (P.size() == 0) return kappa(xi, P.basis(), Vector());
  return kappa(xi, P.basis(), P.coefficients(xi).lambda);
}

double sup_kappa(const Preconditioner& P, const PointSet& grid, KappaEvaluator& eval, unsigned workers,
                 std::vector<double>* values) {
  // Warm the cache serially so workers only read it.
  eval.warm(P.basis());
  std::vector<double> k(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t g) { k[g] = eval.kappa(grid[g], P); });
  if (values) *values = k;
  double sup = 0.0;
  for (double v : k) sup = std::max(sup, v);
  return sup;
}

}  // namespace paraprec
