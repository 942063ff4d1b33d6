#include "paraprec/preconditioner.hpp"

#include <cmath>

#include "paraprec/error.hpp"

namespace paraprec {

LocalPreconditioner LocalPreconditioner::identity(Index n) {
  LocalPreconditioner p;
  p.kind_ = Kind::identity;
  p.n_ = n;
  return p;
}

LocalPreconditioner LocalPreconditioner::norm_inverse(NormMatrix RX) {
  LocalPreconditioner p;
  p.kind_ = Kind::norm_inverse;
  p.n_ = RX.dim();
  p.RX_ = std::move(RX);
  return p;
}

LocalPreconditioner LocalPreconditioner::interpolated(InverseBasis basis, Vector lambda) {
  if (lambda.size() != static_cast<Index>(basis.size())) throw DimensionError("lambda length must match the basis");
  if (basis.empty()) throw InvalidArgument("interpolated preconditioner needs a non-empty basis");
  LocalPreconditioner p;
  p.kind_ = Kind::interpolated;
  p.n_ = basis.dim();
  p.basis_ = std::move(basis);
  p.lambda_ = std::move(lambda);
  return p;
}

LocalPreconditioner LocalPreconditioner::exact(FactorizedInverse F) {
  LocalPreconditioner p;
  p.kind_ = Kind::exact;
  p.n_ = F.dim();
  p.F_ = std::move(F);
  return p;
}

Vector LocalPreconditioner::apply(const Vector& x) const {
  if (x.size() != n_) throw DimensionError("preconditioner: vector length mismatch");
  switch (kind_) {
    case Kind::identity:
      return x;
    case Kind::norm_inverse:
      return RX_.solve(x);
    case Kind::interpolated:
      return precond_apply(lambda_, basis_, x);
    case Kind::exact:
      return F_.apply(x);
  }
  return x;
}

Vector LocalPreconditioner::apply_transpose(const Vector& x) const {
  if (x.size() != n_) throw DimensionError("preconditioner: vector length mismatch");
  switch (kind_) {
    case Kind::identity:
      return x;
    case Kind::norm_inverse:
      return RX_.solve(x);
    case Kind::interpolated:
      return precond_apply_transpose(lambda_, basis_, x);
    case Kind::exact:
      return F_.apply(x, true);
  }
  return x;
}

Matrix LocalPreconditioner::apply(const Matrix& X) const {
  if (X.rows() != n_) throw DimensionError("preconditioner: row count mismatch");
  switch (kind_) {
    case Kind::identity:
      return X;
    case Kind::norm_inverse:
      return RX_.solve(X);
    case Kind::interpolated: {
      Matrix Y = Matrix::Zero(X.rows(), X.cols());
      for (std::size_t i = 0; i < basis_.size(); ++i)
        if (lambda_[static_cast<Index>(i)] != 0.0) Y += lambda_[static_cast<Index>(i)] * basis_[i].apply(X);
      return Y;
    }
    case Kind::exact:
      return F_.apply(X);
  }
  return X;
}

Matrix LocalPreconditioner::apply_transpose(const Matrix& X) const {
  if (X.rows() != n_) throw DimensionError("preconditioner: row count mismatch");
  switch (kind_) {
    case Kind::identity:
      return X;
    case Kind::norm_inverse:
      return RX_.solve(X);
    case Kind::interpolated: {
      Matrix Y = Matrix::Zero(X.rows(), X.cols());
      for (std::size_t i = 0; i < basis_.size(); ++i)
        if (lambda_[static_cast<Index>(i)] != 0.0) Y += lambda_[static_cast<Index>(i)] * basis_[i].apply(X, true);
      return Y;
    }
    case Kind::exact:
      return F_.apply(X, true);
  }
  return X;
}

Matrix LocalPreconditioner::dense() const { return apply(Matrix(Matrix::Identity(n_, n_))); }

Preconditioner::Preconditioner(std::shared_ptr<const AffineOperator> op, Matrix V, Constraint constraint,
                               EimPair models, unsigned workers)
    : op_(std::move(op)), V_(std::move(V)), constraint_(constraint), models_(std::move(models)), workers_(workers) {
  if (!op_) throw InvalidArgument("preconditioner needs an operator");
  if (V_.rows() != op_->dim()) throw DimensionError("sketch rows must match the operator dimension");
  refresh();
}

void Preconditioner::add_point(const Point& xi) { add_factorized(xi, factorize(op_->eval(xi), xi)); }

void Preconditioner::add_factorized(const Point& xi, FactorizedInverse F) {
  if (static_cast<Index>(basis_.size()) + 1 > V_.cols())
    throw SketchTooSmall("sketch has K = " + std::to_string(V_.cols()) + " columns; cannot hold " +
                         std::to_string(basis_.size() + 1) + " inverses");
  basis_.add(xi, std::move(F));
  refresh();
}

void Preconditioner::refresh() {
  surrogate_ = build_surrogate(*op_, basis_, V_, models_, workers_);
  if (constraint_.mode == ConstraintMode::kappa) {
    // Constants of earlier points do not change; only the new one is computed.
    SpectralConstants sc = spectral_.value_or(SpectralConstants{});
    const Index have = sc.size();
    const Index m = static_cast<Index>(basis_.size());
    if (have < m) {
      InverseBasis fresh;
      for (Index i = have; i < m; ++i) fresh.add(basis_.points()[i], basis_[i]);
      const SpectralConstants add = spectral_constants(fresh, 1e-6, 500, workers_);
      sc.gamma_minus.conservativeResize(m);
      sc.gamma_plus.conservativeResize(m);
      sc.C.conservativeResize(m);
      sc.gamma_minus.tail(m - have) = add.gamma_minus;
      sc.gamma_plus.tail(m - have) = add.gamma_plus;
      sc.C.tail(m - have) = add.C;
    }
    spectral_ = sc;
    if (m > 0 && !(constraint_.kappa_bar >= sc.kappa_threshold() * (1.0 - 1e-12)))
      throw KappaTooSmall("kappa bound " + std::to_string(constraint_.kappa_bar) + " is below max_i C_i/gamma-_i = " +
                          std::to_string(sc.kappa_threshold()));
  }
}

NormalEq Preconditioner::normal_eq(const Point& xi) const { return online_eval(surrogate_, *op_, xi); }

CoefficientSolution Preconditioner::coefficients(const Point& xi) const {
  return solve_coefficients(normal_eq(xi), constraint_, spectral_ ? &*spectral_ : nullptr);
}

double Preconditioner::sketched_residual(const Point& xi) const {
  if (basis_.empty()) {
    const SparseMatrix A = op_->eval(xi);
    return (V_ - A * V_).norm();
  }
  const NormalEq ne = normal_eq(xi);
  const Vector lambda = solve_coefficients(ne, constraint_, spectral_ ? &*spectral_ : nullptr).lambda;
  const double r = frob_residual(ne, lambda);
  // The quadratic form loses all digits once the residual is far below ||V||_F.
  if (r * r < 1e-8 * ne.vnorm2) return direct_residual(xi, lambda);
  return r;
}

double Preconditioner::direct_residual(const Point& xi, const Vector& lambda) const {
  const Matrix AV = op_->eval(xi) * V_;
  Matrix R = V_;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    const double l = lambda[static_cast<Index>(i)];
    if (l != 0.0) R -= l * basis_[i].apply(AV);
  }
  return R.norm();
}

LocalPreconditioner Preconditioner::at(const Point& xi) const {
  if (basis_.empty()) return LocalPreconditioner::identity(op_->dim());
  return LocalPreconditioner::interpolated(basis_, coefficients(xi).lambda);
}

Preconditioner make_preconditioner(std::shared_ptr<const AffineOperator> op, const PointSet& grid,
                                   const PointSet& points, const Matrix& V, Constraint constraint, unsigned workers) {
  Preconditioner P(op, V, constraint, eim_for_operator(*op, grid), workers);
  for (const auto& xi : points) P.add_point(xi);
  return P;
}

}  // namespace paraprec
