#include "paraprec/reduction.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "paraprec/error.hpp"
#include "paraprec/parallel.hpp"

namespace paraprec {

namespace {

std::vector<double> to_std(const Point& xi) { return std::vector<double>(xi.data(), xi.data() + xi.size()); }

Vector solve_reduced(const Matrix& Ar, const Vector& br, const Point& xi) {
  if (Ar.rows() == 0) return Vector();
  Eigen::PartialPivLU<Matrix> lu(Ar);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) throw SingularReducedSystem(to_std(xi), "reduced matrix is singular (rcond " + std::to_string(rc) + ")");
  return lu.solve(br);
}

}  // namespace

ReducedModel::ReducedModel(std::shared_ptr<const AffineOperator> op, std::shared_ptr<const AffineVector> rhs,
                           NormMatrix RX)
    : op_(std::move(op)), rhs_(std::move(rhs)), RX_(std::move(RX)) {
  if (!op_ || !rhs_) throw InvalidArgument("reduced model needs an operator and a right-hand side");
  if (rhs_->dim() != op_->dim() || RX_.dim() != op_->dim()) throw DimensionError("reduced model: dimension mismatch");
  U_.resize(op_->dim(), 0);
  RU_.resize(op_->dim(), 0);
  refresh_galerkin();
}

bool ReducedModel::add_snapshot(const Vector& u, const Point& xi, double drop_tol) {
  if (u.size() != n()) throw DimensionError("snapshot length mismatch");
  const double unorm = RX_.xnorm(u);
  if (!(unorm > 0.0)) return false;
  Vector v = u;
  for (int pass = 0; pass < 2; ++pass)
    for (Index j = 0; j < U_.cols(); ++j) v -= RU_.col(j).dot(v) * U_.col(j);
  const double vn = RX_.xnorm(v);
  if (!(vn > drop_tol * unorm) || U_.cols() >= n()) return false;
  v /= vn;
  U_.conservativeResize(Eigen::NoChange, U_.cols() + 1);
  U_.col(U_.cols() - 1) = v;
  RU_.conservativeResize(Eigen::NoChange, RU_.cols() + 1);
  RU_.col(RU_.cols() - 1) = RX_.apply(v);
  snapshot_points_.push_back(xi);
  refresh_galerkin();
  attached_ = InverseBasis();
  return true;
}

void ReducedModel::set_basis(const Matrix& U, double drop_tol) {
  if (U.rows() != n()) throw DimensionError("basis row count mismatch");
  U_.resize(n(), 0);
  RU_.resize(n(), 0);
  snapshot_points_.clear();
  for (Index j = 0; j < U.cols(); ++j)
    if (!add_snapshot(U.col(j), Point(), drop_tol)) throw InvalidArgument("basis columns are linearly dependent");
  snapshot_points_.clear();
}

void ReducedModel::refresh_galerkin() {
  const auto& terms = op_->terms();
  AkU_.resize(terms.size());
  gal_A_.resize(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    AkU_[k] = terms[k] * U_;
    gal_A_[k] = U_.transpose() * AkU_[k];
  }
  gal_b_.clear();
  for (const auto& b : rhs_->terms()) gal_b_.push_back(U_.transpose() * b);
}

Matrix ReducedModel::galerkin_matrix(const Point& xi) const {
  const Vector phi = op_->coefficients(xi);
  Matrix Ar = Matrix::Zero(dim(), dim());
  for (std::size_t k = 0; k < gal_A_.size(); ++k) Ar += phi[static_cast<Index>(k)] * gal_A_[k];
  return Ar;
}

Vector ReducedModel::galerkin_rhs(const Point& xi) const {
  const Vector th = rhs_->coefficients(xi);
  Vector br = Vector::Zero(dim());
  for (std::size_t k = 0; k < gal_b_.size(); ++k) br += th[static_cast<Index>(k)] * gal_b_[k];
  return br;
}

void ReducedModel::attach(const InverseBasis& basis, unsigned workers) {
  if (!basis.empty() && basis.dim() != n()) throw DimensionError("attach: basis dimension mismatch");
  const std::size_t m = basis.size();
  const std::size_t mA = op_->num_terms(), mb = rhs_->terms().size();
  PAU_.assign(m, {});
  Pb_.assign(m, {});
  G_.assign(m, {});
  h_.assign(m, {});
  Z_.assign(m, Matrix());
  parallel_for(m, workers, [&](std::size_t i) {
    const FactorizedInverse& P = basis[i];
    for (std::size_t k = 0; k < mA; ++k) {
      PAU_[i].push_back(P.apply(AkU_[k]));
      G_[i].push_back(RU_.transpose() * PAU_[i].back());
    }
    for (std::size_t k = 0; k < mb; ++k) {
      Pb_[i].push_back(P.apply(rhs_->terms()[k]));
      h_[i].push_back(RU_.transpose() * Pb_[i].back());
    }
    Z_[i] = P.apply(RU_, true);
  });
  attached_ = basis;
}

bool ReducedModel::attached_to(const InverseBasis& basis) const {
  if (attached_.size() != basis.size() || basis.empty()) return false;
  for (std::size_t i = 0; i < basis.size(); ++i)
    if ((attached_.points()[i] - basis.points()[i]).cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

Vector ReducedModel::petrov_galerkin_blocks(const Point& xi, const Vector& lambda) const {
  if (lambda.size() != static_cast<Index>(attached_.size())) throw DimensionError("lambda does not match the attached basis");
  const Vector phi = op_->coefficients(xi);
  const Vector th = rhs_->coefficients(xi);
  Matrix Ar = Matrix::Zero(dim(), dim());
  Vector br = Vector::Zero(dim());
  for (std::size_t i = 0; i < attached_.size(); ++i) {
    const double l = lambda[static_cast<Index>(i)];
    if (l == 0.0) continue;
    for (std::size_t k = 0; k < G_[i].size(); ++k) Ar += (l * phi[static_cast<Index>(k)]) * G_[i][k];
    for (std::size_t k = 0; k < h_[i].size(); ++k) br += (l * th[static_cast<Index>(k)]) * h_[i][k];
  }
  return solve_reduced(Ar, br, xi);
}

Vector ReducedModel::preconditioned_residual_blocks(const Point& xi, const Vector& lambda, const Vector& a) const {
  if (lambda.size() != static_cast<Index>(attached_.size())) throw DimensionError("lambda does not match the attached basis");
  const Vector phi = op_->coefficients(xi);
  const Vector th = rhs_->coefficients(xi);
  Vector res = Vector::Zero(n());
  for (std::size_t i = 0; i < attached_.size(); ++i) {
    const double l = lambda[static_cast<Index>(i)];
    if (l == 0.0) continue;
    for (std::size_t k = 0; k < PAU_[i].size(); ++k) {
      if (a.size() > 0) res.noalias() += (l * phi[static_cast<Index>(k)]) * (PAU_[i][k] * a);
    }
    for (std::size_t k = 0; k < Pb_[i].size(); ++k) res -= (l * th[static_cast<Index>(k)]) * Pb_[i][k];
  }
  return res;
}

Matrix ReducedModel::pt_rx_u_blocks(const Vector& lambda) const {
  if (lambda.size() != static_cast<Index>(attached_.size())) throw DimensionError("lambda does not match the attached basis");
  Matrix out = Matrix::Zero(n(), dim());
  for (std::size_t i = 0; i < attached_.size(); ++i) out += lambda[static_cast<Index>(i)] * Z_[i];
  return out;
}

Vector petrov_galerkin(const Point& xi, const ReducedModel& model, const LocalPreconditioner& P) {
  if (model.dim() == 0) return Vector();
  const SparseMatrix A = model.op().eval(xi);
  const Matrix PAU = P.apply(Matrix(A * model.U()));
  const Vector Pb = P.apply(model.rhs().eval(xi));
  const Matrix RU = model.norm().apply(model.U());
  return solve_reduced(RU.transpose() * PAU, RU.transpose() * Pb, xi);
}

Vector petrov_galerkin(const Point& xi, const ReducedModel& model, const Preconditioner& P) {
  return petrov_galerkin(xi, model, P.at(xi));
}

Vector galerkin(const Point& xi, const ReducedModel& model) {
  return solve_reduced(model.galerkin_matrix(xi), model.galerkin_rhs(xi), xi);
}

Vector best_approx_of(const Vector& u, const ReducedModel& model) {
  return model.U().transpose() * model.norm().apply(u);
}

Vector best_approx(const Point& xi, const ReducedModel& model) {
  const FactorizedInverse F = factorize(model.op().eval(xi), xi);
  return best_approx_of(F.apply(model.rhs().eval(xi)), model);
}

double delta_rm_from(const Point& xi, const ReducedModel& model, const Matrix& PtRU) {
  const Index r = model.dim();
  if (r == 0) return 0.0;
  const SparseMatrix A = model.op().eval(xi);
  const Matrix B = SparseMatrix(A.transpose()) * PtRU;
  const Matrix RinvB = model.norm().solve(B);
  Matrix Gm = B.transpose() * RinvB;
  Gm = 0.5 * (Gm + Gm.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eg(Gm);
  const double gmax = eg.eigenvalues().maxCoeff();
  if (!(gmax > 0.0) || eg.eigenvalues().minCoeff() <= 1e-13 * gmax)
    throw DegenerateTestSpace("preconditioned test space is rank deficient at this parameter");
  const Matrix UtB = model.U().transpose() * B;
  Matrix C = UtB * eg.eigenvectors() * eg.eigenvalues().cwiseInverse().asDiagonal() * eg.eigenvectors().transpose() *
             UtB.transpose();
  C = 0.5 * (C + C.transpose()).eval();
  Matrix D = model.U().transpose() * model.norm().apply(model.U());
  D = 0.5 * (D + D.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ge(C, D, Eigen::EigenvaluesOnly);
  const double gamma = ge.eigenvalues().minCoeff();
  return std::sqrt(std::clamp(1.0 - gamma, 0.0, 1.0));
}

double delta_rm(const Point& xi, const ReducedModel& model, const LocalPreconditioner& P) {
  if (model.dim() == 0) return 0.0;
  return delta_rm_from(xi, model, P.apply_transpose(model.norm().apply(model.U())));
}

double quasi_opt_constant(double delta) {
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be nonnegative");
  if (delta >= 1.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(1.0 - delta * delta);
}

double preconditioned_residual_norm(const Point& xi, const Vector& u_r, const LocalPreconditioner& P,
                                    const AffineOperator& op, const AffineVector& rhs, const NormMatrix& RX) {
  if (u_r.size() != op.dim()) throw DimensionError("residual: expected a full-length vector");
  const Vector res = op.eval(xi) * u_r - rhs.eval(xi);
  return RX.xnorm(P.apply(res));
}

double preconditioned_residual_norm(const Point& xi, const Vector& u_r, const LocalPreconditioner& P,
                                    const ReducedModel& model) {
  return preconditioned_residual_norm(xi, u_r, P, model.op(), model.rhs(), model.norm());
}

double dual_residual_norm(const Point& xi, const Vector& u_r, const AffineOperator& op, const AffineVector& rhs,
                          const NormMatrix& RX) {
  if (u_r.size() != op.dim()) throw DimensionError("residual: expected a full-length vector");
  return RX.xdualnorm(op.eval(xi) * u_r - rhs.eval(xi));
}

SingularBounds singular_bounds(const Point& xi, const LocalPreconditioner& P, const AffineOperator& op,
                               const NormMatrix& RX) {
  const Index n = op.dim();
  if (n > 2000) throw InvalidSize("dense singular bounds are limited to n <= 2000");
  const Matrix PA = P.dense() * op.eval(xi);
  const Matrix R = Matrix(RX.matrix());
  Eigen::LLT<Matrix> llt(R);  // R = L L^T
  if (llt.info() != Eigen::Success) throw NotSPD("dense Cholesky of the norm matrix failed");
  const Matrix L = llt.matrixL();
  const Matrix M1 = L.transpose() * PA;
  // T = M1 L^{-T}, i.e. T^T = L^{-1} M1^T
  const Matrix T = L.triangularView<Eigen::Lower>().solve(M1.transpose()).transpose();
  Eigen::BDCSVD<Matrix> svd(T);
  const Vector sv = svd.singularValues();
  SingularBounds b;
  b.beta = sv[0];
  b.alpha = sv[n - 1];
  b.kappa = b.alpha > 0.0 ? b.beta / b.alpha : std::numeric_limits<double>::infinity();
  return b;
}

Effectivity effectivity(const Point& xi, const Vector& u_r, const LocalPreconditioner& P, const Vector& exact_u,
                        const AffineOperator& op, const AffineVector& rhs, const NormMatrix& RX) {
  Effectivity e;
  const double err = RX.xnorm(exact_u - u_r);
  if (err == 0.0) {
    e.exact = true;
    e.eta = 1.0;
    return e;
  }
  e.eta = preconditioned_residual_norm(xi, u_r, P, op, rhs, RX) / err;
  return e;
}

std::pair<double, double> confidence_interval(std::vector<double> values, double p) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }), values.end());
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("confidence level must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const std::size_t N = values.size();
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p * static_cast<double>(N) - 1e-12)));
  std::size_t best = 0;
  for (std::size_t i = 0; i + k <= N; ++i)
    if (values[i + k - 1] - values[i] < values[best + k - 1] - values[best]) best = i;
  return {values[best], values[best + k - 1]};
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(values.size() - 1, lo + 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Matrix pod_basis(const Matrix& snapshots, const NormMatrix& RX, Index r) {
  if (snapshots.rows() != RX.dim()) throw DimensionError("pod_basis: snapshot length mismatch");
  if (r < 0 || r > snapshots.cols()) throw InvalidArgument("pod_basis: rank exceeds the snapshot count");
  // Method of snapshots on the X-Gram matrix.
  Matrix C = snapshots.transpose() * RX.apply(snapshots);
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eg(C);
  const Index N = C.rows();
  const double smax = N > 0 ? eg.eigenvalues()[N - 1] : 0.0;
  Matrix U(snapshots.rows(), r);
  for (Index j = 0; j < r; ++j) {
    const double s = eg.eigenvalues()[N - 1 - j];
    if (!(s > 1e-13 * smax)) throw InvalidArgument("pod_basis: snapshots span fewer than r directions");
    U.col(j) = snapshots * eg.eigenvectors().col(N - 1 - j) / std::sqrt(s);
  }
  return U;
}

}  // namespace paraprec
