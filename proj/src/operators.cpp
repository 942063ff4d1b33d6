#include "paraprec/operators.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "paraprec/error.hpp"

namespace paraprec {

// ---- coefficient functions -------------------------------------------------

CoefficientFunction CoefficientFunction::constant(double value) {
  CoefficientFunction f;
  f.kind = Kind::constant;
  f.scale = value;
  return f;
}

CoefficientFunction CoefficientFunction::cosine(double amplitude, double frequency, int coord, double phase) {
  CoefficientFunction f;
  f.kind = Kind::cosine;
  f.scale = amplitude;
  f.frequency = frequency;
  f.coord = coord;
  f.phase = phase;
  return f;
}

CoefficientFunction CoefficientFunction::sine(double amplitude, double frequency, int coord, double phase) {
  CoefficientFunction f = cosine(amplitude, frequency, coord, phase);
  f.kind = Kind::sine;
  return f;
}

CoefficientFunction CoefficientFunction::monomial(double coefficient, double power, int coord) {
  CoefficientFunction f;
  f.kind = Kind::monomial;
  f.scale = coefficient;
  f.power = power;
  f.coord = coord;
  return f;
}

CoefficientFunction CoefficientFunction::log_uniform(double lo, double hi, int coord) {
  if (!(lo > 0.0 && hi > 0.0)) throw InvalidArgument("log_uniform bounds must be positive");
  CoefficientFunction f;
  f.kind = Kind::log_uniform;
  f.lo = lo;
  f.hi = hi;
  f.coord = coord;
  return f;
}

CoefficientFunction CoefficientFunction::tabulated(PointSet points, std::vector<double> values) {
  if (points.size() != values.size()) throw DimensionError("tabulated coefficient: points/values length mismatch");
  CoefficientFunction f;
  f.kind = Kind::tabulated;
  f.table_points = std::move(points);
  f.table_values = std::move(values);
  return f;
}

double CoefficientFunction::operator()(const Point& xi) const {
  if (kind != Kind::constant && kind != Kind::tabulated && coord >= xi.size())
    throw DimensionError("coefficient uses coordinate " + std::to_string(coord) + " of a " +
                         std::to_string(xi.size()) + "-dimensional parameter");
  switch (kind) {
    case Kind::constant:
      return scale;
    case Kind::cosine:
      return scale * std::cos(frequency * xi[coord] + phase);
    case Kind::sine:
      return scale * std::sin(frequency * xi[coord] + phase);
    case Kind::monomial:
      return scale * std::pow(xi[coord], power);
    case Kind::log_uniform:
      return scale * lo * std::pow(hi / lo, xi[coord]);
    case Kind::tabulated:
      for (std::size_t i = 0; i < table_points.size(); ++i) {
        if (table_points[i].size() == xi.size() && (table_points[i] - xi).cwiseAbs().maxCoeff() <= 1e-12)
          return scale * table_values[i];
      }
      throw InvalidArgument("tabulated coefficient queried off its table");
  }
  return 0.0;
}

CoefficientFunction CoefficientFunction::scaled(double c) const {
  CoefficientFunction f = *this;
  f.scale *= c;
  return f;
}

int CoefficientFunction::min_param_dim() const {
  if (kind == Kind::constant) return 0;
  if (kind == Kind::tabulated) return table_points.empty() ? 0 : static_cast<int>(table_points.front().size());
  return coord + 1;
}

bool ParameterDomain::contains(const Point& xi, double tol) const {
  if (xi.size() != lo.size()) return false;
  for (Index j = 0; j < xi.size(); ++j) {
    const double w = tol * std::max(1.0, hi[j] - lo[j]);
    if (xi[j] < lo[j] - w || xi[j] > hi[j] + w) return false;
  }
  return true;
}

// ---- affine operator -------------------------------------------------------

AffineOperator::AffineOperator(std::vector<SparseMatrix> terms, std::vector<CoefficientFunction> coeffs,
                               int param_dim, std::optional<ParameterDomain> domain)
    : d_(param_dim), terms_(std::move(terms)), coeffs_(std::move(coeffs)), domain_(std::move(domain)) {
  if (terms_.empty()) throw InvalidArgument("affine operator needs at least one term");
  if (terms_.size() != coeffs_.size())
    throw DimensionError("affine operator: " + std::to_string(terms_.size()) + " terms but " +
                         std::to_string(coeffs_.size()) + " coefficient functions");
  if (d_ < 1) throw InvalidArgument("parameter dimension must be positive");
  n_ = terms_.front().rows();
  if (n_ < 1) throw DimensionError("affine operator terms must be non-empty");
  for (auto& t : terms_) {
    if (t.rows() != n_ || t.cols() != n_) throw DimensionError("affine operator terms must all be n x n");
    t.makeCompressed();
  }
  for (const auto& c : coeffs_)
    if (c.min_param_dim() > d_) throw DimensionError("coefficient function exceeds the parameter dimension");
  if (domain_ && (domain_->lo.size() != d_ || domain_->hi.size() != d_))
    throw DimensionError("parameter domain dimension mismatch");

  // Union pattern: the sum of |A_k| keeps every structural entry.
  pattern_ = SparseMatrix(n_, n_);
  for (const auto& t : terms_) pattern_ += t.cwiseAbs();
  pattern_.makeCompressed();
  slots_.resize(terms_.size());
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const auto& t = terms_[k];
    slots_[k].reserve(t.nonZeros());
    for (Index col = 0; col < n_; ++col) {
      Index p = pattern_.outerIndexPtr()[col];
      const Index pend = pattern_.outerIndexPtr()[col + 1];
      for (SparseMatrix::InnerIterator it(t, col); it; ++it) {
        while (p < pend && pattern_.innerIndexPtr()[p] != it.row()) ++p;
        slots_[k].push_back(p);
      }
    }
  }
}

void AffineOperator::check_point(const Point& xi) const {
  if (xi.size() != d_)
    throw DimensionError("parameter has dimension " + std::to_string(xi.size()) + ", expected " +
                         std::to_string(d_));
  if (domain_ && !domain_->contains(xi)) throw InvalidArgument("parameter outside the declared domain");
}

Vector AffineOperator::coefficients(const Point& xi) const {
  check_point(xi);
  Vector phi(coeffs_.size());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) phi[k] = coeffs_[k](xi);
  return phi;
}

SparseMatrix AffineOperator::eval_coefficients(const Vector& phi) const {
  if (phi.size() != static_cast<Index>(terms_.size())) throw DimensionError("coefficient vector length mismatch");
  SparseMatrix out = pattern_;
  double* values = out.valuePtr();
  std::fill(values, values + out.nonZeros(), 0.0);
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const double* tv = terms_[k].valuePtr();
    const auto& slot = slots_[k];
    for (std::size_t e = 0; e < slot.size(); ++e) values[slot[e]] += phi[k] * tv[e];
  }
  return out;
}

SparseMatrix AffineOperator::eval(const Point& xi) const { return eval_coefficients(coefficients(xi)); }

AffineOperator AffineOperator::scaled(double c) const {
  std::vector<CoefficientFunction> cs;
  for (const auto& f : coeffs_) cs.push_back(f.scaled(c));
  return AffineOperator(terms_, std::move(cs), d_, domain_);
}

SparseMatrix eval_operator(const AffineOperator& op, const Point& xi) { return op.eval(xi); }

AffineVector::AffineVector(std::vector<Vector> terms, std::vector<CoefficientFunction> coeffs, int param_dim)
    : d_(param_dim), terms_(std::move(terms)), coeffs_(std::move(coeffs)) {
  if (terms_.empty()) throw InvalidArgument("affine vector needs at least one term");
  if (terms_.size() != coeffs_.size()) throw DimensionError("affine vector: terms/coefficients length mismatch");
  n_ = terms_.front().size();
  for (const auto& t : terms_)
    if (t.size() != n_) throw DimensionError("affine vector terms must share length");
}

Vector AffineVector::coefficients(const Point& xi) const {
  if (xi.size() != d_) throw DimensionError("parameter dimension mismatch");
  Vector th(coeffs_.size());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) th[k] = coeffs_[k](xi);
  return th;
}

Vector AffineVector::eval(const Point& xi) const {
  const Vector th = coefficients(xi);
  Vector out = Vector::Zero(n_);
  for (std::size_t k = 0; k < terms_.size(); ++k) out += th[k] * terms_[k];
  return out;
}

// ---- factorized inverse ----------------------------------------------------

struct FactorizedInverse::Impl {
  // transpose() on SparseLU is non-const although it does not modify state.
  mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  Point tag;
  Index n = 0;
  double cond = 0.0;
  mutable std::atomic<std::uint64_t> count{0};
};

namespace {

// Hager/Higham estimate of ||A^{-1}||_1 using solves only.
template <class Solve, class SolveT>
std::pair<double, Index> inverse_norm1_estimate(Index n, Solve solve, SolveT solve_t) {
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  Index arg = 0;
  Index last_j = -1;
  for (int iter = 0; iter < 5; ++iter) {
    const Vector y = solve(x);
    if (!y.allFinite()) return {std::numeric_limits<double>::infinity(), 0};
    est = y.lpNorm<1>();
    y.cwiseAbs().maxCoeff(&arg);
    Vector s = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Vector z = solve_t(s);
    Index j;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (iter > 0 && (zmax <= z.dot(x) || j == last_j)) break;
    x.setZero();
    x[j] = 1.0;
    last_j = j;
  }
  Vector b(n);
  for (Index i = 0; i < n; ++i)
    b[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0));
  const Vector yb = solve(b);
  if (!yb.allFinite()) return {std::numeric_limits<double>::infinity(), 0};
  const double alt = 2.0 * yb.lpNorm<1>() / (3.0 * static_cast<double>(n));
  if (alt > est) {
    est = alt;
    yb.cwiseAbs().maxCoeff(&arg);
  }
  return {est, arg};
}

double norm1(const SparseMatrix& A) {
  double best = 0.0;
  for (Index c = 0; c < A.outerSize(); ++c) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

FactorizedInverse::FactorizedInverse(const SparseMatrix& A, Point tag) {
  if (A.rows() != A.cols()) throw DimensionError("factorize needs a square matrix");
  if (A.rows() == 0) throw DimensionError("factorize needs a non-empty matrix");
  auto impl = std::make_shared<Impl>();
  impl->n = A.rows();
  impl->tag = std::move(tag);
  SparseMatrix Ac = A;
  Ac.makeCompressed();
  impl->lu.analyzePattern(Ac);
  impl->lu.factorize(Ac);
  if (impl->lu.info() != Eigen::Success) {
    const std::string msg = impl->lu.lastErrorMessage();
    long pivot = -1;
    const auto pos = msg.find("ZERO COLUMN AT ");
    if (pos != std::string::npos) {
      std::istringstream is(msg.substr(pos + 15));
      is >> pivot;
      // Eigen reports the 1-based column of the permuted matrix.
      if (pivot > 0) pivot = impl->lu.colsPermutation().indices()[pivot - 1];
    }
    throw SingularOperator(pivot, "LU factorization hit a zero pivot");
  }
  const Impl& ref = *impl;
  auto solve = [&ref](const Vector& x) -> Vector { return ref.lu.solve(x); };
  auto solve_t = [&ref](const Vector& x) -> Vector { return ref.lu.transpose().solve(x); };
  const auto [inv_norm, arg] = inverse_norm1_estimate(impl->n, solve, solve_t);
  impl->cond = norm1(Ac) * inv_norm;
  if (!std::isfinite(impl->cond) || impl->cond > 0.1 / std::numeric_limits<double>::epsilon())
    throw SingularOperator(static_cast<long>(arg), "matrix is numerically singular (condition estimate " +
                                                       std::to_string(impl->cond) + ")");
  impl_ = std::move(impl);
}

Index FactorizedInverse::dim() const { return impl_ ? impl_->n : 0; }

const Point& FactorizedInverse::tag() const {
  static const Point empty;
  return impl_ ? impl_->tag : empty;
}

Vector FactorizedInverse::apply(const Vector& x, bool transpose) const {
  if (!impl_) throw InvalidArgument("apply on an empty FactorizedInverse");
  if (x.size() != impl_->n)
    throw DimensionError("apply_inverse: vector length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(impl_->n));
  impl_->count.fetch_add(1, std::memory_order_relaxed);
  if (transpose) return impl_->lu.transpose().solve(x);
  return impl_->lu.solve(x);
}

Matrix FactorizedInverse::apply(const Matrix& X, bool transpose) const {
  if (!impl_) throw InvalidArgument("apply on an empty FactorizedInverse");
  if (X.rows() != impl_->n) throw DimensionError("apply_inverse: row count mismatch");
  impl_->count.fetch_add(static_cast<std::uint64_t>(X.cols()), std::memory_order_relaxed);
  if (transpose) return impl_->lu.transpose().solve(X);
  return impl_->lu.solve(X);
}

double FactorizedInverse::condition_estimate() const { return impl_ ? impl_->cond : 0.0; }

std::uint64_t FactorizedInverse::applications() const { return impl_ ? impl_->count.load() : 0; }

FactorizedInverse factorize(const SparseMatrix& A, Point tag) { return FactorizedInverse(A, std::move(tag)); }

Vector apply_inverse(const FactorizedInverse& F, const Vector& x, bool transpose) { return F.apply(x, transpose); }

// ---- norm matrix -----------------------------------------------------------

struct NormMatrix::Impl {
  SparseMatrix R;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool identity = false;
};

NormMatrix::NormMatrix(const SparseMatrix& R) {
  if (R.rows() != R.cols() || R.rows() == 0) throw DimensionError("norm matrix must be square and non-empty");
  auto impl = std::make_shared<Impl>();
  impl->R = R;
  impl->R.makeCompressed();
  const double scale = impl->R.coeffs().cwiseAbs().maxCoeff();
  const SparseMatrix asym = SparseMatrix(impl->R - SparseMatrix(impl->R.transpose()));
  const double skew = asym.nonZeros() ? asym.coeffs().cwiseAbs().maxCoeff() : 0.0;
  if (skew > 1e-12 * scale) throw NotSPD("norm matrix is not symmetric (max asymmetry " + std::to_string(skew) + ")");
  impl->ldlt.compute(impl->R);
  if (impl->ldlt.info() != Eigen::Success) throw NotSPD("Cholesky factorization of the norm matrix failed");
  const Vector d = impl->ldlt.vectorD();
  Index bad;
  if (!(d.minCoeff(&bad) > 0.0)) throw NotSPD("non-positive pivot at index " + std::to_string(bad));
  impl_ = std::move(impl);
}

NormMatrix NormMatrix::identity(Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  NormMatrix N(I);
  std::const_pointer_cast<Impl>(N.impl_)->identity = true;
  return N;
}

Index NormMatrix::dim() const { return impl_ ? impl_->R.rows() : 0; }
const SparseMatrix& NormMatrix::matrix() const { return impl_->R; }
bool NormMatrix::is_identity() const { return impl_ && impl_->identity; }

Vector NormMatrix::apply(const Vector& v) const {
  if (v.size() != dim()) throw DimensionError("norm matrix: vector length mismatch");
  return impl_->R * v;
}

Matrix NormMatrix::apply(const Matrix& V) const {
  if (V.rows() != dim()) throw DimensionError("norm matrix: row count mismatch");
  return impl_->R * V;
}

Vector NormMatrix::solve(const Vector& v) const {
  if (v.size() != dim()) throw DimensionError("norm matrix: vector length mismatch");
  return impl_->ldlt.solve(v);
}

Matrix NormMatrix::solve(const Matrix& V) const {
  if (V.rows() != dim()) throw DimensionError("norm matrix: row count mismatch");
  return impl_->ldlt.solve(V);
}

double NormMatrix::inner(const Vector& v, const Vector& w) const { return v.dot(apply(w)); }

double NormMatrix::xnorm(const Vector& v) const { return std::sqrt(std::max(0.0, v.dot(apply(v)))); }

double NormMatrix::xdualnorm(const Vector& v) const { return std::sqrt(std::max(0.0, v.dot(solve(v)))); }

double xnorm(const NormMatrix& N, const Vector& v) { return N.xnorm(v); }
double xdualnorm(const NormMatrix& N, const Vector& v) { return N.xdualnorm(v); }

Point make_point(std::initializer_list<double> values) {
  Point p(static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) p[i++] = v;
  return p;
}

Point make_point(double x) { return Point::Constant(1, x); }

}  // namespace paraprec
