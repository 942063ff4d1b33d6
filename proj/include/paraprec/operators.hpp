#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace paraprec {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Point = Eigen::VectorXd;
using PointSet = std::vector<Point>;

// Scalar coefficient function of the parameter. Symbolic forms act on one
// coordinate; tabulated functions are only defined on their table points.
struct CoefficientFunction {
  enum class Kind { constant, cosine, sine, monomial, log_uniform, tabulated };

  Kind kind = Kind::constant;
  int coord = 0;
  double scale = 1.0;      // multiplies every form
  double frequency = 0.0;  // cosine/sine: scale * cos(frequency * x + phase)
  double phase = 0.0;
  double power = 0.0;      // monomial: scale * x^power
  double lo = 1.0;         // log_uniform: scale * lo * (hi/lo)^x
  double hi = 1.0;
  PointSet table_points;
  std::vector<double> table_values;

  static CoefficientFunction constant(double value);
  static CoefficientFunction cosine(double amplitude, double frequency, int coord = 0, double phase = 0.0);
  static CoefficientFunction sine(double amplitude, double frequency, int coord = 0, double phase = 0.0);
  static CoefficientFunction monomial(double coefficient, double power, int coord = 0);
  static CoefficientFunction log_uniform(double lo, double hi, int coord = 0);
  static CoefficientFunction tabulated(PointSet points, std::vector<double> values);

  double operator()(const Point& xi) const;
  CoefficientFunction scaled(double c) const;
  int min_param_dim() const;
};

// Optional box constraint on admissible parameters.
struct ParameterDomain {
  Vector lo, hi;
  bool contains(const Point& xi, double tol = 1e-12) const;
};

// A(xi) = sum_k Phi_k(xi) A_k. Evaluation fills a fixed union sparsity
// pattern so every A(xi) has identical structure.
class AffineOperator {
 public:
  AffineOperator() = default;
  AffineOperator(std::vector<SparseMatrix> terms, std::vector<CoefficientFunction> coeffs,
                 int param_dim, std::optional<ParameterDomain> domain = std::nullopt);

  Index dim() const { return n_; }
  int param_dim() const { return d_; }
  std::size_t num_terms() const { return terms_.size(); }
  const std::vector<SparseMatrix>& terms() const { return terms_; }
  const std::vector<CoefficientFunction>& coeffs() const { return coeffs_; }
  const std::optional<ParameterDomain>& domain() const { return domain_; }

  Vector coefficients(const Point& xi) const;
  SparseMatrix eval(const Point& xi) const;
  SparseMatrix eval_coefficients(const Vector& phi) const;
  // Same terms, coefficient functions multiplied by c.
  AffineOperator scaled(double c) const;

 private:
  void check_point(const Point& xi) const;

  Index n_ = 0;
  int d_ = 0;
  std::vector<SparseMatrix> terms_;
  std::vector<CoefficientFunction> coeffs_;
  std::optional<ParameterDomain> domain_;
  SparseMatrix pattern_;
  std::vector<std::vector<Index>> slots_;  // term k, entry e -> index into pattern values
};

class AffineVector {
 public:
  AffineVector() = default;
  AffineVector(std::vector<Vector> terms, std::vector<CoefficientFunction> coeffs, int param_dim);

  Index dim() const { return n_; }
  int param_dim() const { return d_; }
  const std::vector<Vector>& terms() const { return terms_; }
  const std::vector<CoefficientFunction>& coeffs() const { return coeffs_; }
  Vector coefficients(const Point& xi) const;
  Vector eval(const Point& xi) const;

 private:
  Index n_ = 0;
  int d_ = 0;
  std::vector<Vector> terms_;
  std::vector<CoefficientFunction> coeffs_;
};

SparseMatrix eval_operator(const AffineOperator& op, const Point& xi);

// Sparse LU factorization of one operator sample, exposed only through solve
// and transpose-solve. Copies share the immutable factorization.
class FactorizedInverse {
 public:
  FactorizedInverse() = default;
  explicit FactorizedInverse(const SparseMatrix& A, Point tag = Point());

  Index dim() const;
  const Point& tag() const;
  Vector apply(const Vector& x, bool transpose = false) const;
  Matrix apply(const Matrix& X, bool transpose = false) const;
  // Estimated 1-norm condition number of the factored matrix.
  double condition_estimate() const;
  // Number of single-vector inverse applications so far (diagnostics only).
  std::uint64_t applications() const;
  bool valid() const { return impl_ != nullptr; }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

FactorizedInverse factorize(const SparseMatrix& A, Point tag = Point());
Vector apply_inverse(const FactorizedInverse& F, const Vector& x, bool transpose = false);

// SPD matrix R_X defining ||v||_X^2 = v^T R_X v, with a Cholesky factorization
// for the dual norm.
class NormMatrix {
 public:
  NormMatrix() = default;
  explicit NormMatrix(const SparseMatrix& R);
  static NormMatrix identity(Index n);

  Index dim() const;
  const SparseMatrix& matrix() const;
  Vector apply(const Vector& v) const;
  Matrix apply(const Matrix& V) const;
  Vector solve(const Vector& v) const;
  Matrix solve(const Matrix& V) const;
  double xnorm(const Vector& v) const;
  double xdualnorm(const Vector& v) const;
  double inner(const Vector& v, const Vector& w) const;
  bool is_identity() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

double xnorm(const NormMatrix& N, const Vector& v);
double xdualnorm(const NormMatrix& N, const Vector& v);

Point make_point(std::initializer_list<double> values);
Point make_point(double x);

}  // namespace paraprec
